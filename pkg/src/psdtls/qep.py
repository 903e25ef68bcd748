"""Direct rank-1 solver through a quadratic eigenvalue problem.

At rank one the stationarity conditions for the pair (u, v) = (s y, y/s)
read  (C + w I) u = 2 B v  and  (C + w I) v = 2 A u  for a scalar
multiplier w.  Eliminating u gives the quadratic eigenvalue problem

    (w^2 A^-1 + w (C A^-1 + A^-1 C) + (C A^-1 C - 4 B)) v = 0,

which is linearized into a 2n x 2n companion pencil.  Because the leading
coefficient's inverse is A itself, the companion matrix is explicit and a
standard dense eigensolver applies.  Every admissible real eigenpair is
turned into a candidate (y, s), scored by the objective, and the best
candidate wins; ties within 1e-12 go to the smallest |w|.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoRealCandidateError,
    PsdtlsError,
    SingularAError,
    SingularMatrixError,
)
from .linalg import frobenius_norm, solve_dense
from .newton import RankRSolution, solve_rank_r
from .objective import FactorPair, ReducedProblem, objective_value, reduce_instance

__all__ = ["QepCandidate", "rank1_candidates", "solve_rank1_qep"]

REAL_EIG_TOL = 1e-8
DOT_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True)
class QepCandidate:
    """One admissible stationary point of the rank-1 problem.

    ``u`` and ``v`` are the eigenpair vectors normalized to u'v = 1; the
    collapsed representative is y = u/||u|| with scale s = sqrt(||u||/||v||).
    ``residual_primary`` is the relative residual of (C + w I) u = 2 B v
    (the eliminated equation, i.e. the QEP residual); ``residual_secondary``
    is that of (C + w I) v = 2 A u, which holds by construction of u.
    """

    omega: float
    y: np.ndarray
    s: float
    E: float
    residual_primary: float
    residual_secondary: float
    u: np.ndarray = None
    v: np.ndarray = None


def _phase_rotate(v):
    """Best real representative of a complex eigenvector.

    Minimizes ||Im(e^{i theta} v)|| over theta; returns (real part,
    leftover imaginary norm).
    """
    x, y = v.real, v.imag
    a = float(x @ x)
    b = float(y @ y)
    c = float(x @ y)
    if b == 0.0:
        return x.copy(), 0.0
    theta0 = 0.5 * np.arctan2(-2.0 * c, a - b)
    best = None
    for theta in (theta0, theta0 + 0.5 * np.pi):
        rot = np.exp(1j * theta) * v
        resid = float(np.sqrt((rot.imag @ rot.imag)))
        if best is None or resid < best[1]:
            best = (rot.real.copy(), resid)
    return best


def rank1_candidates(problem):
    """All admissible candidates of the rank-1 stationarity sweep.

    ``problem`` may be a ProblemInstance or a ReducedProblem.  Raises
    ``SingularAError`` when A = D'D cannot be inverted reliably and
    ``NoRealCandidateError`` when no eigenpair survives the filters.
    """
    if not isinstance(problem, ReducedProblem):
        problem = reduce_instance(problem)
    A, B, C = problem.A, problem.B, problem.C
    n = problem.n
    eye = np.eye(n)
    try:
        A_inv = solve_dense(A, eye)
    except SingularMatrixError as exc:
        raise SingularAError("D'D is singular; the rank-1 reduction needs its inverse") from exc
    inv_err = frobenius_norm(A @ A_inv - eye)
    if inv_err > 1e-8 * np.sqrt(n):
        raise SingularAError(
            f"D'D is too ill-conditioned to invert (residual {inv_err:.3e})"
        )

    M1 = C @ A_inv + A_inv @ C
    M0 = C @ A_inv @ C - 4.0 * B
    companion = np.zeros((2 * n, 2 * n))
    companion[:n, n:] = eye
    companion[n:, :n] = -(A @ M0)
    companion[n:, n:] = -(A @ M1)
    eigvals, eigvecs = np.linalg.eig(companion)

    norm_B = frobenius_norm(B)
    norm_A = frobenius_norm(A)
    norm_C = frobenius_norm(C)
    candidates = []
    for k in range(2 * n):
        lam = eigvals[k]
        if abs(lam.imag) > REAL_EIG_TOL * (1.0 + abs(lam)):
            continue
        omega = float(lam.real)
        v_c = eigvecs[:n, k]
        vnorm_c = float(np.sqrt((v_c.conj() @ v_c).real))
        if vnorm_c == 0.0:
            continue
        v, imag_left = _phase_rotate(v_c)
        if imag_left > REAL_EIG_TOL * vnorm_c:
            continue
        vnorm = float(np.sqrt(v @ v))
        if vnorm == 0.0:
            continue
        u = 0.5 * A_inv @ (C @ v + omega * v)
        unorm = float(np.sqrt(u @ u))
        t = float(u @ v)
        if t <= DOT_TOL * max(unorm * vnorm, 1e-300):
            continue
        gamma = 1.0 / np.sqrt(t)
        u = gamma * u
        v = gamma * v
        unorm = float(np.sqrt(u @ u))
        vnorm = float(np.sqrt(v @ v))
        if unorm == 0.0 or vnorm == 0.0:
            continue
        y = u / unorm
        pivot = int(np.argmax(np.abs(y)))
        if y[pivot] < 0.0:
            y = -y
        s = float(np.sqrt(unorm / vnorm))
        E = objective_value(problem, FactorPair(y[:, None], np.array([s])))
        cu = C @ u + omega * u
        cv = C @ v + omega * v
        r1 = float(np.sqrt(((2.0 * B @ v - cu) ** 2).sum()))
        r1 /= norm_B * vnorm + (norm_C + abs(omega)) * unorm + 1e-300
        r2 = float(np.sqrt(((2.0 * A @ u - cv) ** 2).sum()))
        r2 /= norm_A * unorm + (norm_C + abs(omega)) * vnorm + 1e-300
        candidates.append(
            QepCandidate(
                omega=omega,
                y=y,
                s=s,
                E=E,
                residual_primary=r1,
                residual_secondary=r2,
                u=u,
                v=v,
            )
        )
    if not candidates:
        raise NoRealCandidateError(
            "no real eigenpair with positive u'v in the rank-1 sweep"
        )
    return candidates


def _pivot_sign(y):
    pivot = int(np.argmax(np.abs(y)))
    return -y if y[pivot] < 0.0 else y


def solve_rank1_qep(problem, config=None, polish=True, polish_starts=3):
    """Best rank-1 factor pair from the quadratic eigenvalue sweep.

    The pencil's eigenpairs are stationary points of a relaxation in which
    u = s y and v = y/s vary independently; collapsing an eigenpair back to
    a single unit vector and scale can therefore land slightly off the true
    rank-1 minimizer whenever the eigenpair has u and v not parallel.  With
    ``polish`` (the default) the sweep's ``polish_starts`` leading
    candidates, plus the iterative solver's own default start, each seed a
    rank-1 Newton refinement and the best refined result is returned.  Set
    ``polish=False`` to return the raw sweep minimizer.
    """
    if not isinstance(problem, ReducedProblem):
        problem = reduce_instance(problem)
    candidates = rank1_candidates(problem)
    e_min = min(c.E for c in candidates)
    near = [c for c in candidates if c.E <= e_min + TIE_TOL * (1.0 + abs(e_min))]
    best = min(near, key=lambda c: abs(c.omega))
    factors = FactorPair(best.y[:, None], np.array([best.s]))
    raw = RankRSolution(
        factors=factors,
        X=factors.x_matrix(),
        E=best.E,
        orth_residual=factors.orth_residual(),
        newton_iters=0,
        converged=True,
        backend_used="qep",
        step_norms=[],
        lin_iters=[],
    )
    if not polish:
        return raw

    ranked = sorted(candidates, key=lambda c: (c.E, abs(c.omega)))
    starts = [c.y[:, None] for c in ranked[: max(0, int(polish_starts))]]
    starts.append(None)  # the solver's own default start
    winner = raw
    for y0 in starts:
        try:
            sol = solve_rank_r(problem, 1, config, Y0=y0)
        except PsdtlsError:
            continue
        if sol.E < winner.E - TIE_TOL * (1.0 + abs(winner.E)):
            winner = sol
    if winner is raw:
        return raw
    y = _pivot_sign(winner.factors.Y[:, 0])
    s = float(winner.factors.s[0])
    factors = FactorPair(y[:, None], np.array([s]))
    return RankRSolution(
        factors=factors,
        X=factors.x_matrix(),
        E=winner.E,
        orth_residual=factors.orth_residual(),
        newton_iters=winner.newton_iters,
        converged=winner.converged,
        backend_used="qep",
        step_norms=winner.step_norms,
        lin_iters=winner.lin_iters,
        fallback_steps=winner.fallback_steps,
        reorth_count=winner.reorth_count,
        elapsed_seconds=winner.elapsed_seconds,
    )
