"""Newton iteration on the Stiefel manifold for the reduced objective.

Each outer iteration refreshes the columnwise optimal scales, forms the
gradient and the Newton operator equation restricted to the tangent space
at Y, solves it with one of three Krylov backends, and moves along a
geodesic.  A merit check on the objective guards every step: the Newton
step is damped by halving until the objective decreases (full steps win
near the solution, so the quadratic tail is untouched; damping engages in
nearly flat valleys where the unit step overshoots), and if the inner
solve fails or no damping helps, the iteration falls back to a damped
gradient step found the same way.

The tangent space at Y is { Z : Y'Z skew }.  All backends solve the same
projected system  P L P delta = -G  where P is the (self-adjoint) tangent
projection, L the raw Newton operator, and G = F_Y - Y F_Y' Y the
manifold gradient.  Two operator compositions are available.  The default
"exact" mode differentiates the map Y -> G(Y, s*(Y)) itself, scale
refresh included, so L is the true Jacobian of the gradient field that
the outer iteration drives to zero; this is what delivers the quadratic
local convergence.  The "fixed-scale" mode treats the scales as constants
inside the operator and applies curvature corrections built from skew
parts of F_Y products; it is kept as a configuration switch for
comparison and converges linearly.

The cg-o backend runs plain CG when a measured symmetry surrogate passes
and conjugate gradients on the normal equations (CGNR) otherwise; CGNR is
also the safety net when plain CG hits nonpositive curvature.  The cg-l
backend materializes the projected operator as a dense (n r) x (n r)
matrix first and refuses when n r is larger than 4000.
"""

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    MaterializedSystemTooLarge,
    NonconvergedLinearSolve,
    NonFiniteObjectiveError,
)
from .krylov import cg, cgnr, gmres
from .linalg import compact_qr, frobenius_norm, matrix_exp, spectral_decomposition
from .objective import (
    FactorPair,
    ReducedProblem,
    gradient_Y,
    hessian_apply,
    objective_value,
    optimal_scales,
    reduce_instance,
)

__all__ = [
    "Backend",
    "SolverConfig",
    "RankRSolution",
    "NewtonStepEquation",
    "LinSolveInfo",
    "initial_Y",
    "geodesic_step",
    "solve_newton_equation",
    "solve_rank_r",
]

MATERIALIZE_LIMIT = 4000


class Backend(str, Enum):
    """Inner linear-solver backends."""

    CG_O = "cg-o"
    GMRES_O = "gmres-o"
    CG_L = "cg-l"


@dataclass(frozen=True)
class SolverConfig:
    """Tunable knobs for ``solve_rank_r`` and the drivers.

    ``eps`` and ``delta`` enter the stopping rule
    ||Y_new - Y|| <= eps * ||Y|| + delta.  ``lin_max_iters`` defaults to
    n * r for gmres-o and 4 n * r for the cg backends (normal equations
    square the conditioning and the iterations are cheap);
    ``gmres_restart`` defaults to min(n * r, 50).  ``warm_start`` starts
    from the spectral initializer instead of a seeded random basis.
    ``operator_mode`` picks the Newton operator: "exact" differentiates
    the scale-refreshed gradient field (quadratic convergence),
    "fixed-scale" holds the scales constant and adds skew curvature
    corrections.  ``last_term_mode`` only affects "fixed-scale" mode and
    selects the r x r factor in its final term: "fyt_y" uses F_Y'Y,
    "yt_fy" uses Y'F_Y.
    """

    eps: float = 1e-10
    delta: float = 1e-12
    max_newton_iters: int = 200
    backend: Backend = Backend.GMRES_O
    lin_tol: float = 1e-10
    lin_max_iters: int | None = None
    gmres_restart: int | None = None
    seed: int = 0
    warm_start: bool = True
    operator_mode: str = "exact"
    last_term_mode: str = "fyt_y"
    keep_iterates: bool = False
    trace_path: str | None = None
    orth_tol: float = 1e-8
    sym_tol: float = 1e-8

    def __post_init__(self):
        if self.eps < 0 or self.delta < 0:
            raise ValueError("eps and delta must be nonnegative")
        if self.eps == 0 and self.delta == 0:
            raise ValueError("eps and delta cannot both be zero")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")
        if self.lin_tol <= 0:
            raise ValueError("lin_tol must be positive")
        if self.lin_max_iters is not None and self.lin_max_iters < 1:
            raise ValueError("lin_max_iters must be at least 1")
        if self.gmres_restart is not None and self.gmres_restart < 1:
            raise ValueError("gmres_restart must be at least 1")
        if self.operator_mode not in ("exact", "fixed-scale"):
            raise ValueError("operator_mode must be 'exact' or 'fixed-scale'")
        if self.last_term_mode not in ("fyt_y", "yt_fy"):
            raise ValueError("last_term_mode must be 'fyt_y' or 'yt_fy'")
        if not isinstance(self.backend, Backend):
            object.__setattr__(self, "backend", Backend(self.backend))

    def resolved_lin_max_iters(self, n, r):
        if self.lin_max_iters is not None:
            return self.lin_max_iters
        return n * r if self.backend is Backend.GMRES_O else 4 * n * r

    def resolved_gmres_restart(self, n, r):
        return self.gmres_restart if self.gmres_restart is not None else min(n * r, 50)


@dataclass
class RankRSolution:
    """Result of one fixed-rank solve."""

    factors: FactorPair
    X: np.ndarray
    E: float
    orth_residual: float
    newton_iters: int
    converged: bool
    backend_used: str
    step_norms: list = field(default_factory=list)
    lin_iters: list = field(default_factory=list)
    fallback_steps: int = 0
    reorth_count: int = 0
    symmetry_surrogate: float | None = None
    iterates: list | None = None
    elapsed_seconds: float = 0.0


@dataclass
class LinSolveInfo:
    """Diagnostics from one inner linear solve."""

    method: str
    iterations: int
    residual: float
    target: float
    surrogate: float | None = None


def _vec(M):
    return np.asarray(M).reshape(-1, order="F")


def _unvec(v, n, r):
    return np.asarray(v).reshape((n, r), order="F")


def _sym(M):
    return 0.5 * (M + M.T)


def _skew(M):
    return 0.5 * (M - M.T)


class NewtonStepEquation:
    """The per-iteration operator equation  P L P delta = -G.

    In "exact" mode L is the Jacobian of the scale-refreshed gradient
    field:  L(d) = H(d) - Y H(d)' Y - d (F_Y'Y) - Y (F_Y'd)  where
    H(d) = 2 (A d S^2 - C d + B d S^-2) - W diag(1/ess) colwise(W'd)
    is the total derivative of Y -> F_Y(Y, s*(Y)); the rank-one-per-column
    correction with W_i = 4 (s_i A y_i - s_i^-3 B y_i) and
    ess_i = 2 a_i + 6 b_i s_i^-4 accounts for the scales tracking Y.

    In "fixed-scale" mode L holds S constant and applies curvature
    corrections:  L(d) = F_YY(d) - Y skew(F_Y'd) - skew(d F_Y') Y
    - (1/2) (I - YY') d M  with M either F_Y'Y or Y'F_Y.

    ``apply`` and ``apply_adjoint`` include the outer tangent
    projections; the adjoint is what CGNR iterates on.
    """

    def __init__(self, problem, factors, operator_mode="exact", last_term_mode="fyt_y"):
        self.problem = problem
        self.factors = factors
        self.Y = factors.Y
        self.s = factors.s
        self.F_Y = gradient_Y(problem, factors)
        self.G = self.F_Y - self.Y @ (self.F_Y.T @ self.Y)
        if operator_mode not in ("exact", "fixed-scale"):
            raise ValueError("operator_mode must be 'exact' or 'fixed-scale'")
        self.operator_mode = operator_mode
        self.last_term_mode = last_term_mode
        Y = self.Y
        self._AY = problem.A @ Y
        self._BY = problem.B @ Y
        self._CY = problem.C @ Y
        self._s2 = self.s**2
        self._s2inv = self._s2**-1
        s = self.s
        a = np.einsum("ij,ij->j", Y, self._AY)
        b = np.einsum("ij,ij->j", Y, self._BY)
        self._W = 4.0 * (self._AY * s - self._BY * s**-3)
        self._ess = np.maximum(2.0 * a + 6.0 * b * s**-4, 1e-300)
        if last_term_mode == "fyt_y":
            self._M = self.F_Y.T @ Y
        elif last_term_mode == "yt_fy":
            self._M = Y.T @ self.F_Y
        else:
            raise ValueError("last_term_mode must be 'fyt_y' or 'yt_fy'")

    @property
    def rhs(self):
        return -self.G

    def project(self, Z):
        """Tangent projection Z - Y sym(Y'Z); self-adjoint."""
        Y = self.Y
        return Z - Y @ _sym(Y.T @ Z)

    def gradient_jacobian(self, d):
        """Total derivative of Y -> F_Y(Y, s*(Y)) applied to d.

        Self-adjoint: the scale-response term is rank-one per column with
        a nonnegative weight.
        """
        p = self.problem
        out = 2.0 * ((p.A @ d) * self._s2 - p.C @ d + (p.B @ d) * self._s2inv)
        out -= self._W * (np.einsum("ij,ij->j", self._W, d) / self._ess)
        return out

    def apply_raw(self, d):
        """The operator L without tangent projections."""
        p, Y, F = self.problem, self.Y, self.F_Y
        if self.operator_mode == "exact":
            Hd = self.gradient_jacobian(d)
            return Hd - Y @ (Hd.T @ Y) - d @ (F.T @ Y) - Y @ (F.T @ d)
        out = hessian_apply(p, self.factors, d)
        out -= Y @ _skew(F.T @ d)
        out -= _skew(d @ F.T) @ Y
        dM = d @ self._M
        out -= 0.5 * (dM - Y @ (Y.T @ dM))
        return out

    def apply_adjoint_raw(self, w):
        """Adjoint of ``apply_raw`` in the Frobenius inner product."""
        p, Y, F = self.problem, self.Y, self.F_Y
        if self.operator_mode == "exact":
            out = self.gradient_jacobian(w - Y @ (w.T @ Y))
            out -= w @ (Y.T @ F)
            out -= F @ (Y.T @ w)
            return out
        s2, s2inv = self._s2, self._s2inv
        out = (p.A @ w) * s2 - self._AY @ (w.T @ (Y * s2))
        out -= p.C @ w
        out += self._CY @ (w.T @ Y)
        out += (p.B @ w) * s2inv
        out -= self._BY @ (w.T @ (Y * s2inv))
        out -= 0.5 * (F @ (Y.T @ w) - F @ (w.T @ Y))
        out -= 0.5 * (w @ (Y.T @ F) - Y @ (w.T @ F))
        wMt = w @ self._M.T
        out -= 0.5 * (wMt - Y @ (Y.T @ wMt))
        return out

    def apply(self, d):
        """P L P applied to d."""
        return self.project(self.apply_raw(self.project(d)))

    def apply_adjoint(self, w):
        """P L' P applied to w."""
        return self.project(self.apply_adjoint_raw(self.project(w)))

    def residual_norm(self, d):
        """|| P L P d + G ||_F by direct application."""
        return frobenius_norm(self.apply(d) + self.G)


def measure_symmetry(eq):
    """Asymmetry surrogate of the projected operator on two fixed probes.

    Deterministic: probe directions come from a counter-based generator
    keyed only by the problem size.  Returns |<L d1, d2> - <d1, L d2>|
    normalized by the probe/operator magnitudes.
    """
    n, r = eq.Y.shape
    gen = np.random.Generator(np.random.Philox(key=900001 + 7919 * n + r))
    d1 = eq.project(gen.standard_normal((n, r)))
    d2 = eq.project(gen.standard_normal((n, r)))
    l1 = eq.apply(d1)
    l2 = eq.apply(d2)
    num = abs(float((l1 * d2).sum() - (d1 * l2).sum()))
    den = (
        frobenius_norm(l1) * frobenius_norm(d2)
        + frobenius_norm(d1) * frobenius_norm(l2)
        + 1e-300
    )
    return num / den


def _materialize_projected(eq):
    """Dense (n r) x (n r) matrix of the projected operator, F-ordered vec."""
    n, r = eq.Y.shape
    nr = n * r
    M = np.empty((nr, nr))
    e = np.zeros(nr)
    for k in range(nr):
        e[k] = 1.0
        M[:, k] = _vec(eq.apply(_unvec(e, n, r)))
        e[k] = 0.0
    return M


def _cg_family(matvec, rmatvec, b, tol_abs, max_iters, sym_ok):
    """CG when the operator looks symmetric, CGNR otherwise or as rescue."""
    if sym_ok:
        res = cg(matvec, b, tol_abs, max_iters)
        if res.converged:
            return res, "cg"
        rescue = cgnr(matvec, rmatvec, b, tol_abs, max_iters)
        rescue.iterations += res.iterations
        if rescue.converged or rescue.residual_norm < res.residual_norm:
            return rescue, "cg+cgnr"
        res.iterations = rescue.iterations
        return res, "cg"
    return cgnr(matvec, rmatvec, b, tol_abs, max_iters), "cgnr"


def solve_newton_equation(eq, config):
    """Solve the projected operator equation for one Newton step.

    Returns ``(delta, LinSolveInfo)``.  Raises ``NonconvergedLinearSolve``
    (carrying the best iterate) when the backend misses the residual
    target, and ``MaterializedSystemTooLarge`` when cg-l would need more
    than 4000 unknowns.
    """
    n, r = eq.Y.shape
    nr = n * r
    b = _vec(eq.rhs)
    bnorm = float(np.sqrt(b @ b))
    target = config.lin_tol * (1.0 + bnorm)
    max_iters = config.resolved_lin_max_iters(n, r)
    surrogate = None

    if config.backend is Backend.GMRES_O:

        def opvec(x):
            return _vec(eq.apply(_unvec(x, n, r)))

        res = gmres(opvec, b, target, max_iters, config.resolved_gmres_restart(n, r))
        method = "gmres"
    elif config.backend is Backend.CG_O:

        def opvec(x):
            return _vec(eq.apply(_unvec(x, n, r)))

        def opvec_adj(x):
            return _vec(eq.apply_adjoint(_unvec(x, n, r)))

        surrogate = measure_symmetry(eq)
        res, method = _cg_family(opvec, opvec_adj, b, target, max_iters, surrogate <= config.sym_tol)
    elif config.backend is Backend.CG_L:
        if nr > MATERIALIZE_LIMIT:
            raise MaterializedSystemTooLarge(
                f"n*r = {nr} exceeds the {MATERIALIZE_LIMIT} limit for the cg-l backend"
            )
        M = _materialize_projected(eq)
        sym_err = frobenius_norm(M - M.T)
        sym_ok = sym_err <= config.sym_tol * max(frobenius_norm(M), 1e-300)
        surrogate = sym_err / max(frobenius_norm(M), 1e-300)
        res, method = _cg_family(
            lambda x: M @ x, lambda x: M.T @ x, b, target, max_iters, sym_ok
        )
        method += "-l"
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown backend {config.backend}")

    delta = eq.project(_unvec(res.x, n, r))
    true_residual = eq.residual_norm(delta)
    info = LinSolveInfo(
        method=method,
        iterations=res.iterations,
        residual=true_residual,
        target=target,
        surrogate=surrogate,
    )
    if true_residual > target * 1.01:
        raise NonconvergedLinearSolve(delta, true_residual, res.iterations)
    return delta, info


def initial_Y(n, r, seed):
    """Deterministic random orthonormal start: Gaussian draw then QR.

    The draw comes from a Philox counter-based generator keyed by
    ``seed``, so a given seed always yields the same basis.
    """
    gen = np.random.Generator(np.random.Philox(key=seed))
    return compact_qr(gen.standard_normal((n, r))).Q


def geodesic_step(Y, delta):
    """Move from Y along the geodesic with initial velocity delta.

    With K = skew(Y'delta) and (Q, R) the compact QR of the normal
    component (I - YY') delta, the new point is Y M + Q N where (M; N)
    holds the first r columns of exp([[K, -R'], [R, 0]]).
    """
    n, r = Y.shape
    YtD = Y.T @ delta
    K = _skew(YtD)
    W = delta - Y @ YtD
    qr = compact_qr(W)
    block = np.zeros((2 * r, 2 * r))
    block[:r, :r] = K
    block[:r, r:] = -qr.R.T
    block[r:, :r] = qr.R
    E = matrix_exp(block)
    return Y @ E[:r, :r] + qr.Q @ E[r:, :r]


def _warm_start_Y(problem, r):
    """Spectral initializer from the linearized stationarity condition.

    Solves the Sylvester equation A X + X A = C for symmetric X via the
    spectral decomposition of A (denominators lambda_i + lambda_j, clipped
    away from zero), then returns the eigenvectors of the r algebraically
    largest eigenvalues of X.  When the data admit an exact rank-r fit the
    Sylvester solution IS the exact X, so the start is the answer.
    """
    dec = spectral_decomposition(problem.A)
    lam = dec.eigenvalues
    floor = 1e-12 * max(float(lam[0]), 1e-300)
    den = np.maximum(lam[:, None] + lam[None, :], floor)
    Ct = dec.U.T @ problem.C @ dec.U
    X0 = dec.U @ (Ct / den) @ dec.U.T
    xdec = spectral_decomposition(0.5 * (X0 + X0.T))
    return xdec.U[:, :r].copy()


def solve_rank_r(instance, r, config=None, Y0=None):
    """Fixed-rank solve: minimize E over n x r orthonormal Y and scales.

    ``instance`` may be a ProblemInstance or an already-reduced problem.
    ``Y0`` overrides the starting basis (otherwise a seeded random start,
    or the warm start when ``config.warm_start`` is set).  Deterministic
    for a given seed.
    """
    config = config or SolverConfig()
    problem = instance if isinstance(instance, ReducedProblem) else reduce_instance(instance)
    n = problem.n
    if not 1 <= r <= n:
        raise ValueError(f"rank must be in [1, {n}], got {r}")
    if config.backend is Backend.CG_L and n * r > MATERIALIZE_LIMIT:
        raise MaterializedSystemTooLarge(
            f"n*r = {n * r} exceeds the {MATERIALIZE_LIMIT} limit for the cg-l backend"
        )
    t0 = time.perf_counter()
    if Y0 is not None:
        Y = np.array(Y0, dtype=float)
        if Y.shape != (n, r):
            raise ValueError(f"Y0 must have shape {(n, r)}, got {Y.shape}")
    elif config.warm_start:
        Y = _warm_start_Y(problem, r)
    else:
        Y = initial_Y(n, r, config.seed)

    eye_r = np.eye(r)
    step_norms = []
    lin_iters = []
    iterates = [Y.copy()] if config.keep_iterates else None
    fallbacks = 0
    reorth = 0
    surrogate = None
    converged = False
    iters_done = 0
    trace_fh = open(config.trace_path, "w", encoding="utf-8") if config.trace_path else None
    if trace_fh:
        trace_fh.write("iter,E,grad_norm,orth_residual,backend_iters\n")

    def merit(Ycand):
        s_c = optimal_scales(problem, Ycand, clamp=True)
        return objective_value(problem, FactorPair(Ycand, s_c))

    try:
        for it in range(1, config.max_newton_iters + 1):
            iters_done = it
            s = optimal_scales(problem, Y, clamp=True)
            factors = FactorPair(Y, s)
            E_curr = objective_value(problem, factors)
            if not np.isfinite(E_curr):
                raise NonFiniteObjectiveError(
                    f"objective is {E_curr} at iteration {it} (rank {r})"
                )
            eq = NewtonStepEquation(
                problem, factors, config.operator_mode, config.last_term_mode
            )
            grad_norm = frobenius_norm(eq.G)

            delta = None
            inner_iters = 0
            try:
                delta, info = solve_newton_equation(eq, config)
                inner_iters = info.iterations
                if info.surrogate is not None:
                    surrogate = info.surrogate
            except NonconvergedLinearSolve as exc:
                inner_iters = exc.iterations
            lin_iters.append(inner_iters)

            Y_new = None
            if delta is not None:
                cand = geodesic_step(Y, delta)
                if merit(cand) <= E_curr + 1e-12 * (1.0 + abs(E_curr)):
                    Y_new = cand
                else:
                    # Damped Newton: halve along the Newton direction and
                    # take the longest step that strictly decreases E.
                    t = 0.5
                    for _ in range(16):
                        cand = geodesic_step(Y, t * delta)
                        if merit(cand) < E_curr:
                            Y_new = cand
                            break
                        t *= 0.5
            if Y_new is None:
                # Damped gradient fallback: halve until the merit drops.
                fallbacks += 1
                alpha = 1.0
                cand = Y
                for _ in range(31):
                    cand = geodesic_step(Y, -alpha * eq.G)
                    if merit(cand) < E_curr:
                        break
                    alpha *= 0.5
                Y_new = cand

            step = frobenius_norm(Y_new - Y)
            step_norms.append(step)
            y_norm = frobenius_norm(Y)
            Y = Y_new
            orth = frobenius_norm(Y.T @ Y - eye_r)
            if orth > config.orth_tol:
                Y = compact_qr(Y).Q
                reorth += 1
            if iterates is not None:
                iterates.append(Y.copy())
            if trace_fh:
                trace_fh.write(
                    f"{it},{E_curr:.17g},{grad_norm:.17g},{orth:.17g},{inner_iters}\n"
                )
            if step <= config.eps * y_norm + config.delta:
                converged = True
                break
    finally:
        if trace_fh:
            trace_fh.close()

    s = optimal_scales(problem, Y, clamp=True)
    factors = FactorPair(Y, s)
    E_final = objective_value(problem, factors)
    if not np.isfinite(E_final):
        raise NonFiniteObjectiveError(f"final objective is {E_final} (rank {r})")
    return RankRSolution(
        factors=factors,
        X=factors.x_matrix(),
        E=E_final,
        orth_residual=factors.orth_residual(),
        newton_iters=iters_done,
        converged=converged,
        backend_used=config.backend.value,
        step_norms=step_norms,
        lin_iters=lin_iters,
        fallback_steps=fallbacks,
        reorth_count=reorth,
        symmetry_surrogate=surrogate,
        iterates=iterates,
        elapsed_seconds=time.perf_counter() - t0,
    )
