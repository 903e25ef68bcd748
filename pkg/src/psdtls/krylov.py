"""Matrix-free Krylov solvers on flat vectors.

All three routines solve ``op(x) = b`` to an absolute residual target and
report the best iterate even when they fail, so callers can salvage or
retry.  ``cg`` assumes a symmetric positive definite operator and flags a
breakdown when it meets a direction of nonpositive curvature; ``cgnr``
runs conjugate gradients on the normal equations and only needs the
adjoint; ``gmres`` is restarted with modified Gram-Schmidt and Givens
rotations.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["KrylovResult", "cg", "cgnr", "gmres"]


@dataclass
class KrylovResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool
    breakdown: bool = False


def cg(op, b, tol_abs, max_iters):
    """Conjugate gradients for a symmetric positive definite operator."""
    x = np.zeros_like(b)
    r = b.copy()
    rs = float(r @ r)
    if np.sqrt(rs) <= tol_abs:
        return KrylovResult(x, 0, np.sqrt(rs), True)
    p = r.copy()
    for k in range(1, max_iters + 1):
        Ap = op(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0 or not np.isfinite(pAp):
            # Nonpositive curvature: the operator is not PD on this space.
            return KrylovResult(x, k, np.sqrt(rs), False, breakdown=True)
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= tol_abs:
            return KrylovResult(x, k, np.sqrt(rs_new), True)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return KrylovResult(x, max_iters, np.sqrt(rs), False)


def cgnr(op, op_adjoint, b, tol_abs, max_iters):
    """Conjugate gradients on the normal equations (CGLS recurrences).

    Tracks the true residual b - op(x), so the convergence test matches
    the original system even though iteration happens on op'op.
    """
    x = np.zeros_like(b)
    r = b.copy()
    rnorm = float(np.sqrt(r @ r))
    if rnorm <= tol_abs:
        return KrylovResult(x, 0, rnorm, True)
    s = op_adjoint(r)
    p = s.copy()
    gamma = float(s @ s)
    for k in range(1, max_iters + 1):
        q = op(p)
        qq = float(q @ q)
        if qq == 0.0 or not np.isfinite(qq):
            return KrylovResult(x, k, rnorm, False, breakdown=True)
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        rnorm = float(np.sqrt(r @ r))
        if rnorm <= tol_abs:
            return KrylovResult(x, k, rnorm, True)
        s = op_adjoint(r)
        gamma_new = float(s @ s)
        if gamma_new == 0.0:
            # Normal residual vanished with the true residual still large:
            # the system is inconsistent for this right-hand side.
            return KrylovResult(x, k, rnorm, False, breakdown=True)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return KrylovResult(x, max_iters, rnorm, False)


def gmres(op, b, tol_abs, max_iters, restart):
    """Restarted GMRES with twice-applied modified Gram-Schmidt."""
    n = b.shape[0]
    restart = max(1, min(restart, n, max_iters))
    x = np.zeros_like(b)
    total = 0
    rnorm = float(np.sqrt(b @ b))
    if rnorm <= tol_abs:
        return KrylovResult(x, 0, rnorm, True)
    r = b.copy()
    while total < max_iters:
        beta = float(np.sqrt(r @ r))
        if beta <= tol_abs:
            return KrylovResult(x, total, beta, True)
        V = np.empty((restart + 1, n))
        V[0] = r / beta
        H = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        g[0] = beta
        j = 0
        res = beta
        while j < restart and total < max_iters:
            w = op(V[j])
            for _pass in range(2):
                for i in range(j + 1):
                    h = float(V[i] @ w)
                    H[i, j] += h
                    w -= h * V[i]
            hj1 = float(np.sqrt(w @ w))
            H[j + 1, j] = hj1
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = float(np.hypot(H[j, j], H[j + 1, j]))
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            res = abs(g[j + 1])
            total += 1
            j += 1
            if res <= tol_abs or hj1 == 0.0:
                break
            V[j] = w / hj1
        # Back-substitution on the triangularized least-squares system.
        y = np.zeros(j)
        for i in range(j - 1, -1, -1):
            t = g[i] - H[i, i + 1:j] @ y[i + 1:j]
            if H[i, i] == 0.0:
                y[i] = 0.0
            else:
                y[i] = t / H[i, i]
        x = x + V[:j].T @ y
        r = b - op(x)
        rnorm = float(np.sqrt(r @ r))
        if rnorm <= tol_abs:
            return KrylovResult(x, total, rnorm, True)
    return KrylovResult(x, total, rnorm, rnorm <= tol_abs)
