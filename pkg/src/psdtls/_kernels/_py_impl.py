"""Pure-numpy implementations of the dense kernels.

Mirrors the compiled twin in ``psdtls._kernels._cy_impl``; used as the
fallback when the extension is unavailable or PSDTLS_PURE_PYTHON is set.
Both implementations apply the same elementary operations in the same
order, so results agree to rounding.
"""

import numpy as np

BACKEND = "python"


def sym_eigh(A):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``A == V @ diag(w) @ V.T`` and ``w`` sorted in
    non-increasing order.  The caller is responsible for symmetry; only the
    upper triangle drives the rotations but the full matrix is updated.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A[0, :1].copy(), V
    norm = np.sqrt((A * A).sum())
    if norm == 0.0:
        return np.zeros(n), V
    for _sweep in range(60):
        off2 = (A * A).sum() - (np.diag(A) ** 2).sum()
        if off2 <= (1e-14 * norm) ** 2:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * norm:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                # Exact forms for the rotated 2x2 block.
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def compact_qr(M):
    """Householder QR of an n x r matrix, n >= r.

    Returns ``(Q, R)`` with Q of shape (n, r) having orthonormal columns,
    R upper-triangular with nonnegative diagonal, and ``Q @ R == M``.
    A zero column yields a zero diagonal entry in R while Q stays
    orthonormal.
    """
    M = np.array(M, dtype=float)
    n, r = M.shape
    if n < r:
        raise ValueError(f"need n >= r, got shape {M.shape}")
    W = M
    vs = []
    for k in range(r):
        x = W[k:, k]
        alpha = np.sqrt((x * x).sum())
        if alpha == 0.0:
            vs.append(None)
            continue
        if x[0] > 0.0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        v /= np.sqrt((v * v).sum())
        W[k:, k:] -= np.outer(2.0 * v, v @ W[k:, k:])
        W[k, k] = alpha
        W[k + 1:, k] = 0.0
        vs.append(v)
    R = np.triu(W[:r, :])
    Q = np.zeros((n, r))
    for i in range(r):
        Q[i, i] = 1.0
    for k in range(r - 1, -1, -1):
        v = vs[k]
        if v is None:
            continue
        Q[k:, :] -= np.outer(2.0 * v, v @ Q[k:, :])
    for i in range(r):
        if R[i, i] < 0.0:
            R[i, i:] = -R[i, i:]
            Q[:, i] = -Q[:, i]
    return Q, R


def lu_solve(A, B):
    """Solve ``A @ X = B`` by LU factorization with partial pivoting.

    B may be a vector or a matrix of right-hand sides.  Raises
    ``ValueError`` on an exactly zero pivot.
    """
    A = np.array(A, dtype=float)
    B = np.asarray(B, dtype=float)
    squeeze = B.ndim == 1
    X = B.reshape(-1, 1).astype(float) if squeeze else np.array(B, dtype=float)
    n = A.shape[0]
    if A.shape[1] != n or X.shape[0] != n:
        raise ValueError("incompatible shapes for lu_solve")
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if A[piv, k] == 0.0:
            raise ValueError("singular matrix")
        if piv != k:
            A[[k, piv], :] = A[[piv, k], :]
            X[[k, piv], :] = X[[piv, k], :]
        A[k + 1:, k] /= A[k, k]
        if k + 1 < n:
            A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
            X[k + 1:, :] -= np.outer(A[k + 1:, k], X[k, :])
    for k in range(n - 1, -1, -1):
        if k + 1 < n:
            X[k, :] -= A[k, k + 1:] @ X[k + 1:, :]
        X[k, :] /= A[k, k]
    return X[:, 0] if squeeze else X
