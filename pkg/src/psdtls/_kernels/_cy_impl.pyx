# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the dense kernels.

Same algorithms and operation order as psdtls._kernels._py_impl, written
with explicit loops so the hot rotations and reflections run at C speed.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "compiled"


def sym_eigh(A_in):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with A == V @ diag(w) @ V.T and w sorted in
    non-increasing order.
    """
    A_arr = np.array(A_in, dtype=np.float64)
    cdef double[:, :] A = A_arr
    cdef Py_ssize_t n = A_arr.shape[0]
    V_arr = np.eye(n)
    cdef double[:, :] V = V_arr
    if n == 1:
        return A_arr[0, :1].copy(), V_arr

    cdef double norm = 0.0, off2, apq, app, aqq, tau, t, c, s, xp, xq
    cdef Py_ssize_t i, p, q, sweep
    for p in range(n):
        for q in range(n):
            norm += A[p, q] * A[p, q]
    norm = sqrt(norm)
    if norm == 0.0:
        return np.zeros(n), V_arr

    for sweep in range(60):
        off2 = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off2 += A[p, q] * A[p, q]
        if off2 <= (1e-14 * norm) * (1e-14 * norm):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if fabs(apq) <= 1e-18 * norm:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    xp = A[i, p]
                    xq = A[i, q]
                    A[i, p] = c * xp - s * xq
                    A[i, q] = s * xp + c * xq
                for i in range(n):
                    xp = A[p, i]
                    xq = A[q, i]
                    A[p, i] = c * xp - s * xq
                    A[q, i] = s * xp + c * xq
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(n):
                    xp = V[i, p]
                    xq = V[i, q]
                    V[i, p] = c * xp - s * xq
                    V[i, q] = s * xp + c * xq

    w = np.diagonal(A_arr).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V_arr[:, order]


def compact_qr(M_in):
    """Householder QR of an n x r matrix, n >= r.

    Returns (Q, R) with orthonormal Q (n, r), upper-triangular R with
    nonnegative diagonal, and Q @ R == M.
    """
    W_arr = np.array(M_in, dtype=np.float64)
    cdef Py_ssize_t n = W_arr.shape[0]
    cdef Py_ssize_t r = W_arr.shape[1]
    if n < r:
        raise ValueError(f"need n >= r, got shape {W_arr.shape}")
    cdef double[:, :] W = W_arr
    V_arr = np.zeros((r, n))  # row k holds reflector k (entries k..n-1 used)
    cdef double[:, :] Vs = V_arr
    used_arr = np.zeros(r, dtype=np.int8)
    cdef signed char[:] used = used_arr
    cdef double alpha, vnorm, dot
    cdef Py_ssize_t i, j, k

    for k in range(r):
        alpha = 0.0
        for i in range(k, n):
            alpha += W[i, k] * W[i, k]
        alpha = sqrt(alpha)
        if alpha == 0.0:
            continue
        if W[k, k] > 0.0:
            alpha = -alpha
        vnorm = 0.0
        for i in range(k, n):
            Vs[k, i] = W[i, k]
        Vs[k, k] -= alpha
        for i in range(k, n):
            vnorm += Vs[k, i] * Vs[k, i]
        vnorm = sqrt(vnorm)
        for i in range(k, n):
            Vs[k, i] /= vnorm
        for j in range(k, r):
            dot = 0.0
            for i in range(k, n):
                dot += Vs[k, i] * W[i, j]
            dot *= 2.0
            for i in range(k, n):
                W[i, j] -= dot * Vs[k, i]
        W[k, k] = alpha
        for i in range(k + 1, n):
            W[i, k] = 0.0
        used[k] = 1

    R = np.triu(W_arr[:r, :])
    Q_arr = np.zeros((n, r))
    cdef double[:, :] Q = Q_arr
    for i in range(r):
        Q[i, i] = 1.0
    for k in range(r - 1, -1, -1):
        if not used[k]:
            continue
        for j in range(r):
            dot = 0.0
            for i in range(k, n):
                dot += Vs[k, i] * Q[i, j]
            dot *= 2.0
            for i in range(k, n):
                Q[i, j] -= dot * Vs[k, i]
    for i in range(r):
        if R[i, i] < 0.0:
            R[i, i:] = -R[i, i:]
            Q_arr[:, i] = -Q_arr[:, i]
    return Q_arr, R


def lu_solve(A_in, B_in):
    """Solve A @ X = B by LU factorization with partial pivoting.

    B may be a vector or a matrix of right-hand sides.  Raises ValueError
    on an exactly zero pivot.
    """
    A_arr = np.array(A_in, dtype=np.float64)
    B_np = np.asarray(B_in, dtype=np.float64)
    squeeze = B_np.ndim == 1
    X_arr = B_np.reshape(-1, 1).astype(np.float64) if squeeze else np.array(B_np, dtype=np.float64)
    cdef Py_ssize_t n = A_arr.shape[0]
    if A_arr.shape[1] != n or X_arr.shape[0] != n:
        raise ValueError("incompatible shapes for lu_solve")
    cdef Py_ssize_t nrhs = X_arr.shape[1]
    cdef double[:, :] A = A_arr
    cdef double[:, :] X = X_arr
    cdef Py_ssize_t i, j, k, piv
    cdef double best, tmp, mult

    for k in range(n):
        piv = k
        best = fabs(A[k, k])
        for i in range(k + 1, n):
            if fabs(A[i, k]) > best:
                best = fabs(A[i, k])
                piv = i
        if A[piv, k] == 0.0:
            raise ValueError("singular matrix")
        if piv != k:
            for j in range(n):
                tmp = A[k, j]
                A[k, j] = A[piv, j]
                A[piv, j] = tmp
            for j in range(nrhs):
                tmp = X[k, j]
                X[k, j] = X[piv, j]
                X[piv, j] = tmp
        for i in range(k + 1, n):
            mult = A[i, k] / A[k, k]
            A[i, k] = mult
            for j in range(k + 1, n):
                A[i, j] -= mult * A[k, j]
            for j in range(nrhs):
                X[i, j] -= mult * X[k, j]
    for k in range(n - 1, -1, -1):
        for j in range(nrhs):
            tmp = X[k, j]
            for i in range(k + 1, n):
                tmp -= A[k, i] * X[i, j]
            X[k, j] = tmp / A[k, k]
    return X_arr[:, 0] if squeeze else X_arr
