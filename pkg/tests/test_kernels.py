"""Kernel-level tests with independent oracles.

The oracles avoid the kernels' own algorithms: eigenvalues are
cross-checked against LAPACK (numpy.linalg) and against a from-scratch
inertia-bisection count; the matrix exponential used by the geodesic is
checked in test_linalg against a plain Taylor series.  Both kernel
implementations (compiled and pure Python) are compared head to head on
identical inputs.
"""

import numpy as np
import pytest

from conftest import random_spd, rng_for
from psdtls._kernels import _py_impl

try:
    from psdtls._kernels import _cy_impl
except ImportError:  # pragma: no cover - compiled lane absent
    _cy_impl = None

IMPLS = [pytest.param(_py_impl, id="python")]
if _cy_impl is not None:
    IMPLS.append(pytest.param(_cy_impl, id="compiled"))


def inertia_below(A, sigma):
    """Number of eigenvalues of symmetric A strictly below sigma.

    Independent oracle: symmetric Gaussian elimination (LDL' without
    pivoting, with a tiny diagonal nudge at breakdowns) counts negative
    pivots of A - sigma I, which by Sylvester's law of inertia equals the
    eigenvalue count below sigma.
    """
    M = np.array(A, dtype=float) - sigma * np.eye(A.shape[0])
    n = M.shape[0]
    count = 0
    for k in range(n):
        piv = M[k, k]
        if piv == 0.0:
            piv = 1e-300
        if piv < 0.0:
            count += 1
        rest = M[k + 1:, k] / piv
        M[k + 1:, k + 1:] -= np.outer(rest, M[k + 1:, k])
    return count


def bisect_eigenvalue(A, index, lo, hi, iters=80):
    """The ``index``-th smallest eigenvalue by inertia bisection."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if inertia_below(A, mid) >= index + 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("impl", IMPLS)
class TestSymEigh:
    def test_hand_two_by_two(self, impl):
        w, U = impl.sym_eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(sorted(w), [1.0, 3.0], atol=1e-12)
        assert np.allclose(U.T @ U, np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
    def test_against_lapack(self, impl, n):
        A = random_spd(key=100 + n, n=n, shift=0.5)
        w, U = impl.sym_eigh(A)
        ref = np.sort(np.linalg.eigvalsh(A))
        assert np.allclose(np.sort(w), ref, rtol=1e-10, atol=1e-10 * max(1.0, abs(ref).max()))
        # Eigenpairs actually factor A.
        assert np.allclose((U * w) @ U.T, A, atol=1e-9 * max(1.0, abs(A).max()))
        assert np.allclose(U.T @ U, np.eye(n), atol=1e-10)

    def test_against_inertia_bisection(self, impl):
        A = random_spd(key=77, n=8, shift=0.1)
        w, _ = impl.sym_eigh(A)
        w = np.sort(w)
        bound = float(np.abs(A).sum(axis=1).max()) + 1.0
        for idx in (0, 3, 7):
            ref = bisect_eigenvalue(A, idx, -bound, bound)
            assert abs(w[idx] - ref) <= 1e-8 * bound

    def test_repeated_eigenvalues(self, impl):
        # lambda = 1 (multiplicity 2) and 4.
        Q, _ = np.linalg.qr(rng_for(5).standard_normal((3, 3)))
        A = Q @ np.diag([1.0, 1.0, 4.0]) @ Q.T
        w, U = impl.sym_eigh(0.5 * (A + A.T))
        assert np.allclose(np.sort(w), [1.0, 1.0, 4.0], atol=1e-10)
        assert np.allclose(U.T @ U, np.eye(3), atol=1e-10)

    def test_diagonal_input(self, impl):
        A = np.diag([3.0, -1.0, 2.0])
        w, U = impl.sym_eigh(A)
        assert np.allclose(np.sort(w), [-1.0, 2.0, 3.0], atol=1e-13)
        # Eigenvectors of a diagonal matrix are signed unit basis vectors.
        assert np.allclose(np.abs(U).max(axis=0), 1.0, atol=1e-12)
        assert np.allclose((U * w) @ U.T, A, atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
class TestCompactQR:
    @pytest.mark.parametrize("shape", [(1, 1), (4, 2), (7, 7), (30, 6)])
    def test_factorization_properties(self, impl, shape):
        M = rng_for(200 + shape[0]).standard_normal(shape)
        Q, R = impl.compact_qr(M)
        n, r = shape
        assert Q.shape == (n, r) and R.shape == (r, r)
        assert np.allclose(Q @ R, M, atol=1e-12 * max(1.0, abs(M).max()))
        assert np.allclose(Q.T @ Q, np.eye(r), atol=1e-12)
        assert np.allclose(R, np.triu(R), atol=0.0)
        assert (np.diag(R) >= 0.0).all()

    def test_matches_lapack_up_to_sign(self, impl):
        M = rng_for(9).standard_normal((10, 4))
        Q, R = impl.compact_qr(M)
        Qr, Rr = np.linalg.qr(M)
        flip = np.sign(np.diag(Rr))
        flip[flip == 0.0] = 1.0
        assert np.allclose(R, flip[:, None] * Rr, atol=1e-10)
        assert np.allclose(Q, Qr * flip, atol=1e-10)

    def test_rank_deficient_column(self, impl):
        M = np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
        Q, R = impl.compact_qr(M)
        assert np.allclose(Q @ R, M, atol=1e-12)
        assert abs(R[1, 1]) <= 1e-12


@pytest.mark.parametrize("impl", IMPLS)
class TestLuSolve:
    def test_matches_lapack(self, impl):
        A = rng_for(31).standard_normal((9, 9)) + 9 * np.eye(9)
        B = rng_for(32).standard_normal((9, 3))
        X = impl.lu_solve(A, B)
        assert np.allclose(X, np.linalg.solve(A, B), atol=1e-10)

    def test_needs_pivoting(self, impl):
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        b = np.array([[2.0], [3.0]])
        assert np.allclose(impl.lu_solve(A, b), [[3.0], [2.0]], atol=1e-14)

    def test_singular_raises(self, impl):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(ValueError, match="singular"):
            impl.lu_solve(A, np.eye(2))


@pytest.mark.skipif(_cy_impl is None, reason="compiled kernels not built")
class TestBackendEquivalence:
    """The two implementations are twins: same results on the same input."""

    def test_eigh_agree(self):
        A = random_spd(key=404, n=14, shift=0.3)
        wp, Up = _py_impl.sym_eigh(A)
        wc, Uc = _cy_impl.sym_eigh(A)
        assert np.allclose(np.sort(wp), np.sort(wc), rtol=1e-12, atol=1e-12)
        assert np.allclose((Up * wp) @ Up.T, (Uc * wc) @ Uc.T, atol=1e-10)

    def test_qr_agree(self):
        M = rng_for(405).standard_normal((12, 5))
        Qp, Rp = _py_impl.compact_qr(M)
        Qc, Rc = _cy_impl.compact_qr(M)
        assert np.allclose(Qp, Qc, atol=1e-12)
        assert np.allclose(Rp, Rc, atol=1e-12)

    def test_lu_agree(self):
        A = rng_for(406).standard_normal((8, 8)) + 8 * np.eye(8)
        B = rng_for(407).standard_normal((8, 2))
        assert np.allclose(_py_impl.lu_solve(A, B), _cy_impl.lu_solve(A, B), atol=1e-12)

    def test_backend_report(self):
        assert _py_impl.BACKEND == "python"
        assert _cy_impl.BACKEND == "compiled"
