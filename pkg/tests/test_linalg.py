"""Dense linear algebra wrappers and the text matrix format."""

import numpy as np
import pytest

from conftest import random_orthonormal, random_spd, rng_for
from psdtls.errors import (
    AsymmetricMatrixError,
    MatrixFormatError,
    SingularMatrixError,
    SingularScaleError,
)
from psdtls.linalg import (
    compact_qr,
    frobenius_norm,
    matrix_exp,
    numerical_rank,
    pseudo_inverse_from_factors,
    read_matrix,
    solve_dense,
    spectral_decomposition,
    symmetrize,
    write_matrix,
)


def taylor_expm(W, terms=40, theta=0.25):
    """Independent matrix-exponential oracle: scaled Taylor series.

    Scales W by a power of two until its 1-norm is below ``theta``, sums
    the series to ``terms`` factorial-decaying terms, and squares back.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    norm = float(np.abs(W).sum(axis=0).max()) if n else 0.0
    squarings = 0
    while norm > theta:
        norm /= 2.0
        squarings += 1
    A = W / (2.0**squarings)
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, terms + 1):
        term = term @ A / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


class TestBasics:
    def test_frobenius(self):
        assert frobenius_norm(np.array([[3.0, 4.0]])) == pytest.approx(5.0)
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_symmetrize(self):
        M = np.array([[1.0, 2.0], [0.0, 3.0]])
        S = symmetrize(M)
        assert np.array_equal(S, S.T)
        assert S[0, 1] == pytest.approx(1.0)


class TestSpectralDecomposition:
    def test_reconstruct(self):
        A = random_spd(key=11, n=7)
        dec = spectral_decomposition(A)
        assert np.allclose(dec.reconstruct(), A, atol=1e-9 * abs(A).max())
        # Non-increasing eigenvalue order.
        assert (np.diff(dec.eigenvalues) <= 1e-12).all()

    def test_rejects_asymmetric(self):
        with pytest.raises(AsymmetricMatrixError):
            spectral_decomposition(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            spectral_decomposition(np.ones((2, 3)))

    def test_symmetrizes_within_tolerance(self):
        A = random_spd(key=12, n=5)
        A[0, 1] += 1e-13
        dec = spectral_decomposition(A)
        assert np.allclose(dec.reconstruct(), symmetrize(A), atol=1e-9 * abs(A).max())


class TestCompactQRWrapper:
    def test_properties(self):
        M = rng_for(21).standard_normal((9, 4))
        qr = compact_qr(M)
        assert np.allclose(qr.Q @ qr.R, M, atol=1e-12)
        assert np.allclose(qr.Q.T @ qr.Q, np.eye(4), atol=1e-12)
        assert (np.diag(qr.R) >= 0).all()

    def test_rejects_vector(self):
        with pytest.raises(ValueError):
            compact_qr(np.ones(3))


class TestSolveDense:
    def test_solves(self):
        A = rng_for(31).standard_normal((6, 6)) + 6 * np.eye(6)
        B = rng_for(32).standard_normal((6, 2))
        assert np.allclose(solve_dense(A, B), np.linalg.solve(A, B), atol=1e-10)

    def test_singular_error_type(self):
        with pytest.raises(SingularMatrixError):
            solve_dense(np.zeros((3, 3)), np.eye(3))


class TestMatrixExp:
    def test_zero(self):
        assert np.array_equal(matrix_exp(np.zeros((4, 4))), np.eye(4))

    def test_rotation_by_hand(self):
        theta = 0.7
        W = np.array([[0.0, -theta], [theta, 0.0]])
        R = matrix_exp(W)
        expected = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        )
        assert np.allclose(R, expected, atol=1e-14)

    @pytest.mark.parametrize("scale", [0.1, 1.0, 10.0, 100.0])
    def test_against_taylor_oracle(self, scale):
        W = scale * rng_for(41).standard_normal((6, 6)) / 6.0
        E = matrix_exp(W)
        ref = taylor_expm(W)
        assert np.allclose(E, ref, rtol=1e-12, atol=1e-12 * abs(ref).max())

    def test_skew_gives_orthogonal(self):
        M = rng_for(42).standard_normal((8, 8))
        W = M - M.T
        Q = matrix_exp(W)
        assert frobenius_norm(Q.T @ Q - np.eye(8)) <= 1e-13 * 8

    def test_inverse_relation(self):
        W = rng_for(43).standard_normal((5, 5))
        assert np.allclose(matrix_exp(W) @ matrix_exp(-W), np.eye(5), atol=1e-11)

    def test_rejects_nonfinite(self):
        W = np.full((2, 2), np.nan)
        with pytest.raises(ValueError):
            matrix_exp(W)


class TestPseudoInverse:
    def test_moore_penrose_conditions(self):
        Y = random_orthonormal(key=51, n=6, r=2)
        s = np.array([1.3, 0.4])
        X = (Y * s**2) @ Y.T
        Xd = pseudo_inverse_from_factors(Y, s)
        assert np.allclose(X @ Xd @ X, X, atol=1e-12)
        assert np.allclose(Xd @ X @ Xd, Xd, atol=1e-12)
        assert np.allclose((X @ Xd).T, X @ Xd, atol=1e-12)
        assert np.allclose((Xd @ X).T, Xd @ X, atol=1e-12)

    def test_rejects_tiny_scale(self):
        Y = random_orthonormal(key=52, n=4, r=1)
        with pytest.raises(SingularScaleError):
            pseudo_inverse_from_factors(Y, np.array([1e-14]))


class TestNumericalRank:
    def test_counts(self):
        assert numerical_rank(np.array([3.0, 1.0, 0.0]), 3) == 2
        assert numerical_rank(np.array([1.0, 1e-20]), 2) == 1
        assert numerical_rank(np.array([]), 0) == 0
        assert numerical_rank(np.zeros(4), 4) == 0


class TestMatrixFormat:
    def test_round_trip_is_bit_exact(self, tmp_path):
        M = rng_for(61).standard_normal((5, 3)) * np.pi
        path = str(tmp_path / "m.txt")
        write_matrix(path, M)
        back = read_matrix(path)
        assert np.array_equal(back, M)

    def test_header_and_shape(self, tmp_path):
        path = str(tmp_path / "m.txt")
        write_matrix(path, np.eye(2))
        lines = open(path).read().splitlines()
        assert lines[0] == "2 2"
        assert len(lines) == 3

    @pytest.mark.parametrize(
        "content,line",
        [
            ("", 1),
            ("2\n1 2\n3 4\n", 1),
            ("a b\n", 1),
            ("2 2\n1 2\n", 3),
            ("2 2\n1 2 3\n4 5\n", 2),
            ("2 2\n1 x\n3 4\n", 2),
            ("2 2\n1 inf\n3 4\n", 2),
            ("1 1\n1\njunk\n", 3),
            ("-1 2\n", 1),
        ],
    )
    def test_malformed_reports_line(self, tmp_path, content, line):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(MatrixFormatError) as err:
            read_matrix(str(path))
        assert err.value.line_no == line
        assert str(path) in str(err.value)

    def test_trailing_blank_lines_ok(self, tmp_path):
        path = tmp_path / "ok.txt"
        path.write_text("1 2\n1.5 -2.5\n\n\n")
        assert np.array_equal(read_matrix(str(path)), [[1.5, -2.5]])

    def test_write_rejects_nonfinite(self, tmp_path):
        with pytest.raises(ValueError):
            write_matrix(str(tmp_path / "x.txt"), np.array([[np.inf]]))

    def test_write_promotes_vector(self, tmp_path):
        path = str(tmp_path / "v.txt")
        write_matrix(path, np.array([1.0, 2.0]))
        assert read_matrix(path).shape == (1, 2)
