"""Dense linear algebra used throughout the package.

Decompositions run on self-contained kernels (see ``psdtls._kernels``);
nothing here calls an external LAPACK wrapper.  The module also owns the
whitespace matrix text format shared by the CLI tools.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND as KERNEL_BACKEND
from ._kernels import compact_qr as _kernel_qr
from ._kernels import lu_solve as _kernel_lu
from ._kernels import sym_eigh as _kernel_eigh
from .errors import AsymmetricMatrixError, MatrixFormatError, SingularMatrixError, SingularScaleError

__all__ = [
    "KERNEL_BACKEND",
    "SpectralDecomposition",
    "CompactQR",
    "frobenius_norm",
    "symmetrize",
    "spectral_decomposition",
    "compact_qr",
    "solve_dense",
    "matrix_exp",
    "pseudo_inverse_from_factors",
    "numerical_rank",
    "read_matrix",
    "write_matrix",
]


def frobenius_norm(M):
    """Frobenius norm of an array of any shape."""
    M = np.asarray(M, dtype=float)
    return float(np.sqrt((M * M).sum()))


def symmetrize(M):
    """Average a square matrix with its transpose."""
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigenvectors U and eigenvalues w (non-increasing)."""

    U: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self):
        return (self.U * self.eigenvalues) @ self.U.T


@dataclass(frozen=True)
class CompactQR:
    """Q with orthonormal columns, R upper-triangular with diag(R) >= 0."""

    Q: np.ndarray
    R: np.ndarray


def spectral_decomposition(A, sym_tol=1e-10):
    """Full eigendecomposition of a symmetric matrix.

    The input is checked for symmetry (relative Frobenius tolerance
    ``sym_tol``) and symmetrized before factorization, so the result is
    exactly the decomposition of (A + A.T)/2.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = frobenius_norm(A)
    if scale > 0.0 and frobenius_norm(A - A.T) > sym_tol * scale:
        raise AsymmetricMatrixError(
            f"matrix is not symmetric within {sym_tol:g} relative tolerance"
        )
    w, U = _kernel_eigh(symmetrize(A))
    return SpectralDecomposition(U=U, eigenvalues=w)


def compact_qr(M):
    """Compact QR factorization of an n x r matrix with n >= r."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim {M.ndim}")
    Q, R = _kernel_qr(M)
    return CompactQR(Q=Q, R=R)


def solve_dense(A, B):
    """Solve A @ X = B for square A via LU with partial pivoting."""
    try:
        return _kernel_lu(A, B)
    except ValueError as exc:
        if "singular" in str(exc):
            raise SingularMatrixError(str(exc)) from exc
        raise


# [6/6] Pade numerator coefficients for exp; the denominator uses the same
# coefficients with alternating signs.
_PADE6 = (
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
)


def matrix_exp(W):
    """Matrix exponential by scaling-and-squaring with a [6/6] Pade core.

    The input is scaled by a power of two until its infinity norm is at
    most 1/4, the rational approximant is evaluated, and the result is
    repeatedly squared.  For skew-symmetric input the output is orthogonal
    to rounding because the approximant satisfies r(-W) == r(W)^-1.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {W.shape}")
    n = W.shape[0]
    if not np.isfinite(W).all():
        raise ValueError("matrix_exp requires finite entries")
    norm = float(np.abs(W).sum(axis=1).max()) if n else 0.0
    squarings = 0
    if norm > 0.25:
        squarings = int(np.ceil(np.log2(norm / 0.25)))
    A = W / (2.0**squarings)
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    even = _PADE6[0] * I + _PADE6[2] * A2 + _PADE6[4] * A4 + _PADE6[6] * A6
    odd = A @ (_PADE6[1] * I + _PADE6[3] * A2 + _PADE6[5] * A4)
    E = solve_dense(even - odd, even + odd)
    for _ in range(squarings):
        E = E @ E
    return E


def pseudo_inverse_from_factors(Y, s, scale_floor=1e-13):
    """Moore-Penrose inverse of X = Y diag(s^2) Y' given its factors.

    Requires orthonormal Y and scales bounded away from zero; a scale below
    ``scale_floor`` makes the inverse-square weights meaningless.
    """
    Y = np.asarray(Y, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) < scale_floor):
        raise SingularScaleError(
            f"scale entry below {scale_floor:g}; pseudo-inverse is ill-defined"
        )
    return symmetrize((Y * s**-2.0) @ Y.T)


def numerical_rank(eigenvalues, n):
    """Count eigenvalues above n * eps * max|eigenvalue|."""
    w = np.abs(np.asarray(eigenvalues, dtype=float))
    if w.size == 0:
        return 0
    top = w.max()
    if top == 0.0:
        return 0
    return int((w > n * np.finfo(float).eps * top).sum())


def read_matrix(path):
    """Read the whitespace matrix format.

    Line 1 holds ``rows cols``; each of the next ``rows`` lines holds
    exactly ``cols`` floats.  NaN and infinity are rejected.  Errors carry
    the path and 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError(path, 1, "empty file, expected 'rows cols' header")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(
            path, 1, f"header must be two integers 'rows cols', got {lines[0]!r}"
        )
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(
            path, 1, f"header must be two integers 'rows cols', got {lines[0]!r}"
        ) from None
    if rows < 0 or cols < 0:
        raise MatrixFormatError(path, 1, "dimensions must be nonnegative")
    if len(lines) < rows + 1:
        raise MatrixFormatError(
            path, len(lines) + 1, f"expected {rows} data rows, file ends after {len(lines) - 1}"
        )
    for offset, extra in enumerate(lines[rows + 1:]):
        if extra.strip():
            raise MatrixFormatError(
                path, rows + 2 + offset, "trailing non-blank line after data rows"
            )
    out = np.empty((rows, cols), dtype=float)
    for i in range(rows):
        line_no = i + 2
        parts = lines[i + 1].split()
        if len(parts) != cols:
            raise MatrixFormatError(
                path, line_no, f"expected {cols} entries, got {len(parts)}"
            )
        for j, tok in enumerate(parts):
            try:
                val = float(tok)
            except ValueError:
                raise MatrixFormatError(path, line_no, f"not a number: {tok!r}") from None
            if not np.isfinite(val):
                raise MatrixFormatError(path, line_no, f"non-finite entry: {tok!r}")
            out[i, j] = val
    return out


def write_matrix(path, M):
    """Write the whitespace matrix format with 17 significant digits.

    17 digits round-trip IEEE doubles exactly through ``read_matrix``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.isfinite(M).all():
        raise ValueError("refusing to write non-finite entries")
    rows, cols = M.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{rows} {cols}\n")
        for i in range(rows):
            fh.write(" ".join(f"{M[i, j]:.17g}" for j in range(cols)))
            fh.write("\n")
