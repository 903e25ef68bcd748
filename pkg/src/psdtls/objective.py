"""Reduced objective for symmetric PSD total least squares.

The fit D @ X ~ T with X = Y diag(s^2) Y' is scored by
E = trace(dT' dD) where dT = D X - T and dD = (D - T pinv(X)) Y Y'.
With A = D'D, B = T'T and C = D'T + T'D that trace collapses to

    E = trace(Y'AY S^2) - trace(Y'CY) + trace(Y'BY S^-2),

which only needs the n x n Gram matrices.  E is also a sum of squares,
sum_i ||(s_i D - T / s_i) y_i||^2, so it is nonnegative whenever Y has
orthonormal columns and the scales are positive.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnError
from .linalg import frobenius_norm, pseudo_inverse_from_factors, symmetrize

__all__ = [
    "ProblemInstance",
    "FactorPair",
    "ReducedProblem",
    "ErrorPair",
    "reduce_instance",
    "objective_value",
    "gradient_Y",
    "hessian_apply",
    "optimal_scales",
    "error_pair",
]


@dataclass(frozen=True)
class ProblemInstance:
    """Data matrix D and target matrix T, both m x n with m >= n."""

    D: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        T = np.asarray(self.T, dtype=float)
        if D.ndim != 2 or T.ndim != 2:
            raise ValueError("D and T must be matrices")
        if D.shape != T.shape:
            raise ValueError(f"D and T must share a shape, got {D.shape} vs {T.shape}")
        if D.shape[0] < D.shape[1]:
            raise ValueError(f"need m >= n, got shape {D.shape}")
        if not (np.isfinite(D).all() and np.isfinite(T).all()):
            raise ValueError("D and T must be finite")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "T", T)

    @property
    def m(self):
        return self.D.shape[0]

    @property
    def n(self):
        return self.D.shape[1]


@dataclass(frozen=True)
class FactorPair:
    """Orthonormal basis Y (n x r) and positive scales s (length r).

    Represents X = Y diag(s^2) Y'.  Construction checks shapes, finiteness
    and positivity of the scales; orthonormality of Y is the caller's
    contract and can be inspected through ``orth_residual``.
    """

    Y: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float)
        s = np.asarray(self.s, dtype=float).reshape(-1)
        if Y.ndim != 2:
            raise ValueError("Y must be a matrix")
        if Y.shape[0] < Y.shape[1]:
            raise ValueError(f"need n >= r, got shape {Y.shape}")
        if s.shape[0] != Y.shape[1]:
            raise ValueError(f"scale count {s.shape[0]} does not match rank {Y.shape[1]}")
        if not np.isfinite(Y).all():
            raise ValueError("Y must be finite")
        if not np.isfinite(s).all() or np.any(s <= 0.0):
            raise ValueError("scales must be finite and positive")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "s", s)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def r(self):
        return self.Y.shape[1]

    def orth_residual(self):
        """Frobenius norm of Y'Y - I."""
        r = self.r
        return frobenius_norm(self.Y.T @ self.Y - np.eye(r))

    def x_matrix(self):
        """Assemble X = Y diag(s^2) Y' (symmetrized)."""
        return symmetrize((self.Y * self.s**2) @ self.Y.T)


@dataclass(frozen=True)
class ReducedProblem:
    """Gram matrices A = D'D, B = T'T, C = D'T + T'D (all symmetric n x n)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    m: int
    n: int


@dataclass(frozen=True)
class ErrorPair:
    """Correction matrices: dT = D X - T and dD = (D - T pinv(X)) Y Y'."""

    delta_D: np.ndarray
    delta_T: np.ndarray


def reduce_instance(instance):
    """Collapse (D, T) to the Gram matrices the objective works on."""
    D, T = instance.D, instance.T
    A = symmetrize(D.T @ D)
    B = symmetrize(T.T @ T)
    C = symmetrize(D.T @ T + T.T @ D)
    return ReducedProblem(A=A, B=B, C=C, m=instance.m, n=instance.n)


def _column_forms(M, Y):
    """Columnwise quadratic forms y_i' M y_i."""
    return np.einsum("ij,ij->j", Y, M @ Y)


def objective_value(problem, factors):
    """E(Y, s) from the reduced form."""
    Y, s = factors.Y, factors.s
    a = _column_forms(problem.A, Y)
    b = _column_forms(problem.B, Y)
    c = _column_forms(problem.C, Y)
    return float((a * s**2 - c + b * s**-2).sum())


def gradient_Y(problem, factors):
    """Euclidean gradient of E with respect to Y at fixed scales.

    F_Y = 2 (A Y S^2 - C Y + B Y S^-2), an n x r matrix.
    """
    Y, s = factors.Y, factors.s
    s2 = s**2
    return 2.0 * ((problem.A @ Y) * s2 - problem.C @ Y + (problem.B @ Y) * s2**-1)


def hessian_apply(problem, factors, delta):
    """Curvature form used by the fixed-scale Newton operator.

    F_YY(delta) = A d S^2 - Y S^2 d'A Y - C d + Y d'C Y + B d S^-2
                  - Y S^-2 d'B Y.

    Note this is not the plain second derivative of E in Y (which, at
    fixed scales, would be d -> 2 (A d S^2 - C d + B d S^-2) because E is
    quadratic in Y); the transposed-and-projected terms fold first-order
    information back in, and the fixed-scale operator composition in
    ``psdtls.newton`` is built around exactly this form.
    """
    Y, s = factors.Y, factors.s
    A, B, C = problem.A, problem.B, problem.C
    s2 = s**2
    s2inv = s2**-1
    AY, BY, CY = A @ Y, B @ Y, C @ Y
    out = (A @ delta) * s2 - Y @ (s2[:, None] * (delta.T @ AY))
    out -= C @ delta
    out += Y @ (delta.T @ CY)
    out += (B @ delta) * s2inv
    out -= Y @ (s2inv[:, None] * (delta.T @ BY))
    return out


def optimal_scales(problem, Y, clamp=False, floor=1e-13):
    """Columnwise optimal scales s_i = (y_i'B y_i / y_i'A y_i)^(1/4).

    Each column of E separates as a_i s^2 + b_i / s^2 with minimum
    2 sqrt(a_i b_i) at the quartic-root ratio.  ``clamp`` keeps the ratio
    inside [1e-8, 1e8] for use inside iterations; without it a vanishing
    a_i raises ``DegenerateColumnError``.  b_i is floored at ``floor``.
    """
    Y = np.asarray(Y, dtype=float)
    a = _column_forms(problem.A, Y)
    b = np.maximum(_column_forms(problem.B, Y), floor)
    if clamp:
        ratio = np.clip(b / np.maximum(a, 1e-300), 1e-8, 1e8)
    else:
        thresh = floor * frobenius_norm(problem.A)
        bad = np.nonzero(a <= thresh)[0]
        if bad.size:
            raise DegenerateColumnError(
                f"column {int(bad[0])}: y'Ay = {a[bad[0]]:.3e} is below {thresh:.3e}"
            )
        ratio = b / a
    return ratio**0.25


def error_pair(instance, factors):
    """Correction matrices (dD, dT) for the fit D X ~ T.

    dT = D X - T;  dD = (D - T pinv(X)) Y Y'.  The objective equals
    trace(dT' dD); tests rely on that identity.
    """
    X = factors.x_matrix()
    Xdag = pseudo_inverse_from_factors(factors.Y, factors.s)
    delta_T = instance.D @ X - instance.T
    P = factors.Y @ factors.Y.T
    delta_D = (instance.D - instance.T @ Xdag) @ P
    return ErrorPair(delta_D=delta_D, delta_T=delta_T)
