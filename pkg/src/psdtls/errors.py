"""Exception types raised across the package."""


class PsdtlsError(Exception):
    """Base class for every error raised by this package."""


class MatrixFormatError(PsdtlsError):
    """Malformed matrix text file.

    Carries the offending path and 1-based line number so CLI users can
    locate the problem.
    """

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class AsymmetricMatrixError(PsdtlsError):
    """Input expected to be symmetric is not, beyond tolerance."""


class SingularMatrixError(PsdtlsError):
    """Dense linear solve hit a zero pivot."""


class SingularScaleError(PsdtlsError):
    """A scale entry is too close to zero for the inverse-square weights."""


class DegenerateColumnError(PsdtlsError):
    """A column quadratic form y_i' A y_i vanished; optimal scale undefined."""


class NonFiniteObjectiveError(PsdtlsError):
    """Objective evaluated to NaN or infinity during iteration."""


class NonconvergedLinearSolve(PsdtlsError):
    """Inner Krylov solve missed its residual target.

    Keeps the best iterate so the outer loop can decide what to salvage.
    """

    def __init__(self, best_delta, residual, iterations, message=None):
        self.best_delta = best_delta
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            message
            or f"linear solve stalled at residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class MaterializedSystemTooLarge(PsdtlsError):
    """Refused to build the dense n*r x n*r system for the cg-l backend."""


class SingularAError(PsdtlsError):
    """Gram matrix D'D is numerically singular; the rank-1 reduction needs its inverse."""


class NoRealCandidateError(PsdtlsError):
    """The rank-1 eigenvalue sweep produced no admissible real candidate."""


class AllRanksFailed(PsdtlsError):
    """No target rank produced a usable solution during a sweep."""

    def __init__(self, failures):
        self.failures = dict(failures)
        detail = "; ".join(f"r={r}: {msg}" for r, msg in sorted(self.failures.items()))
        super().__init__(f"every rank failed ({detail})")
