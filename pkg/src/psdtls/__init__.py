"""Positive semi-definite total least squares.

Fits D @ X ~ T over symmetric positive semi-definite X of a chosen rank,
measuring error in both the data matrix and the target.  The fixed-rank
core is a Newton iteration on the Stiefel manifold with three Krylov
backends; rank one also has a direct quadratic-eigenvalue solver.  On top
of that sit a full rank sweep, a minimal-rank search, a correlation-matrix
approximation form, and a reproducible benchmark harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bench import (
    BenchmarkRecord,
    GeneratorSpec,
    ProfileCurve,
    dolan_more_profile,
    generate_instance,
    read_records,
    run_suite,
    write_profile,
    write_records,
)
from .drivers import (
    CorrelationResult,
    MinRankResult,
    PsdtlsSolution,
    build_correlation_instance,
    solve_correlation,
    solve_min_rank,
    solve_psdtls,
)
from .errors import (
    AllRanksFailed,
    AsymmetricMatrixError,
    DegenerateColumnError,
    MaterializedSystemTooLarge,
    MatrixFormatError,
    NoRealCandidateError,
    NonconvergedLinearSolve,
    NonFiniteObjectiveError,
    PsdtlsError,
    SingularAError,
    SingularMatrixError,
    SingularScaleError,
)
from .linalg import (
    compact_qr,
    frobenius_norm,
    matrix_exp,
    pseudo_inverse_from_factors,
    read_matrix,
    spectral_decomposition,
    write_matrix,
)
from .newton import (
    Backend,
    NewtonStepEquation,
    RankRSolution,
    SolverConfig,
    geodesic_step,
    initial_Y,
    solve_newton_equation,
    solve_rank_r,
)
from .objective import (
    ErrorPair,
    FactorPair,
    ProblemInstance,
    ReducedProblem,
    error_pair,
    gradient_Y,
    hessian_apply,
    objective_value,
    optimal_scales,
    reduce_instance,
)
from .qep import QepCandidate, rank1_candidates, solve_rank1_qep

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # objective
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
    # linalg
    "frobenius_norm",
    "spectral_decomposition",
    "compact_qr",
    "matrix_exp",
    "pseudo_inverse_from_factors",
    "read_matrix",
    "write_matrix",
    # newton
    "Backend",
    "SolverConfig",
    "RankRSolution",
    "NewtonStepEquation",
    "initial_Y",
    "geodesic_step",
    "solve_newton_equation",
    "solve_rank_r",
    # qep
    "QepCandidate",
    "rank1_candidates",
    "solve_rank1_qep",
    # drivers
    "PsdtlsSolution",
    "MinRankResult",
    "CorrelationResult",
    "solve_psdtls",
    "solve_min_rank",
    "solve_correlation",
    "build_correlation_instance",
    # bench
    "GeneratorSpec",
    "BenchmarkRecord",
    "ProfileCurve",
    "generate_instance",
    "run_suite",
    "write_records",
    "read_records",
    "dolan_more_profile",
    "write_profile",
    # errors
    "PsdtlsError",
    "MatrixFormatError",
    "AsymmetricMatrixError",
    "SingularMatrixError",
    "SingularScaleError",
    "DegenerateColumnError",
    "NonFiniteObjectiveError",
    "NonconvergedLinearSolve",
    "MaterializedSystemTooLarge",
    "NoRealCandidateError",
    "SingularAError",
    "AllRanksFailed",
]
