"""End-to-end solvers built on the fixed-rank core.

``solve_psdtls`` sweeps every target rank and keeps the best converged
solution; ``solve_min_rank`` walks ranks upward until the objective drops
under a caller bound; ``solve_correlation`` assembles the stacked data
matrices of the correlation-approximation form and reports the entrywise
sample standard deviation of the target correction.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllRanksFailed, AsymmetricMatrixError, NoRealCandidateError, PsdtlsError, SingularAError
from .newton import RankRSolution, SolverConfig, solve_rank_r
from .objective import ProblemInstance, reduce_instance
from .qep import solve_rank1_qep

__all__ = [
    "PsdtlsSolution",
    "MinRankResult",
    "CorrelationResult",
    "solve_psdtls",
    "solve_min_rank",
    "solve_correlation",
    "build_correlation_instance",
]


@dataclass
class PsdtlsSolution:
    """Best solution across ranks 1..n plus the per-rank record.

    ``per_rank_E[r-1]`` holds the objective reached at rank r (+inf when
    that rank failed or was skipped by early exit); ``per_rank_status``
    holds the converged flags.
    """

    best: RankRSolution
    best_rank: int
    per_rank_E: list
    per_rank_status: list
    failures: dict


@dataclass
class MinRankResult:
    """Smallest rank whose converged objective fell below the bound.

    When no rank satisfies the bound, ``rank``/``solution`` hold the
    converged argmin and ``satisfied`` is False.
    """

    rank: int
    solution: RankRSolution
    satisfied: bool
    bound: float
    per_rank_E: dict


@dataclass
class CorrelationResult:
    """Sweep solution for the correlation form plus the Std statistic."""

    solution: PsdtlsSolution
    std: float


def _solve_one_rank(problem, r, config, use_qep_rank1):
    if r == 1 and use_qep_rank1:
        try:
            return solve_rank1_qep(problem, config)
        except (NoRealCandidateError, SingularAError):
            return solve_rank_r(problem, 1, config)
    return solve_rank_r(problem, r, config)


def solve_psdtls(instance, config=None, use_qep_rank1=True, early_exit_tol=None):
    """Sweep ranks 1..n and return the best converged solution.

    Rank 1 goes through the quadratic-eigenvalue route by default, with
    the Newton iteration as fallback.  Ranks whose objectives agree with
    the minimum within 1e-8 relative count as tied and the largest tied
    rank wins: the objective only measures misfit along the chosen
    directions, so on an exactly representable target every rank up to the
    true one ties at zero and the richest factorization is the one that
    reproduces the target itself.  ``early_exit_tol`` stops the sweep at
    the first converged rank whose objective drops below it; skipped ranks
    are recorded as +inf.  Raises ``AllRanksFailed`` when no rank
    converges.
    """
    config = config or SolverConfig()
    problem = reduce_instance(instance) if isinstance(instance, ProblemInstance) else instance
    n = problem.n
    per_rank_E = [math.inf] * n
    per_rank_status = [False] * n
    solutions = {}
    failures = {}
    for r in range(1, n + 1):
        try:
            sol = _solve_one_rank(problem, r, config, use_qep_rank1)
        except PsdtlsError as exc:
            failures[r] = str(exc)
            continue
        per_rank_E[r - 1] = sol.E
        per_rank_status[r - 1] = sol.converged
        if sol.converged:
            solutions[r] = sol
        else:
            failures[r] = f"did not converge in {sol.newton_iters} iterations"
        if (
            early_exit_tol is not None
            and sol.converged
            and sol.E < early_exit_tol
        ):
            break
    if not solutions:
        raise AllRanksFailed(failures)
    e_min = min(sol.E for sol in solutions.values())
    tie = 1e-8 * (1.0 + abs(e_min))
    best_rank = max(r for r, sol in solutions.items() if sol.E <= e_min + tie)
    return PsdtlsSolution(
        best=solutions[best_rank],
        best_rank=best_rank,
        per_rank_E=per_rank_E,
        per_rank_status=per_rank_status,
        failures=failures,
    )


def solve_min_rank(instance, bound, config=None, use_qep_rank1=True):
    """Smallest rank with converged objective below ``bound``.

    Walks r = 1, 2, ... and stops at the first satisfying rank.  When
    none satisfies, returns the converged argmin with ``satisfied`` False.
    Raises ``AllRanksFailed`` when no rank converges at all.
    """
    config = config or SolverConfig()
    problem = reduce_instance(instance) if isinstance(instance, ProblemInstance) else instance
    n = problem.n
    per_rank_E = {}
    solutions = {}
    failures = {}
    for r in range(1, n + 1):
        try:
            sol = _solve_one_rank(problem, r, config, use_qep_rank1)
        except PsdtlsError as exc:
            failures[r] = str(exc)
            continue
        per_rank_E[r] = sol.E
        if not sol.converged:
            failures[r] = f"did not converge in {sol.newton_iters} iterations"
            continue
        solutions[r] = sol
        if sol.E < bound:
            return MinRankResult(
                rank=r, solution=sol, satisfied=True, bound=bound, per_rank_E=per_rank_E
            )
    if not solutions:
        raise AllRanksFailed(failures)
    best_rank = min(solutions, key=lambda r: (solutions[r].E, r))
    return MinRankResult(
        rank=best_rank,
        solution=solutions[best_rank],
        satisfied=False,
        bound=bound,
        per_rank_E=per_rank_E,
    )


def build_correlation_instance(C, P=None, Q=None, sym_tol=1e-10):
    """Stack the correlation-approximation data: D = [I; P], T = [C; Q].

    C is the n x n symmetric target; P holds m extra data rows and Q
    their targets (both optional together).  The identity block anchors
    the fit so the best X approximates C itself.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"C must be square, got shape {C.shape}")
    n = C.shape[0]
    scale = float(np.sqrt((C * C).sum()))
    if scale > 0.0 and float(np.sqrt(((C - C.T) ** 2).sum())) > sym_tol * scale:
        raise AsymmetricMatrixError("C must be symmetric")
    if (P is None) != (Q is None):
        raise ValueError("P and Q must be given together")
    if P is None:
        D = np.eye(n)
        T = C.copy()
    else:
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        if P.shape != Q.shape or P.ndim != 2 or P.shape[1] != n:
            raise ValueError("P and Q must share a shape with n columns")
        D = np.vstack([np.eye(n), P])
        T = np.vstack([C, Q])
    return ProblemInstance(D=D, T=T)


def solve_correlation(C, P=None, Q=None, config=None, use_qep_rank1=True):
    """Approximate a symmetric target by a PSD matrix, with optional data rows.

    Runs the full rank sweep on the stacked instance and reports Std, the
    entrywise sample standard deviation (denominator N - 1) of the target
    correction D X - T at the best solution.
    """
    instance = build_correlation_instance(C, P, Q)
    sweep = solve_psdtls(instance, config, use_qep_rank1=use_qep_rank1)
    delta_T = instance.D @ sweep.best.X - instance.T
    std = float(np.std(delta_T, ddof=1)) if delta_T.size > 1 else 0.0
    return CorrelationResult(solution=sweep, std=std)
