"""Benchmark harness: reproducible instances, timing records, profiles.

Instance generation uses the Philox 4x64 counter-based generator keyed by
``(suite seed, trial index)``; D is drawn before T, entries are uniform
on [a, b) via ``(b - a) * U + a``.  This mapping is part of the file
contract: a records CSV regenerated from the same spec is identical in
everything but the timing column.  The starting basis inside the solver
is seeded with ``spec.seed * 1000003 + trial`` so every solver sees the
same start on the same instance.

Failed runs keep their row with ``converged = 0`` and ``E = inf``;
Dolan-More ratios treat them as infinitely slow.
"""

import csv
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .drivers import solve_psdtls
from .errors import PsdtlsError
from .newton import Backend, SolverConfig, solve_rank_r
from .objective import ProblemInstance

__all__ = [
    "GeneratorSpec",
    "BenchmarkRecord",
    "ProfileCurve",
    "generate_instance",
    "run_suite",
    "write_records",
    "read_records",
    "dolan_more_profile",
    "write_profile",
]

CSV_HEADER = [
    "problem_id",
    "solver_id",
    "m",
    "n",
    "r",
    "seed",
    "elapsed_seconds",
    "E",
    "orth_residual",
    "converged",
]


@dataclass(frozen=True)
class GeneratorSpec:
    """One problem family: size, entry interval, trial count, seed."""

    m: int
    n: int
    a: float = 0.0
    b: float = 1.0
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < self.n:
            raise ValueError(f"need m >= n >= 1, got {self.m} x {self.n}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ValueError("interval must be finite with b > a")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class BenchmarkRecord:
    """One timed solver run; ``r`` is a rank number or the string 'sweep'."""

    problem_id: str
    solver_id: str
    m: int
    n: int
    r: str
    seed: int
    elapsed_seconds: float
    E: float
    orth_residual: float
    converged: bool


@dataclass(frozen=True)
class ProfileCurve:
    """Dolan-More performance profile points (tau, rho) for one solver."""

    solver_id: str
    points: tuple


def generate_instance(spec, trial_index):
    """Deterministic instance for (spec.seed, trial_index)."""
    if not 0 <= trial_index:
        raise ValueError("trial_index must be nonnegative")
    key = np.array([spec.seed, trial_index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    width = spec.b - spec.a
    D = width * gen.random((spec.m, spec.n)) + spec.a
    T = width * gen.random((spec.m, spec.n)) + spec.a
    return ProblemInstance(D=D, T=T)


def _solver_seed(spec, trial_index):
    return spec.seed * 1000003 + trial_index


def run_suite(specs, solver_ids, config=None, rank=None, use_qep_rank1=True):
    """Time every solver on every instance of every spec.

    ``rank`` fixes the target rank; None runs the full sweep.  Each
    instance is generated once and shared by all solvers.  Solver errors
    become failed records instead of aborting the suite.
    """
    config = config or SolverConfig()
    records = []
    for spec in specs:
        for trial in range(spec.trials):
            instance = generate_instance(spec, trial)
            problem_id = f"{spec.m}x{spec.n}-seed{spec.seed}-trial{trial}"
            for solver_id in solver_ids:
                cfg = replace(
                    config,
                    backend=Backend(solver_id),
                    seed=_solver_seed(spec, trial),
                    trace_path=None,
                    keep_iterates=False,
                )
                t0 = time.perf_counter()
                converged = False
                E = math.inf
                orth = math.inf
                try:
                    if rank is None:
                        sweep = solve_psdtls(instance, cfg, use_qep_rank1=use_qep_rank1)
                        E = sweep.best.E
                        orth = sweep.best.orth_residual
                        converged = True
                    else:
                        sol = solve_rank_r(instance, rank, cfg)
                        E = sol.E
                        orth = sol.orth_residual
                        converged = sol.converged
                except PsdtlsError:
                    converged = False
                    E = math.inf
                    orth = math.inf
                elapsed = time.perf_counter() - t0
                records.append(
                    BenchmarkRecord(
                        problem_id=problem_id,
                        solver_id=solver_id,
                        m=spec.m,
                        n=spec.n,
                        r="sweep" if rank is None else str(rank),
                        seed=spec.seed,
                        elapsed_seconds=elapsed,
                        E=E,
                        orth_residual=orth,
                        converged=converged,
                    )
                )
    return records


def write_records(path, records):
    """Write benchmark records as CSV with 17-significant-digit floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.problem_id,
                    rec.solver_id,
                    rec.m,
                    rec.n,
                    rec.r,
                    rec.seed,
                    f"{rec.elapsed_seconds:.17g}",
                    f"{rec.E:.17g}",
                    f"{rec.orth_residual:.17g}",
                    int(rec.converged),
                ]
            )


def read_records(path):
    """Read a records CSV written by ``write_records``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected records header: {header}")
        records = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"bad record row: {row}")
            records.append(
                BenchmarkRecord(
                    problem_id=row[0],
                    solver_id=row[1],
                    m=int(row[2]),
                    n=int(row[3]),
                    r=row[4],
                    seed=int(row[5]),
                    elapsed_seconds=float(row[6]),
                    E=float(row[7]),
                    orth_residual=float(row[8]),
                    converged=bool(int(row[9])),
                )
            )
    return records


def dolan_more_profile(records):
    """Performance profiles over wall-clock time.

    For problem p and solver s the ratio is elapsed(p, s) divided by the
    fastest converged time on p; failed runs (and runs on problems where
    nobody converged) get an infinite ratio.  rho_s(tau) is the fraction
    of all problems with ratio at most tau, sampled at every distinct
    finite ratio plus tau = 1.
    """
    solvers = []
    problems = []
    best_run = {}
    for rec in records:
        if rec.solver_id not in solvers:
            solvers.append(rec.solver_id)
        if rec.problem_id not in problems:
            problems.append(rec.problem_id)
        key = (rec.problem_id, rec.solver_id)
        old = best_run.get(key)
        if (
            old is None
            or (rec.converged, -rec.elapsed_seconds) > (old.converged, -old.elapsed_seconds)
        ):
            best_run[key] = rec
    if not problems:
        raise ValueError("no records to profile")
    t_best = {}
    for p in problems:
        times = [
            best_run[(p, s)].elapsed_seconds
            for s in solvers
            if (p, s) in best_run and best_run[(p, s)].converged
        ]
        t_best[p] = min(times) if times else None
    if all(t is None for t in t_best.values()):
        raise ValueError("no successful run on any problem")
    ratios = {}
    finite = set()
    for p in problems:
        for s in solvers:
            rec = best_run.get((p, s))
            if rec is None or not rec.converged or t_best[p] is None:
                ratios[(p, s)] = math.inf
            else:
                ratio = rec.elapsed_seconds / t_best[p] if t_best[p] > 0 else 1.0
                ratios[(p, s)] = ratio
                finite.add(ratio)
    taus = sorted(finite | {1.0})
    n_problems = len(problems)
    curves = []
    for s in solvers:
        points = tuple(
            (tau, sum(1 for p in problems if ratios[(p, s)] <= tau) / n_problems)
            for tau in taus
        )
        curves.append(ProfileCurve(solver_id=s, points=points))
    return curves


def write_profile(path, curve):
    """Write one profile curve as two whitespace columns: tau rho."""
    with open(path, "w", encoding="utf-8") as fh:
        for tau, rho in curve.points:
            fh.write(f"{tau:.17g} {rho:.17g}\n")
