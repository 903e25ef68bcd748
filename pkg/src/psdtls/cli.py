"""Command-line front end.

Subcommands: solve-rank, psdtls, minrank, corr, bench, profile.  Matrices
travel in the whitespace text format of ``psdtls.linalg`` (header line
"rows cols", then one row per line).  Exit codes: 0 success, 1 solver
failure, 2 usage or input-format error.
"""

import argparse
import sys

from . import bench as bench_mod
from .drivers import solve_correlation, solve_min_rank, solve_psdtls
from .errors import MatrixFormatError, PsdtlsError
from .linalg import read_matrix, write_matrix
from .newton import Backend, SolverConfig, solve_rank_r
from .objective import ProblemInstance

__all__ = ["main", "entry"]

_BACKENDS = [b.value for b in Backend]


def _add_solver_options(sub, trace=False):
    sub.add_argument("--backend", choices=_BACKENDS, default=Backend.GMRES_O.value,
                     help="inner linear-solver backend")
    sub.add_argument("--eps", type=float, default=1e-10,
                     help="relative factor in the step-size stopping rule")
    sub.add_argument("--delta", type=float, default=1e-12,
                     help="absolute factor in the step-size stopping rule")
    sub.add_argument("--max-iter", type=int, default=200,
                     help="outer Newton iteration cap")
    sub.add_argument("--lin-tol", type=float, default=1e-10,
                     help="inner solve relative residual tolerance")
    sub.add_argument("--lin-max-iter", type=int, default=None,
                     help="inner solve iteration cap (default n*r, 4x for cg)")
    sub.add_argument("--gmres-restart", type=int, default=None,
                     help="GMRES restart length (default min(n*r, 50))")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for the random orthonormal start")
    sub.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=True,
                     help="start from the spectral initializer instead of a random basis")
    sub.add_argument("--operator-mode", choices=["exact", "fixed-scale"], default="exact",
                     help="Newton operator: exact gradient-field Jacobian or "
                          "fixed-scale with curvature corrections")
    sub.add_argument("--last-term-mode", choices=["fyt_y", "yt_fy"], default="fyt_y",
                     help="r x r factor in the fixed-scale operator's final term")
    if trace:
        sub.add_argument("--trace", default=None, metavar="TRACE.csv",
                         help="write per-iteration diagnostics to this CSV")


def _config_from(args, trace=False):
    return SolverConfig(
        eps=args.eps,
        delta=args.delta,
        max_newton_iters=args.max_iter,
        backend=Backend(args.backend),
        lin_tol=args.lin_tol,
        lin_max_iters=args.lin_max_iter,
        gmres_restart=args.gmres_restart,
        seed=args.seed,
        warm_start=args.warm_start,
        operator_mode=args.operator_mode,
        last_term_mode=args.last_term_mode,
        trace_path=getattr(args, "trace", None) if trace else None,
    )


def _load_instance(args):
    D = read_matrix(args.data)
    T = read_matrix(args.target)
    try:
        return ProblemInstance(D=D, T=T)
    except ValueError as exc:
        raise MatrixFormatError(args.data, 1, str(exc)) from exc


def _cmd_solve_rank(args):
    instance = _load_instance(args)
    config = _config_from(args, trace=True)
    try:
        sol = solve_rank_r(instance, args.rank, config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_matrix(args.out, sol.X)
    print(f"rank: {args.rank}")
    print(f"E: {sol.E:.17g}")
    print(f"orth_residual: {sol.orth_residual:.17g}")
    print(f"iterations: {sol.newton_iters}")
    print(f"converged: {'true' if sol.converged else 'false'}")
    return 0 if sol.converged else 1


def _cmd_psdtls(args):
    instance = _load_instance(args)
    config = _config_from(args)
    sweep = solve_psdtls(
        instance,
        config,
        use_qep_rank1=not args.no_qep,
        early_exit_tol=args.early_exit,
    )
    write_matrix(args.out, sweep.best.X)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("r,E,converged\n")
            for i, (e, ok) in enumerate(zip(sweep.per_rank_E, sweep.per_rank_status)):
                fh.write(f"{i + 1},{e:.17g},{int(ok)}\n")
    print(f"best_rank: {sweep.best_rank}")
    print(f"E: {sweep.best.E:.17g}")
    print(f"orth_residual: {sweep.best.orth_residual:.17g}")
    return 0


def _cmd_minrank(args):
    instance = _load_instance(args)
    config = _config_from(args)
    result = solve_min_rank(instance, args.bound, config, use_qep_rank1=not args.no_qep)
    print(f"rank: {result.rank}")
    print(f"E: {result.solution.E:.17g}")
    print(f"satisfied: {'true' if result.satisfied else 'false'}")
    return 0


def _cmd_corr(args):
    if (args.p is None) != (args.q is None):
        print("error: --p and --q must be given together", file=sys.stderr)
        return 2
    C = read_matrix(args.c)
    P = read_matrix(args.p) if args.p else None
    Q = read_matrix(args.q) if args.q else None
    config = _config_from(args)
    try:
        result = solve_correlation(C, P, Q, config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_matrix(args.out, result.solution.best.X)
    print(f"best_rank: {result.solution.best_rank}")
    print(f"E: {result.solution.best.E:.17g}")
    print(f"std: {result.std:.17g}")
    return 0


def _parse_sizes(text):
    specs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        parts = chunk.lower().split("x")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"size must look like 20x10, got {chunk!r}")
        try:
            m, n = int(parts[0]), int(parts[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"size must look like 20x10, got {chunk!r}") from None
        specs.append((m, n))
    if not specs:
        raise argparse.ArgumentTypeError("at least one size is required")
    return specs


def _cmd_bench(args):
    sizes = args.sizes
    solver_ids = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solver_ids:
        if s not in _BACKENDS:
            print(f"error: unknown solver {s!r}", file=sys.stderr)
            return 2
    specs = [
        bench_mod.GeneratorSpec(
            m=m, n=n, a=args.interval[0], b=args.interval[1],
            trials=args.trials, seed=args.seed,
        )
        for m, n in sizes
    ]
    config = SolverConfig(
        eps=args.eps,
        delta=args.delta,
        max_newton_iters=args.max_iter,
        lin_tol=args.lin_tol,
        lin_max_iters=args.lin_max_iter,
        gmres_restart=args.gmres_restart,
    )
    records = bench_mod.run_suite(specs, solver_ids, config, rank=args.rank)
    bench_mod.write_records(args.out, records)
    n_fail = sum(1 for r in records if not r.converged)
    print(f"records: {len(records)}")
    print(f"failed: {n_fail}")
    print(f"written: {args.out}")
    return 0


def _cmd_profile(args):
    records = bench_mod.read_records(args.records)
    try:
        curves = bench_mod.dolan_more_profile(records)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for curve in curves:
        path = f"{args.out_prefix}_{curve.solver_id}.dat"
        bench_mod.write_profile(path, curve)
        print(f"written: {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="psdtls",
        description="Positive semi-definite total least squares solvers.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve-rank", help="solve at one fixed target rank",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--data", required=True, help="matrix file for D")
    p.add_argument("--target", required=True, help="matrix file for T")
    p.add_argument("--rank", type=int, required=True, help="target rank r")
    p.add_argument("--out", required=True, help="output matrix file for X")
    _add_solver_options(p, trace=True)
    p.set_defaults(func=_cmd_solve_rank)

    p = subs.add_parser("psdtls", help="sweep all ranks and keep the best",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--data", required=True, help="matrix file for D")
    p.add_argument("--target", required=True, help="matrix file for T")
    p.add_argument("--out", required=True, help="output matrix file for X")
    p.add_argument("--report", default=None, metavar="RANKS.csv",
                   help="write per-rank objectives to this CSV")
    p.add_argument("--no-qep", action="store_true",
                   help="use the Newton iteration at rank 1 as well")
    p.add_argument("--early-exit", type=float, default=None, metavar="TOL",
                   help="stop the sweep once a converged rank reaches E below TOL")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_psdtls)

    p = subs.add_parser("minrank", help="smallest rank with E below a bound",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--data", required=True, help="matrix file for D")
    p.add_argument("--target", required=True, help="matrix file for T")
    p.add_argument("--bound", type=float, required=True, help="objective bound e")
    p.add_argument("--no-qep", action="store_true",
                   help="use the Newton iteration at rank 1 as well")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_minrank)

    p = subs.add_parser("corr", help="approximate a symmetric target by a PSD matrix",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--c", required=True, help="matrix file for the symmetric target C")
    p.add_argument("--p", default=None, help="matrix file for extra data rows P")
    p.add_argument("--q", default=None, help="matrix file for extra target rows Q")
    p.add_argument("--out", required=True, help="output matrix file for X")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_corr)

    p = subs.add_parser("bench", help="run the timing suite",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--sizes", required=True, type=_parse_sizes,
                   help="comma-separated sizes, e.g. 20x10,100x20")
    p.add_argument("--trials", type=int, default=10, help="instances per size")
    p.add_argument("--seed", type=int, default=0, help="suite seed")
    p.add_argument("--solvers", default="cg-o,gmres-o,cg-l",
                   help="comma-separated backend list")
    p.add_argument("--out", required=True, help="output records CSV")
    p.add_argument("--rank", type=int, default=None,
                   help="fixed target rank (default: full sweep)")
    p.add_argument("--interval", type=float, nargs=2, default=[0.0, 1.0],
                   metavar=("A", "B"), help="entry interval [A, B)")
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--delta", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--lin-tol", type=float, default=1e-10)
    p.add_argument("--lin-max-iter", type=int, default=None)
    p.add_argument("--gmres-restart", type=int, default=None)
    p.set_defaults(func=_cmd_bench)

    p = subs.add_parser("profile", help="Dolan-More profiles from a records CSV",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--records", required=True, help="records CSV from bench")
    p.add_argument("--out-prefix", required=True,
                   help="output prefix; writes <prefix>_<solver>.dat")
    p.set_defaults(func=_cmd_profile)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PsdtlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
