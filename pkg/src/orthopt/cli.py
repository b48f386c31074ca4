"""Command-line front end: run experiment grids, profile solvers, selftest."""

import argparse
import sys

from .harness import ConfigError, emit_table, load_config, run, timing_profile


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="orthopt",
        description="Penalty-based and Riemannian solvers for generalized orthogonality")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a solver grid from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--solver", action="append", default=None,
                       help="restrict to a solver id (repeatable)")
    p_run.add_argument("--tol", type=float, default=None, help="single gradient tolerance")
    p_run.add_argument("--seed", type=int, default=None, help="override the problem seed")
    p_run.add_argument("--out", default=None, help="output directory for tables and traces")

    p_prof = sub.add_parser("profile", help="fixed-iteration timing decomposition")
    p_prof.add_argument("--config", required=True)
    p_prof.add_argument("--iters", type=int, default=100)
    p_prof.add_argument("--solver", action="append", default=None)

    sub.add_parser("selftest", help="run the manifold/penalty invariant battery")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)

    if args.command == "selftest":
        from .diagnostics import run_selftest
        try:
            return 0 if run_selftest(stream=sys.stdout) else 2
        except Exception as exc:                                    # noqa: BLE001
            print(f"internal error: {exc}", file=sys.stderr)
            return 2

    try:
        config = load_config(args.config)
        if args.solver:
            config.solvers = args.solver
        if args.command == "run":
            if args.tol is not None:
                config.tols = [args.tol]
            if args.seed is not None:
                config.problem["seed"] = args.seed
            if args.out is not None:
                config.out = args.out
        config.validate()
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "run":
            records = run(config)
            sys.stdout.write(emit_table(records, "text"))
            return 0
        profiles = timing_profile(config, iters=args.iters)
        for solver_id, tb in profiles.items():
            shares = ", ".join(f"{k} {v:5.1f}%" for k, v in tb.percent.items())
            print(f"{solver_id:<10} total {tb.total:8.3f}s  {shares}")
        return 0
    except Exception as exc:                                        # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
