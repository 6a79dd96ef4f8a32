"""Command-line interface.

    fairalloc run --config cfg.json [--out DIR] [--threads K] [--dump-trajectories]
    fairalloc plot-data --in DIR --out DIR
    fairalloc check-assumptions --env <preset|config.json>

Exit codes: 0 success, 1 configuration problem, 2 solver failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, FairallocError, MissingInputError, UnknownPresetError
from .experiment import check_assumptions, emit_plot_data, load_config, run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairalloc",
        description="Fairness-aware online resource allocation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config-driven sweep")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--threads", type=int, default=1,
                       help="worker processes for trials (default 1)")
    p_run.add_argument("--dump-trajectories", action="store_true", default=None,
                       help="write per-trial trajectory CSVs")

    p_plot = sub.add_parser("plot-data", help="emit per-figure data files")
    p_plot.add_argument("--in", dest="in_dir", required=True,
                        help="run directory containing summary.csv")
    p_plot.add_argument("--out", dest="out_dir", required=True,
                        help="directory for the plot data files")

    p_check = sub.add_parser("check-assumptions",
                             help="report binding structure and dual prices")
    p_check.add_argument("--env", required=True,
                         help="preset name or config file with an env")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                config = load_config(args.config)
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            out = run(config, out_dir=args.out, threads=args.threads,
                      dump_trajectories=args.dump_trajectories)
            print(f"wrote {out / 'summary.csv'}")
            return EXIT_OK
        if args.command == "plot-data":
            files = emit_plot_data(args.in_dir, args.out_dir)
            for path in files:
                print(f"wrote {path}")
            return EXIT_OK
        if args.command == "check-assumptions":
            try:
                print(check_assumptions(args.env))
            except (UnknownPresetError, OSError, KeyError) as exc:
                message = exc.args[0] if exc.args else exc
                print(f"error: {message}", file=sys.stderr)
                return EXIT_CONFIG
            return EXIT_OK
    except (ConfigError, MissingInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FairallocError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
