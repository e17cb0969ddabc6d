"""Command-line entry point.

One subcommand per experiment kind; the subcommand overrides the kind
stated in the config file.  Exit codes: 0 on success, 2 for configuration
problems, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import KINDS, load_config
from .errors import (
    ConfigError, DivergenceError, InvalidSpecError, MultircError,
    NetGenerationError, NotOnCycleError, RankDeficiencyError,
)
from .harness import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multirc",
        description="Reservoir-computer multifunctionality experiments",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        cmd = sub.add_parser(kind, help=f"run a '{kind}' experiment")
        cmd.add_argument("--config", required=True, help="experiment config file")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--threads", type=int, default=1, help="worker pool size")
        cmd.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        cmd.add_argument("--plots", action="store_true", help="also render PNG plots")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = dataclasses.replace(config, kind=args.kind)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        if args.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {args.threads}")
        manifest = run_experiment(
            config, out_dir=args.out, threads=args.threads, plots=args.plots
        )
    except (ConfigError, InvalidSpecError) as exc:
        print(f"multirc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        DivergenceError, NotOnCycleError, RankDeficiencyError,
        NetGenerationError, MultircError, FloatingPointError,
    ) as exc:
        print(f"multirc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"multirc: wrote {', '.join(manifest['artifacts'])} "
          f"({manifest['wall_time_s']} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
