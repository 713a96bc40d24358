"""Command-line driver: ``qmimo <subcommand> [--config path] [--seed n] [--jobs k] [--out dir]``."""

import argparse
import logging
import sys
from datetime import UTC, datetime

import numpy as np
from pydantic import ValidationError

from qmimo.config import ExperimentConfig, load_config
from qmimo.data import to_jsonl, write_atomic
from qmimo.errors import ConfigError, QmimoError
from qmimo.experiments import EXPERIMENTS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment; every option overrides the config file."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="root seed (required here or in the config)")
    common.add_argument("--jobs", type=int, help="worker cap")
    common.add_argument("--out", help="output directory")
    common.add_argument("--timings", action="store_true", default=None, help="add wall_ms to the CSV report")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--channel", help="JSON channel file")
    common.add_argument("--powers", type=float, nargs="+", help="power grid P")
    common.add_argument("--n-q", dest="n_q", type=int, help="number of one-bit ADCs")
    common.add_argument("--trials", type=int, help="Monte-Carlo channel uses")

    parser = argparse.ArgumentParser(prog="qmimo", description="Rates of MIMO receivers with one-bit ADCs.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, experiment in EXPERIMENTS.items():
        sub = subparsers.add_parser(name, parents=[common], help=experiment.description)
        match name:
            case "rates":
                sub.add_argument("--scenarios", nargs="+", choices=["I", "linear", "quadratic-V"])
            case "counts":
                sub.add_argument("--rank-max", dest="rank_max", type=int)
                sub.add_argument("--nq-min", dest="nq_min", type=int)
                sub.add_argument("--nq-max", dest="nq_max", type=int)
            case "simulate":
                sub.add_argument("--toy", choices=["linear", "quadratic"], help="built-in two-comparator code")
                sub.add_argument("--code", help="JSON region code file")
            case "highsnr":
                sub.add_argument("--rank", type=int)
                sub.add_argument("--degree", type=int, help="shattering polynomial degree")
            case "approx":
                sub.add_argument("--partitions", type=int)
                sub.add_argument("--samples", type=int)
    return parser


def run(config: ExperimentConfig) -> int:
    """Run the configured experiment and write its reports atomically into ``config.out``."""
    experiment = EXPERIMENTS[config.command]
    logger.info("Running %s with seed %d", experiment.name, config.seed)
    result = experiment(config)

    stamp = datetime.now(UTC).isoformat(timespec="seconds")
    table = result.table(timings=config.timings)
    write_atomic(config.out / "report.csv", table.to_csv(comment=f"qmimo {config.command} {stamp}"))
    write_atomic(config.out / "report.jsonl", to_jsonl(result.records()))
    if result.report is not None:
        write_atomic(config.out / "adjudication.md", result.report.render())
    print(table.to_md(), end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Entry point of the ``qmimo`` script; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    overrides = {key: value for key, value in vars(args).items() if key not in ("config", "verbose")}
    try:
        return run(load_config(args.config, **overrides))
    except (ConfigError, ValidationError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except (QmimoError, np.linalg.LinAlgError, FloatingPointError) as e:
        logger.error("Numeric failure: %s", e)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
