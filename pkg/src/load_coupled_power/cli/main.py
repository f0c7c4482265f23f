"""``lcp`` command-line entry point.

Exit codes: 0 solved / checks pass, 2 infeasible, 3 property violation,
64 configuration error, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from ..config.experiment import ExperimentConfig
from ..errors import ConfigError, ScenarioError
from ..utils import setup_logging
from .check import cmd_check
from .run import cmd_run
from .sweep import cmd_sweep

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_CONFIG = 64


class _Parser(argparse.ArgumentParser):
    """Argument errors become config errors instead of exiting with 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment YAML file (defaults apply when omitted)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="scenario seed")
    parser.add_argument("--tol", type=float, help="convergence tolerance")
    parser.add_argument("--max-iter", type=int, help="iteration limit")
    parser.add_argument("--algo", help="pm-sc, rm-sc, dtapc-pm, dtapc-rm or opv-pm")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcp", description="Load-coupled joint time and power allocation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="solve one scenario")
    _common(run)

    sweep = sub.add_parser("sweep", help="sweep the uniform demand")
    _common(sweep)
    sweep.add_argument("--param", default="demand", choices=["demand"])
    sweep.add_argument("--range", dest="span", help="START:STOP:POINTS in bit/s")

    check = sub.add_parser("check", help="run the property suite")
    _common(check)
    check.add_argument("--scenario", help="scenario YAML dump to check instead of generating one")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_yaml(args.config) if args.config else ExperimentConfig()
    return config.with_overrides(
        output_dir=args.out,
        seed=args.seed,
        tolerance=args.tol,
        max_iter=args.max_iter,
        algorithm=args.algo,
    )


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    try:
        args = build_parser().parse_args(argv)
        config = _load_config(args)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "sweep":
            return cmd_sweep(config, args.param, args.span)
        return cmd_check(config, args.scenario)
    except (ConfigError, ScenarioError) as e:
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("unexpected failure: %s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
