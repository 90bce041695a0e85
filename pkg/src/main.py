#!/usr/bin/env python3
"""Collaborative road-profile estimation experiments."""
import argparse
import logging
import sys
from pathlib import Path

from harness import cmd_attack, cmd_report, cmd_run, cmd_validate
from utils import ConfigError, RoadCollabError, configure_logging

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN = 2

logger = logging.getLogger("roadcollab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadcollab",
        description="Privacy-preserving collaborative road-profile estimation across a vehicle fleet.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("config", type=Path, help="experiment TOML file")
    run.add_argument("-o", "--output", type=Path, default=None, help="base folder for run directories")

    validate = sub.add_parser("validate", help="check a configuration file")
    validate.add_argument("config", type=Path, help="experiment TOML file")

    attack = sub.add_parser("attack", help="attack the stored messages of a run")
    attack.add_argument("run_dir", type=Path)
    attack.add_argument("--order", type=int, default=None, help="order assumed by the attacker")

    report = sub.add_parser("report", help="rebuild tables and figures of a run")
    report.add_argument("run_dir", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else -1 if args.quiet else 0)

    try:
        if args.command == "validate":
            cfg = cmd_validate(args.config)
            print(f"{args.config}: OK ({cfg.run.trials} trials, {cfg.fleet.vehicles} vehicles)")
        elif args.command == "run":
            report = cmd_run(args.config, args.output)
            print(report.summary())
        elif args.command == "attack":
            rows = cmd_attack(args.run_dir, args.order)
            print(f"attacked {len(rows)} messages")
        elif args.command == "report":
            rows = cmd_report(args.run_dir)
            print(f"report rebuilt for {len(rows)} vehicles in {args.run_dir}")
    except ConfigError as e:
        for problem in e.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (RoadCollabError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_RUN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
