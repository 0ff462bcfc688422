#!/usr/bin/env python3
"""
The code entry
"""
import argparse
import logging
import sys
from typing import List, Optional

import commands
import exceptions

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conceptsig", description="Moment signatures of point-cloud concepts")
    parser.add_argument("--seed", type=int, default=0, help="global seed of every random component")
    parser.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="stderr log level"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in commands.commands.items():
        command.add_arguments(subparsers.add_parser(name, help=command.help))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse the command line, run the command and map failures to exit codes"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    command = commands.commands[args.command](args)
    try:
        return command.perform()
    except exceptions.ConceptSigError as exc:
        logger.debug("command %s failed", args.command, exc_info=True)
        logger.error("%s", exc)
        return exc.exit_code
    except exceptions.ExperimentFailed as exc:
        logger.error("experiment failed")
        return int(exc.code or 1)


if __name__ == "__main__":
    sys.exit(main())
