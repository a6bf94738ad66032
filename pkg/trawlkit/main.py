# trawlkit/main.py
#
# Command-line entry point: `trawlkit <command> [flags]`.
#
# Notes:
# - Each command module registers its own parser, like a router being
#   included into an application.
# - Exit codes: 0 success, 2 usage error (argparse), 1 computation error with
#   one `error: <ClassName>: <message>` line on stderr.
# - The resolved configuration is written to <out-dir>/run_config.env after
#   every successful run.

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from trawlkit import __version__
from trawlkit.cli import acf, asymvar, fit, report, simulate, slices
from trawlkit.cli.common import output_dir, resolve, write_run_config
from trawlkit.core.config import configure_logging, read_config_file
from trawlkit.core.errors import ConfigurationError, TrawlkitError

logger = logging.getLogger(__name__)

COMMANDS = (simulate, slices, acf, asymvar, fit, report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trawlkit",
        description="Simulation and moment-based inference for periodic trawl processes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for module in COMMANDS:
        module.register(commands)
    return parser


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    if not Path(path).is_file():
        raise ConfigurationError(f"config file '{path}' not found")
    return read_config_file(path)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        resolve(args, args.options, _load_config(args.config))
        configure_logging(args.log_level)
        if getattr(args, "method", None):
            args.command = f"{args.command} {args.method}"
        logger.info("running %s", args.command)
        status = args.handler(args)
        write_run_config(args, output_dir(args))
        return status
    except (TrawlkitError, ValueError) as exc:
        logger.debug("%s failed", getattr(args, "command", "command"), exc_info=True)
        message = str(exc).splitlines()[0] if str(exc) else ""
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
