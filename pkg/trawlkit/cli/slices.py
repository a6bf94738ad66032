# trawlkit/cli/slices.py
#
# `trawlkit slices`: the slice measures s[i, j] as an `i,j,s` CSV.

import argparse

from trawlkit.cli.common import Option, add_command, output_dir, write_table
from trawlkit.models import parse_trawl
from trawlkit.services.simulation_service import compute_slices

OPTIONS = [
    Option("trawl", str, "exp(1)", "trawl function"),
    Option("delta", float, 1.0, "grid step"),
    Option("n", int, 10, "number of grid steps"),
    Option("out", str, "slices.csv", "output file name inside --out-dir"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    add_command(subparsers, "slices", "write the slice measure matrix", OPTIONS, run)


def run(args: argparse.Namespace) -> int:
    matrix = compute_slices(parse_trawl(args.trawl), args.n, args.delta)
    write_table(matrix.to_frame(), output_dir(args) / args.out)
    return 0
