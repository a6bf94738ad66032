# trawlkit/cli/simulate.py
#
# `trawlkit simulate`: slice-based sample paths written as `t,value` CSV.
# With --replicates R > 1 replicate r goes to `<stem>_r<r>.csv`.

import argparse
import logging
from pathlib import Path

from trawlkit.cli.common import (
    MODEL_OPTIONS,
    Option,
    add_command,
    model_from_args,
    output_dir,
    to_bool,
    write_table,
)
from trawlkit.cli.plots import line_chart
from trawlkit.services.simulation_service import simulate_replicates

logger = logging.getLogger(__name__)

OPTIONS = MODEL_OPTIONS + [
    Option("burn_in", int, None, "points dropped from the start (default: 99% tail-mass rule)"),
    Option("replicates", int, 1, "number of independent paths"),
    Option("weight_shift", to_bool, False, "use p((r-1) delta) as slice weights"),
    Option("out", str, "path.csv", "output file name inside --out-dir"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    add_command(subparsers, "simulate", "simulate periodic trawl paths", OPTIONS, run)


def run(args: argparse.Namespace) -> int:
    model = model_from_args(args)
    paths = simulate_replicates(
        model,
        n=args.n,
        master_seed=args.seed,
        replicates=args.replicates,
        threads=args.threads,
        burn_in=args.burn_in,
        weight_shift=args.weight_shift,
    )
    out_dir = output_dir(args)
    target = Path(args.out)
    for path in paths:
        name = target.name if len(paths) == 1 else f"{target.stem}_r{path.replicate}{target.suffix}"
        write_table(path.to_frame(), out_dir / name)
        if args.plot:
            line_chart(
                out_dir / (Path(name).stem + ".svg"),
                path.times,
                {"Y": path.values},
                xlabel="t",
                ylabel="value",
                title=model.describe(),
            )
    logger.info("simulated %d path(s) of length %d", len(paths), paths[0].values.size)
    return 0
