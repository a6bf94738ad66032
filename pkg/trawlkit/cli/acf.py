# trawlkit/cli/acf.py
#
# `trawlkit acf`: theoretical autocorrelations of a model, or sample
# autocorrelations of a CSV series when --in is given. Output `lag,acf`.

import argparse

from trawlkit.cli.common import (
    MODEL_OPTIONS,
    SERIES_OPTIONS,
    Option,
    add_command,
    model_from_args,
    output_dir,
    to_bool,
    write_table,
)
from trawlkit.cli.plots import line_chart
from trawlkit.services.data_service import load_csv
from trawlkit.services.moment_service import MomentService, sample_acf

_MODEL = [option for option in MODEL_OPTIONS if option.dest != "delta"]

OPTIONS = _MODEL + SERIES_OPTIONS + [
    Option("max_lag", int, 30, "largest lag h (in steps of delta)"),
    Option("uncentered", to_bool, False, "do not subtract the sample mean"),
    Option("out", str, "acf.csv", "output file name inside --out-dir"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    add_command(subparsers, "acf", "theoretical or sample autocorrelations", OPTIONS, run)


def run(args: argparse.Namespace) -> int:
    if args.input:
        ts = load_csv(args.input, args.date_col, args.value_col, args.delta)
        acf = sample_acf(ts.values, ts.delta, args.max_lag, centered=not args.uncentered)
        label = "empirical"
    else:
        if args.delta is None:
            args.delta = 1.0
        model = model_from_args(args)
        acf = MomentService(model).acf_vector(args.max_lag)
        label = "theoretical"

    out_dir = output_dir(args)
    frame = acf.to_frame()
    write_table(frame, out_dir / args.out)
    if args.plot:
        line_chart(
            out_dir / "acf.svg",
            frame["lag"],
            {label: frame["acf"]},
            xlabel="lag",
            ylabel="autocorrelation",
            markers=True,
        )
    return 0
