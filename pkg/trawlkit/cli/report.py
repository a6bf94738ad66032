# trawlkit/cli/report.py
#
# `trawlkit report`: the electricity-price pipeline end to end.
#
#   load -> split -> sample ACF per part -> mom-exp and mom-supgamma fits
#   -> report.csv, acf_ts1.csv, acf_ts2.csv (+ acf_ts*.svg with --plot)
#
# --split names the first date of the second part.

import argparse
import logging
from typing import List, Optional

import pandas as pd

from trawlkit.cli.common import SERIES_OPTIONS, Option, add_command, output_dir, write_table
from trawlkit.cli.fit import load_series, fit_mom_exp, fit_mom_supgamma
from trawlkit.cli.plots import line_chart
from trawlkit.models import MomFitResult, TimeSeriesFile
from trawlkit.services.data_service import split_series_at
from trawlkit.services.mom_service import EXPONENTIAL, SUPGAMMA, fitted_acf
from trawlkit.services.moment_service import sample_acf

logger = logging.getLogger(__name__)

OPTIONS = SERIES_OPTIONS + [
    Option("split", str, "2021-01-01", "first timestamp of the second part"),
    Option("tau", int, 7, "period in grid steps (tau_tilde)"),
    Option("alpha_ts1", float, None, "supGamma alpha for the first part (fitted when omitted)"),
    Option("alpha_ts2", float, None, "supGamma alpha for the second part (fitted when omitted)"),
    Option("alpha_max_lag", int, 50, "largest lag used by the preliminary alpha fit"),
    Option("max_lag", int, 30, "largest lag of the ACF tables"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    add_command(subparsers, "report", "split, fit and tabulate a price series", OPTIONS, run)


def _acf_table(
    ts: TimeSeriesFile, exp_fit: MomFitResult, sup_fit: MomFitResult, max_lag: int
) -> pd.DataFrame:
    max_lag = min(max_lag, len(ts) - 1)
    empirical = sample_acf(ts.values, ts.delta, max_lag)
    exp_curve = fitted_acf(
        EXPONENTIAL, exp_fit.kernel_estimate, exp_fit.c_estimates, ts.delta, max_lag
    )
    sup_curve = fitted_acf(
        SUPGAMMA,
        sup_fit.kernel_estimate - 1.0,
        sup_fit.c_estimates,
        ts.delta,
        max_lag,
        alpha=sup_fit.alpha,
    )
    return pd.DataFrame(
        {
            "lag": range(max_lag + 1),
            "empirical": empirical.values,
            "exp_fit": exp_curve,
            "supgamma_fit": sup_curve,
        }
    )


def run(args: argparse.Namespace) -> int:
    series = load_series(args)
    parts = split_series_at(series, args.split)
    out_dir = output_dir(args)
    alphas: List[Optional[float]] = [args.alpha_ts1, args.alpha_ts2]

    tables = []
    for index, (part, alpha) in enumerate(zip(parts, alphas), start=1):
        name = f"ts{index}"
        logger.info("%s: %d observations", name, len(part))
        exp_fit = fit_mom_exp(part, args.tau)
        sup_fit = fit_mom_supgamma(part, args.tau, alpha, alpha_max_lag=args.alpha_max_lag)
        for label, fit in ((f"{name} mom-exp", exp_fit), (f"{name} mom-supgamma", sup_fit)):
            frame = fit.parameter_table(label)
            frame.insert(1, "n_obs", len(part))
            frame.insert(2, "alpha", fit.alpha)
            tables.append(frame)

        acf_frame = _acf_table(part, exp_fit, sup_fit, args.max_lag)
        write_table(acf_frame, out_dir / f"acf_{name}.csv")
        if args.plot:
            line_chart(
                out_dir / f"acf_{name}.svg",
                acf_frame["lag"],
                {
                    "empirical": acf_frame["empirical"],
                    "exponential": acf_frame["exp_fit"],
                    "supGamma": acf_frame["supgamma_fit"],
                },
                xlabel="lag (days)",
                ylabel="autocorrelation",
                title=f"Empirical and fitted autocorrelation, {name.upper()}",
            )

    write_table(pd.concat(tables, ignore_index=True), out_dir / "report.csv")
    return 0
