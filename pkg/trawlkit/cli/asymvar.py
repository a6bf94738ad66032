# trawlkit/cli/asymvar.py
#
# `trawlkit asymvar`: asymptotic variance of the sample mean (V.csv), the
# autocovariance and autocorrelation limit matrices (v_matrix.csv,
# w_matrix.csv) and the assumption report (diagnostics.txt).
# Matrices are only written when the model satisfies the theorem's
# assumptions; the report says which ones fail.

import argparse
import logging

import pandas as pd

from trawlkit.cli.common import (
    MODEL_OPTIONS,
    Option,
    add_command,
    model_from_args,
    output_dir,
    write_matrix,
    write_table,
)
from trawlkit.services.asymptotics_service import (
    acov_limit_covariances,
    check_clt_assumptions,
    sample_mean_variance,
)

logger = logging.getLogger(__name__)

OPTIONS = MODEL_OPTIONS + [
    Option("lags", int, 5, "largest lag h of the limit matrices"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    add_command(subparsers, "asymvar", "asymptotic covariances and CLT diagnostics", OPTIONS, run)


def run(args: argparse.Namespace) -> int:
    model = model_from_args(args)
    out_dir = output_dir(args)
    diagnostics = check_clt_assumptions(model)
    (out_dir / "diagnostics.txt").write_text(diagnostics.render(), encoding="utf-8")

    if diagnostics.acf_clt:
        result = acov_limit_covariances(model, args.lags)
        labels = [str(k) for k in range(args.lags + 1)]
        write_matrix(result.v_matrix, out_dir / "v_matrix.csv", labels)
        write_matrix(result.w_matrix, out_dir / "w_matrix.csv", labels[1:])
        v_delta = result.V_delta
        lag, tolerance = result.truncation_lag, result.achieved_tolerance
    elif diagnostics.sample_mean_clt:
        v_delta = sample_mean_variance(model)
        lag, tolerance = None, None
    else:
        logger.warning("no central limit theorem applies to %s", model.describe())
        return 0

    frame = pd.DataFrame(
        {
            "delta": [model.delta],
            "V_delta": [v_delta],
            "truncation_lag": [lag],
            "achieved_tolerance": [tolerance],
        }
    )
    write_table(frame, out_dir / "V.csv")
    return 0
