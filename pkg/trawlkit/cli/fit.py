# trawlkit/cli/fit.py
#
# `trawlkit fit mom-exp|mom-supgamma|gmm`: parameter tables (estimate,
# std error, 95% CI) for a CSV series.
#
# Notes:
# - mom-exp / mom-supgamma use the known-period estimators unless --c-delta
#   is given, in which case the known-c(delta) variant runs.
# - --levy (with --p) names the seed and kernel of the data; standard errors
#   then come from the full limit matrix at the fitted trawl.
# - mom-supgamma without --alpha first fixes alpha with the least-squares
#   fit of the autocorrelation function up to --alpha-max-lag.

import argparse
import logging
from typing import Optional

import numpy as np
import pandas as pd

from trawlkit.cli.common import SERIES_OPTIONS, Option, add_command, output_dir, write_table
from trawlkit.core.errors import ConfigurationError
from trawlkit.models import GmmSpec, ModelSpec, MomFitResult, TimeSeriesFile
from trawlkit.services.data_service import load_csv
from trawlkit.services.gmm_service import FAMILIES, gmm_fit
from trawlkit.services.mom_service import (
    fit_supgamma_alpha,
    mom_exp_known_c,
    mom_exp_known_tau,
    mom_supgamma_known_c,
    mom_supgamma_known_tau,
)
from trawlkit.services.moment_service import sample_acf

logger = logging.getLogger(__name__)

_COMMON = SERIES_OPTIONS + [
    Option("out", str, "fit.csv", "output file name inside --out-dir"),
]

MOM_EXP_OPTIONS = _COMMON + [
    Option("tau", int, 7, "period in grid steps (tau_tilde)"),
    Option("c_delta", float, None, "known c(delta); switches to the known-c estimator"),
    Option("levy", str, None, "seed of the data; with --p, standard errors use the full limit"),
    Option("p", str, "one", "periodic kernel of the data, used together with --levy"),
]

MOM_SUPGAMMA_OPTIONS = MOM_EXP_OPTIONS + [
    Option("alpha", float, None, "supGamma scale alpha (fitted from the ACF when omitted)"),
    Option("alpha_max_lag", int, 50, "largest lag used by the preliminary alpha fit"),
]

GMM_OPTIONS = _COMMON + [
    Option("model", str, "exp-gaussian", "parametric family", choices=sorted(FAMILIES)),
    Option("lags", int, 5, "number of product-moment lags m"),
    Option("weight", str, "identity", "'identity' or a CSV file holding the weight matrix"),
    Option("bandwidth", int, None, "Newey-West bandwidth (default floor(4 (n/100)^(2/9)))"),
    Option("restarts", int, 5, "optimizer starts"),
]


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("fit", help="method-of-moments and GMM fits")
    methods = parser.add_subparsers(dest="method", metavar="METHOD", required=True)

    add_command(methods, "mom-exp", "exponential periodic trawl", MOM_EXP_OPTIONS, run_mom_exp)
    add_command(
        methods, "mom-supgamma", "supGamma periodic trawl", MOM_SUPGAMMA_OPTIONS, run_mom_supgamma
    )
    add_command(methods, "gmm", "generalised method of moments", GMM_OPTIONS, run_gmm)


def load_series(args: argparse.Namespace) -> TimeSeriesFile:
    if not args.input:
        raise ConfigurationError("fit needs an input series (--in)")
    return load_csv(args.input, args.date_col, args.value_col, args.delta)


def data_model(args: argparse.Namespace, ts: TimeSeriesFile) -> Optional[ModelSpec]:
    """Seed and periodic kernel of the data; the trawl is replaced by the fitted one."""
    if not args.levy:
        return None
    return ModelSpec.from_strings(args.levy, "exp(1)", args.p, ts.delta, len(ts))


def fit_mom_exp(
    ts: TimeSeriesFile,
    tau: int,
    c_delta: Optional[float] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    acf = sample_acf(ts.values, ts.delta, tau + 1)
    if c_delta is not None:
        return mom_exp_known_c(acf[1], c_delta, ts.delta, n=len(ts), model=model)
    return mom_exp_known_tau(acf, tau, n=len(ts), model=model)


def fit_mom_supgamma(
    ts: TimeSeriesFile,
    tau: int,
    alpha: Optional[float] = None,
    c_delta: Optional[float] = None,
    alpha_max_lag: int = 50,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    max_lag = min(max(tau + 1, alpha_max_lag), len(ts) - 1)
    acf = sample_acf(ts.values, ts.delta, max_lag)
    if alpha is None:
        alpha = fit_supgamma_alpha(acf, tau, max_lag=alpha_max_lag).alpha
    if c_delta is not None:
        return mom_supgamma_known_c(acf[1], c_delta, alpha, ts.delta, n=len(ts), model=model)
    return mom_supgamma_known_tau(acf, tau, alpha, n=len(ts), model=model)


def _write_fit(args: argparse.Namespace, frame: pd.DataFrame) -> int:
    write_table(frame, output_dir(args) / args.out)
    return 0


def run_mom_exp(args: argparse.Namespace) -> int:
    ts = load_series(args)
    result = fit_mom_exp(ts, args.tau, args.c_delta, data_model(args, ts))
    return _write_fit(args, result.parameter_table("mom-exp"))


def run_mom_supgamma(args: argparse.Namespace) -> int:
    ts = load_series(args)
    result = fit_mom_supgamma(
        ts, args.tau, args.alpha, args.c_delta, args.alpha_max_lag, data_model(args, ts)
    )
    frame = result.parameter_table("mom-supgamma")
    frame.insert(1, "alpha", result.alpha)
    return _write_fit(args, frame)


def _weight_matrix(spec: str, size: int) -> Optional[np.ndarray]:
    if spec == "identity":
        return None
    try:
        weight = pd.read_csv(spec, header=None).to_numpy(dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read weight matrix '{spec}': {exc}") from exc
    if weight.shape != (size, size):
        raise ConfigurationError(f"weight matrix must be {size} x {size}, got {weight.shape}")
    return weight


def run_gmm(args: argparse.Namespace) -> int:
    ts = load_series(args)
    spec = GmmSpec(
        family=args.model,
        lags=args.lags,
        weight=_weight_matrix(args.weight, args.lags + 2),
        bandwidth=args.bandwidth,
        restarts=args.restarts,
        master_seed=args.seed,
    )
    result = gmm_fit(ts.values, spec, ts.delta)
    frame = result.parameter_table(f"gmm-{result.family}")
    frame["objective"] = result.objective
    return _write_fit(args, frame)
