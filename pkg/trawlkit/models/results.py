# trawlkit/models/results.py
#
# Result records returned by the services.
#
# Notes:
# - Matrices and paths are numpy arrays (arbitrary_types_allowed); everything
#   else is a plain validated field.
# - parameter_table() renders estimates as the pandas frame written by the CLI.

import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

Z_975 = 1.959963984540054

_ARRAY_CONFIG = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Acf(BaseModel):
    """Sample or theoretical autocorrelations at lags h * delta, h = 0..max_lag."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(gt=0.0)
    values: Tuple[float, ...] = Field(min_length=1)
    centered: bool = True

    @model_validator(mode="after")
    def _check_values(self) -> "Acf":
        if abs(self.values[0] - 1.0) > 1e-12:
            raise ValueError(f"autocorrelation at lag 0 must be 1, got {self.values[0]}")
        if any(abs(v) > 1.0 + 1e-12 for v in self.values):
            raise ValueError("autocorrelations must lie in [-1, 1]")
        return self

    @property
    def max_lag(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, lag: int) -> float:
        return self.values[lag]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"lag": np.arange(len(self.values)), "acf": self.values})


class SliceMatrix(BaseModel):
    """Lebesgue measures s[i, j] of the slices; row k holds the k-th diagonal band."""

    model_config = _ARRAY_CONFIG

    n: int = Field(ge=1)
    delta: float = Field(gt=0.0)
    s: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    def entering_mass(self, k: int) -> float:
        """Total measure of the slices that make up the trawl set at k * delta."""
        total = 0.0
        n = self.n
        for j in range(1, k + 2):
            lo, hi = k + 2 - j, n + 2 - j
            total += float(np.sum(self.s[lo - 1 : hi, j - 1]))
        return total

    def to_frame(self) -> pd.DataFrame:
        rows, cols = np.indices(self.s.shape)
        return pd.DataFrame(
            {"i": rows.ravel() + 1, "j": cols.ravel() + 1, "s": self.s.ravel()}
        )


class SimPath(BaseModel):
    """Simulated values Y at t = (burn_in + k) * delta."""

    model_config = _ARRAY_CONFIG

    delta: float = Field(gt=0.0)
    values: np.ndarray
    burn_in: int = Field(ge=0)
    master_seed: int
    replicate: int = 0

    @property
    def times(self) -> np.ndarray:
        return (self.burn_in + np.arange(self.values.size)) * self.delta

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "value": self.values})


class AsymptoticCovariances(BaseModel):
    """V_delta, the autocovariance limit matrix v and the autocorrelation matrix w."""

    model_config = _ARRAY_CONFIG

    delta: float = Field(gt=0.0)
    V_delta: Optional[float] = None
    v_matrix: np.ndarray
    w_matrix: np.ndarray
    truncation_lag: int
    achieved_tolerance: float


class CltDiagnostics(BaseModel):
    """Which central limit results apply to a model on the grid delta."""

    model_config = ConfigDict(frozen=True)

    delta: float
    sum_abs_acov_finite: bool
    sum_sq_acov_finite: bool
    fourth_moment: bool
    sample_mean_clt: bool
    acf_clt: bool
    notes: Tuple[str, ...] = ()

    def render(self) -> str:
        lines = [
            f"delta = {self.delta:g}",
            f"sum |gamma(j delta)| finite : {self.sum_abs_acov_finite}",
            f"sum gamma(j delta)^2 finite : {self.sum_sq_acov_finite}",
            f"finite fourth moment        : {self.fourth_moment}",
            f"sample-mean CLT applies     : {self.sample_mean_clt}",
            f"autocorrelation CLT applies : {self.acf_clt}",
        ]
        lines.extend(f"note: {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


def _table(
    names: List[str], estimates: np.ndarray, std_errors: np.ndarray, label: str = ""
) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "parameter": names,
            "estimate": estimates,
            "std_error": std_errors,
            "ci_lower": estimates - Z_975 * std_errors,
            "ci_upper": estimates + Z_975 * std_errors,
        }
    )
    if label:
        frame.insert(0, "fit", label)
    return frame


class MomFitResult(BaseModel):
    """Method-of-moments fit: kernel parameter, c(l delta) for l = 1..tau_tilde."""

    model_config = _ARRAY_CONFIG

    kernel_parameter: str
    kernel_estimate: float
    c_estimates: Tuple[float, ...] = ()
    covariance: np.ndarray
    std_errors: Tuple[float, ...]
    n_obs: Optional[int] = None
    delta: float
    tau_tilde: int = 0
    alpha: Optional[float] = None

    @property
    def c_display(self) -> Tuple[float, ...]:
        """c(0) = 1 followed by c(l delta), l = 1..tau_tilde - 1 (one full period)."""
        if not self.c_estimates:
            return (1.0,)
        return (1.0,) + tuple(self.c_estimates[: max(self.tau_tilde - 1, 0)])

    def parameter_names(self) -> List[str]:
        return [self.kernel_parameter] + [f"c({l})" for l in range(1, len(self.c_estimates) + 1)]

    def parameter_table(self, label: str = "") -> pd.DataFrame:
        estimates = np.array([self.kernel_estimate, *self.c_estimates], dtype=float)
        errors = np.array(self.std_errors, dtype=float)
        if errors.size != estimates.size:
            errors = np.full(estimates.size, math.nan)
        return _table(self.parameter_names(), estimates, errors, label)


class GmmSpec(BaseModel):
    """Parametric family, lag count m, optional box override and weighting."""

    model_config = _ARRAY_CONFIG

    family: str
    lags: int = Field(default=5, ge=2)
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None
    weight: Optional[np.ndarray] = None
    bandwidth: Optional[int] = Field(default=None, ge=0)
    restarts: int = Field(default=5, ge=1)
    master_seed: int = Field(default=0, ge=0)


class GmmFitResult(BaseModel):
    model_config = _ARRAY_CONFIG

    family: str
    names: Tuple[str, ...]
    theta: np.ndarray
    covariance: np.ndarray
    objective: float
    n_obs: int
    on_boundary: bool = False
    trace: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None) / self.n_obs)

    def parameter_table(self, label: str = "") -> pd.DataFrame:
        return _table(list(self.names), np.asarray(self.theta, float), self.std_errors, label)


class TimeSeriesFile(BaseModel):
    """Validated observations with strictly increasing timestamps."""

    model_config = _ARRAY_CONFIG

    timestamps: pd.Index
    values: np.ndarray
    delta: float = Field(gt=0.0)
    source: Optional[str] = None
    duplicates: Tuple[str, ...] = ()
    gaps: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def is_dated(self) -> bool:
        return isinstance(self.timestamps, pd.DatetimeIndex)

    def to_frame(self, date_col: str = "date", value_col: str = "value") -> pd.DataFrame:
        return pd.DataFrame({date_col: self.timestamps, value_col: self.values})


class RunConfig(BaseModel):
    """Fully resolved CLI invocation, serialised next to the outputs."""

    model_config = ConfigDict(frozen=True, extra="allow")

    command: str
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    out_dir: str = "."
    log_level: str = "WARNING"
    plot: bool = False

    def as_env(self) -> Dict[str, object]:
        return {key: value for key, value in self.model_dump().items() if value is not None}
