# trawlkit/services/moment_service.py
#
# Theoretical and sample second-order statistics of periodic trawl processes.
#
# Notes:
# - E(Y) = E(L') int p g, Var(Y) = Var(L') int p^2 g and
#   Cov(Y_0, Y_t) = Var(L') int_0^inf p(u) p(t+u) g(t+u) du.
# - Closed forms are used for p = 1 and for the exponential trawl with a
#   sine kernel; every other combination is integrated numerically.
# - Sample autocovariances divide by n at every lag so the sequence stays
#   positive semidefinite.

import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from trawlkit.core.errors import DegenerateSeriesError, DomainError
from trawlkit.core.quadrature import finite_integral, tail_integral
from trawlkit.models import Acf, ModelSpec, PeriodicFunction
from trawlkit.models.kernels import (
    correlation_factor_c,
    kernel_product_integral,
    kernel_tail_integral,
)
from trawlkit.services.simulation_service import simulate_shared_noise

logger = logging.getLogger(__name__)

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"


class SeasonalMoments(NamedTuple):
    mean: float
    variance: float
    acov: float
    acor: float


class MomentService:
    """Second-order structure of one model.

    Kernel integrals that do not depend on the lag are computed once per
    instance.
    """

    def __init__(self, model: ModelSpec, closed_form: bool = True):
        self.model = model
        self.closed_form = closed_form
        self._variance: Optional[float] = None

    def mean(self) -> float:
        kappa1 = self.model.seed.mean()
        if kappa1 == 0.0:
            return 0.0
        return kappa1 * kernel_tail_integral(
            self.model.g, self.model.p, 0.0, "identity", closed_form=self.closed_form
        )

    def variance(self) -> float:
        if self._variance is None:
            self._variance = self.acov(0.0)
        return self._variance

    def moments(self) -> tuple[float, float]:
        return self.mean(), self.variance()

    def acov(self, t: float) -> float:
        """Cov(Y_0, Y_t) for t >= 0."""
        if t < 0:
            raise DomainError(f"lag must be >= 0, got {t}")
        kappa2 = self.model.seed.variance()
        return kappa2 * kernel_product_integral(
            self.model.g, self.model.p, t, closed_form=self.closed_form
        )

    def acf(self, t: float) -> float:
        """Cor(Y_0, Y_t); equals 1 at t = 0."""
        if t < 0:
            raise DomainError(f"lag must be >= 0, got {t}")
        self.model.seed.variance()
        if t == 0.0:
            return 1.0
        g, p = self.model.g, self.model.p
        if not p.has_kernel:
            total = g.total_mass
            if total == 0.0:
                raise DomainError("autocorrelation undefined for a trawl of zero mass")
            return correlation_factor_c(g, p, t) * g.integral(t) / total
        variance = self.variance()
        if variance == 0.0:
            raise DomainError("autocorrelation undefined for a model with zero variance")
        return self.acov(t) / variance

    def acf_vector(self, max_lag: int, delta: Optional[float] = None) -> Acf:
        step = self.model.delta if delta is None else delta
        values = [self.acf(h * step) for h in range(max_lag + 1)]
        return Acf(delta=step, values=tuple(values), centered=True)

    def acov_vector(self, max_lag: int, delta: Optional[float] = None) -> np.ndarray:
        step = self.model.delta if delta is None else delta
        return np.array([self.acov(h * step) for h in range(max_lag + 1)])


def theoretical_moments(model: ModelSpec) -> tuple[float, float]:
    """(E Y_t, Var Y_t)."""
    return MomentService(model).moments()


def theoretical_acov(model: ModelSpec, t: float) -> float:
    return MomentService(model).acov(t)


def theoretical_acf(model: ModelSpec, t: float) -> float:
    return MomentService(model).acf(t)


def theoretical_acf_vector(model: ModelSpec, delta: float, max_lag: int) -> Acf:
    return MomentService(model).acf_vector(max_lag, delta)


# ---------------------------------------------------------------------------
# Deterministic seasonality on the plain trawl process X
# ---------------------------------------------------------------------------


def seasonal_variant_moments(
    model: ModelSpec, q: PeriodicFunction, kind: str, t: float
) -> SeasonalMoments:
    """Mean, variance, Cov(X^s_0, X^s_t) and Cor(X^s_0, X^s_t) at time t.

    X^a(t) = q(t) + X_t and X^m(t) = q(t) X_t for the trawl process X (p = 1).
    Mean and variance refer to time t.
    """
    if not model.p.is_one:
        raise DomainError("seasonal variants are defined on the trawl process with p = 1")
    if kind not in (ADDITIVE, MULTIPLICATIVE):
        raise DomainError(f"seasonality must be additive or multiplicative, got '{kind}'")
    if t < 0:
        raise DomainError(f"lag must be >= 0, got {t}")

    plain = MomentService(model)
    mean_x, var_x = plain.moments()
    cov_x = plain.acov(t)
    cor_x = plain.acf(t)
    q0, qt = float(q(0.0)), float(q(t))

    if kind == ADDITIVE:
        return SeasonalMoments(qt + mean_x, var_x, cov_x, cor_x)

    if qt == 0.0:
        raise DomainError(f"multiplicative seasonality vanishes at t={t}")
    return SeasonalMoments(qt * mean_x, qt * qt * var_x, q0 * qt * cov_x, q0 / qt * cor_x)


# ---------------------------------------------------------------------------
# Sample statistics
# ---------------------------------------------------------------------------


def _as_series(series: Sequence[float]) -> np.ndarray:
    values = np.asarray(series, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("series must be a non-empty one-dimensional sequence")
    return values


def sample_mean(series: Sequence[float]) -> float:
    return float(np.mean(_as_series(series)))


def sample_acov(series: Sequence[float], delta: float, h: int, centered: bool = True) -> float:
    """gamma_hat(h delta) = n^-1 sum_{j=1}^{n-h} (Y_j - m)(Y_{j+h} - m); m = 0 if not centered."""
    values = _as_series(series)
    n = values.size
    if h < 0 or h >= n:
        raise DomainError(f"lag {h} outside [0, {n - 1}] for a series of length {n}")
    if centered:
        values = values - values.mean()
    return float(np.dot(values[: n - h], values[h:]) / n)


def sample_acf(
    series: Sequence[float], delta: float, max_lag: int, centered: bool = True
) -> Acf:
    """rho_hat(h delta) = gamma_hat(h delta) / gamma_hat(0), h = 0..max_lag."""
    values = _as_series(series)
    n = values.size
    if max_lag < 0 or max_lag >= n:
        raise DomainError(f"max lag {max_lag} outside [0, {n - 1}]")
    if centered:
        values = values - values.mean()
    gamma0 = float(np.dot(values, values) / n)
    if gamma0 == 0.0:
        raise DegenerateSeriesError("series has zero sample variance")
    acf: List[float] = [1.0]
    for h in range(1, max_lag + 1):
        ratio = float(np.dot(values[: n - h], values[h:]) / n) / gamma0
        acf.append(min(1.0, max(-1.0, ratio)))
    return Acf(delta=delta, values=tuple(acf), centered=centered)


# ---------------------------------------------------------------------------
# Joint cumulant (test helper)
# ---------------------------------------------------------------------------


def joint_cumulant(model: ModelSpec, thetas: Sequence[float], times: Sequence[float]) -> complex:
    """log E exp(i sum_k theta_k Y_{t_k}) for the periodic trawl process.

    At each time point s the x-axis splits into bands on which the same set of
    trawl sets is active; the seed cumulant is evaluated per band and the
    result integrated over s.
    """
    thetas = np.asarray(thetas, dtype=float)
    times = np.asarray(times, dtype=float)
    if thetas.shape != times.shape or thetas.ndim != 1:
        raise DomainError("thetas and times must be one-dimensional of equal length")
    g, p, seed = model.g, model.p, model.seed
    latest = float(times.max())

    def band_sum(u: float) -> complex:
        # u = latest - s >= 0
        lags = times - latest + u
        active = lags >= 0
        if not np.any(active):
            return 0j
        heights = np.where(active, g(np.where(active, lags, 0.0)), 0.0)
        weights = np.where(active, thetas * p(np.where(active, lags, 0.0)), 0.0)
        order = np.argsort(heights)[::-1]
        total = 0j
        for rank, k in enumerate(order):
            upper = heights[k]
            lower = heights[order[rank + 1]] if rank + 1 < order.size else 0.0
            if upper <= lower:
                continue
            # bands above ``lower`` are covered by every set taller than it
            argument = float(np.sum(weights[order[: rank + 1]]))
            total += (upper - lower) * seed.cumulant(argument)
        return total

    first_start = latest - float(times.min())
    points = sorted({latest - t for t in times})

    def real_part(u: float) -> float:
        return band_sum(u).real

    def imag_part(u: float) -> float:
        return band_sum(u).imag

    def piece(f: Callable[[float], float]) -> float:
        head = finite_integral(f, 0.0, first_start, points=points) if first_start > 0 else 0.0
        return head + tail_integral(f, first_start)

    value = complex(piece(real_part), piece(imag_part))
    logger.debug("joint cumulant at %d time points: %s", times.size, value)
    return value


def seasonal_variant_paths(
    model: ModelSpec, q: PeriodicFunction, master_seed: int, burn_in: int = 0
) -> Dict[str, np.ndarray]:
    """Sample paths of X, X^a, X^m and Y driven by the same Levy noise.

    Delegates to the slice simulator, which combines one draw of the slice
    matrix with the weights p and 1.
    """
    y_path, x_path = simulate_shared_noise(model, master_seed, burn_in)
    q_values = np.asarray(q(x_path.times), dtype=float)
    return {
        "t": x_path.times,
        "X": x_path.values,
        "Xa": q_values + x_path.values,
        "Xm": q_values * x_path.values,
        "Y": y_path.values,
        "q": q_values,
    }
