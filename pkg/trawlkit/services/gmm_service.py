# trawlkit/services/gmm_service.py
#
# Generalised method of moments for parametric trawl families.
#
# Notes:
# - h(Y_t, theta) = (Y_t - mu, Y_t^2 - D(0), Y_t Y_{t+1} - D(1), ..., Y_t Y_{t+m} - D(m))
#   with D(k) = gamma(k delta) + mu^2; sample averages run over t = 1..n-m.
# - The objective g^T A g is minimised by Nelder-Mead inside the parameter
#   box, positive parameters on log scale, with seeded restarts.
# - Sigma_a is the Newey-West (Bartlett kernel) estimate at theta_hat, and
#   the covariance is M Sigma_a M^T with M = (G^T A G)^-1 G^T A.

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from trawlkit.core.errors import (
    BoundaryWarning,
    ConfigurationError,
    ConvergenceError,
    DomainError,
)
from trawlkit.core.random import RandomStream
from trawlkit.models import (
    Exponential,
    GaussianSeed,
    GmmFitResult,
    GmmSpec,
    ModelSpec,
    One,
    PeriodicFunction,
    PoissonSeed,
    SupGamma,
)
from trawlkit.services.moment_service import MomentService
from trawlkit.services.mom_service import finite_difference_jacobian

logger = logging.getLogger(__name__)

PENALTY = 1e300
BOUNDARY_RTOL = 1e-6


@dataclass(frozen=True)
class GmmFamily:
    """Parameter names, default box and the map theta -> ModelSpec."""

    tag: str
    names: Tuple[str, ...]
    positive: Tuple[bool, ...]
    bounds: Tuple[Tuple[float, float], ...]
    build: Callable[[np.ndarray, PeriodicFunction, float], ModelSpec]
    start: Callable[[np.ndarray, float], np.ndarray]


def _acf1(series: np.ndarray) -> float:
    centered = series - series.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        return 0.5
    return float(np.dot(centered[:-1], centered[1:]) / denom)


def _exp_start(series: np.ndarray, delta: float) -> np.ndarray:
    lam = -math.log(min(max(_acf1(series), 1e-3), 0.999)) / delta
    return np.array([lam, series.mean() * lam, max(series.var(), 1e-8) * lam])


def _supgamma_start(series: np.ndarray, delta: float) -> np.ndarray:
    alpha, hurst = 1.0, 2.5
    mass = alpha / (hurst - 1.0)
    return np.array([alpha, hurst, series.mean() / mass, max(series.var(), 1e-8) / mass])


def _exp_poisson_start(series: np.ndarray, delta: float) -> np.ndarray:
    lam = -math.log(min(max(_acf1(series), 1e-3), 0.999)) / delta
    return np.array([lam, max(series.mean(), 1e-6) * lam])


FAMILIES: Dict[str, GmmFamily] = {
    "exp-gaussian": GmmFamily(
        tag="exp-gaussian",
        names=("lambda", "mu_L", "sigma2_L"),
        positive=(True, False, True),
        bounds=((1e-4, 100.0), (-1e4, 1e4), (1e-8, 1e6)),
        build=lambda th, p, d: ModelSpec(
            seed=GaussianSeed(mu=th[1], sigma2=th[2]), g=Exponential(lam=th[0]), p=p, delta=d
        ),
        start=_exp_start,
    ),
    "supgamma-gaussian": GmmFamily(
        tag="supgamma-gaussian",
        names=("alpha", "H", "mu_L", "sigma2_L"),
        positive=(True, True, False, True),
        bounds=((1e-3, 1e3), (1.01, 10.0), (-1e4, 1e4), (1e-8, 1e6)),
        build=lambda th, p, d: ModelSpec(
            seed=GaussianSeed(mu=th[2], sigma2=th[3]),
            g=SupGamma(alpha=th[0], H=th[1]),
            p=p,
            delta=d,
        ),
        start=_supgamma_start,
    ),
    "exp-poisson": GmmFamily(
        tag="exp-poisson",
        names=("lambda", "rate"),
        positive=(True, True),
        bounds=((1e-4, 100.0), (1e-6, 1e6)),
        build=lambda th, p, d: ModelSpec(
            seed=PoissonSeed(rate=th[1]), g=Exponential(lam=th[0]), p=p, delta=d
        ),
        start=_exp_poisson_start,
    ),
}


def get_family(tag: str) -> GmmFamily:
    try:
        return FAMILIES[tag]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise ConfigurationError(f"unknown GMM family '{tag}' (known: {known})") from None


# ---------------------------------------------------------------------------
# Moment map
# ---------------------------------------------------------------------------


def theoretical_moment_vector(
    family: GmmFamily,
    theta: Sequence[float],
    delta: float,
    lags: int,
    p: Optional[PeriodicFunction] = None,
) -> np.ndarray:
    """(mu(theta), D(0, theta), ..., D(m, theta))."""
    model = family.build(np.asarray(theta, dtype=float), p or One(), delta)
    service = MomentService(model)
    mu = service.mean()
    acov = service.acov_vector(lags, delta)
    return np.concatenate(([mu], acov + mu * mu))


def moment_contributions(series: Sequence[float], lags: int) -> np.ndarray:
    """Rows (Y_t, Y_t^2, Y_t Y_{t+1}, ..., Y_t Y_{t+m}) for t = 1..n-m."""
    y = np.asarray(series, dtype=float)
    n = y.size
    if n <= lags + 2:
        raise DomainError(f"need more than {lags + 2} observations, got {n}")
    count = n - lags
    columns = [y[:count]] + [y[:count] * y[k : k + count] for k in range(lags + 1)]
    return np.column_stack(columns)


def sample_moment_vector(series: Sequence[float], lags: int) -> np.ndarray:
    return moment_contributions(series, lags).mean(axis=0)


def gmm_objective(
    theta: Sequence[float],
    sample_moments: np.ndarray,
    family: GmmFamily,
    delta: float,
    weight: np.ndarray,
    p: Optional[PeriodicFunction] = None,
) -> float:
    """g(theta)^T A g(theta) with g = sample moments - theoretical moments."""
    lags = sample_moments.size - 2
    g = sample_moments - theoretical_moment_vector(family, theta, delta, lags, p)
    return float(g @ weight @ g)


def newey_west(contributions: np.ndarray, bandwidth: Optional[int] = None) -> np.ndarray:
    """Bartlett-kernel long-run covariance of the rows of ``contributions``.

    Default bandwidth floor(4 (n/100)^(2/9)).
    """
    n = contributions.shape[0]
    if bandwidth is None:
        bandwidth = int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))
    u = contributions - contributions.mean(axis=0)
    S = u.T @ u / n
    for j in range(1, min(bandwidth, n - 1) + 1):
        gamma_j = u[j:].T @ u[:-j] / n
        S += (1.0 - j / (bandwidth + 1.0)) * (gamma_j + gamma_j.T)
    return S


# ---------------------------------------------------------------------------
# Fit
# ---------------------------------------------------------------------------


class _Transform:
    """theta <-> unconstrained search coordinates (log for positive parameters)."""

    def __init__(self, positive: Sequence[bool]):
        self.positive = np.asarray(positive, dtype=bool)

    def to_search(self, theta: np.ndarray) -> np.ndarray:
        return np.where(self.positive, np.log(np.where(self.positive, theta, 1.0)), theta)

    def to_theta(self, u: np.ndarray) -> np.ndarray:
        return np.where(self.positive, np.exp(np.where(self.positive, u, 0.0)), u)

    def bounds(self, box: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
        out = []
        for (lo, hi), pos in zip(box, self.positive):
            out.append((math.log(lo), math.log(hi)) if pos else (lo, hi))
        return out


def _resolve_box(family: GmmFamily, spec: GmmSpec) -> Tuple[Tuple[float, float], ...]:
    box = spec.bounds if spec.bounds is not None else family.bounds
    if len(box) != len(family.names):
        raise ConfigurationError(
            f"{family.tag} has {len(family.names)} parameters, got {len(box)} bounds"
        )
    for name, (lo, hi), pos in zip(family.names, box, family.positive):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigurationError(f"bounds for {name} must be finite with lo < hi")
        if pos and lo <= 0:
            raise ConfigurationError(f"lower bound for {name} must be > 0")
    return tuple(box)


def _resolve_weight(spec: GmmSpec, size: int) -> np.ndarray:
    if spec.weight is None:
        return np.eye(size)
    weight = np.asarray(spec.weight, dtype=float)
    if weight.shape != (size, size):
        raise ConfigurationError(f"weight matrix must be {size} x {size}, got {weight.shape}")
    return 0.5 * (weight + weight.T)


def _on_boundary(theta: np.ndarray, box: Sequence[Tuple[float, float]]) -> bool:
    for value, (lo, hi) in zip(theta, box):
        tol = BOUNDARY_RTOL * max(1.0, abs(lo), abs(hi))
        if value - lo <= tol or hi - value <= tol:
            return True
    return False


def gmm_fit(
    series: Sequence[float],
    spec: GmmSpec,
    delta: float,
    p: Optional[PeriodicFunction] = None,
) -> GmmFitResult:
    """Minimise the GMM objective and attach the sandwich covariance."""
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    family = get_family(spec.family)
    y = np.asarray(series, dtype=float)
    contributions = moment_contributions(y, spec.lags)
    sample = contributions.mean(axis=0)
    weight = _resolve_weight(spec, sample.size)
    box = _resolve_box(family, spec)
    transform = _Transform(family.positive)
    search_box = transform.bounds(box)
    lo = np.array([b[0] for b in search_box])
    hi = np.array([b[1] for b in search_box])

    def objective(u: np.ndarray) -> float:
        theta = transform.to_theta(np.clip(u, lo, hi))
        try:
            value = gmm_objective(theta, sample, family, delta, weight, p)
        except (DomainError, ValueError, ArithmeticError):
            return PENALTY
        return value if math.isfinite(value) else PENALTY

    start_theta = np.clip(family.start(y, delta), [b[0] for b in box], [b[1] for b in box])
    first = np.clip(transform.to_search(start_theta), lo, hi)
    generator = RandomStream(spec.master_seed, 0).generator
    starts = [first] + [generator.uniform(lo, hi) for _ in range(spec.restarts - 1)]

    trace: List[Dict[str, Any]] = []
    best: Optional[optimize.OptimizeResult] = None
    for attempt, start in enumerate(starts):
        res = optimize.minimize(
            objective,
            start,
            method="Nelder-Mead",
            bounds=search_box,
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000},
        )
        trace.append(
            {
                "attempt": attempt,
                "start": transform.to_theta(start).tolist(),
                "theta": transform.to_theta(res.x).tolist(),
                "objective": float(res.fun),
                "success": bool(res.success),
                "message": str(res.message),
            }
        )
        logger.debug("gmm restart %d: objective=%.6g success=%s", attempt, res.fun, res.success)
        if res.success and res.fun < PENALTY and (best is None or res.fun < best.fun):
            best = res

    if best is None:
        raise ConvergenceError(
            f"{family.tag}: optimizer did not converge in {len(starts)} attempt(s)", trace
        )

    theta = transform.to_theta(best.x)
    boundary = _on_boundary(theta, box)
    if boundary:
        message = f"{family.tag}: estimate {np.round(theta, 6).tolist()} is on the parameter box"
        logger.warning(message)
        warnings.warn(message, BoundaryWarning, stacklevel=2)

    covariance = sandwich_covariance(theta, family, contributions, delta, weight, spec.bandwidth, p)
    logger.info("gmm %s: theta=%s objective=%.6g", family.tag, theta, best.fun)
    return GmmFitResult(
        family=family.tag,
        names=family.names,
        theta=theta,
        covariance=covariance,
        objective=float(best.fun),
        n_obs=int(y.size),
        on_boundary=boundary,
        trace=trace,
    )


def sandwich_covariance(
    theta: np.ndarray,
    family: GmmFamily,
    contributions: np.ndarray,
    delta: float,
    weight: np.ndarray,
    bandwidth: Optional[int] = None,
    p: Optional[PeriodicFunction] = None,
) -> np.ndarray:
    """M Sigma_a M^T, M = (G^T A G)^-1 G^T A."""
    lags = contributions.shape[1] - 2

    def moments(th: np.ndarray) -> np.ndarray:
        return theoretical_moment_vector(family, th, delta, lags, p)

    G = finite_difference_jacobian(moments, theta)
    sigma_a = newey_west(contributions, bandwidth)
    bread = G.T @ weight @ G
    try:
        M = np.linalg.solve(bread, G.T @ weight)
    except np.linalg.LinAlgError:
        logger.warning("%s: singular moment Jacobian, covariance unavailable", family.tag)
        return np.full((theta.size, theta.size), math.nan)
    covariance = M @ sigma_a @ M.T
    return 0.5 * (covariance + covariance.T)
