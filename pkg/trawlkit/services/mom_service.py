# trawlkit/services/mom_service.py
#
# Method-of-moments estimators for exponential and supGamma periodic trawls.
#
# Notes:
# - Both kernels give rho(l delta) = c(l delta) exp(theta phi_l) with
#     exponential: theta = lambda,  phi_l = -l delta
#     supGamma:    theta = H - 1,   phi_l = -log(1 + l delta / alpha)
#   so one set of inversion formulas and one Jacobian serve both.
# - Known tau: T = 1 + tau_tilde lags apart c repeats, so
#   theta = log(rho_T / rho_1) / (phi_T - phi_1) and c(l) = rho_l exp(-theta phi_l).
# - Covariances are asymptotic (D W D^T); std errors divide by n.
# - Given the seed and periodic kernel of the data (``model``), the default W
#   is the full limit matrix from asymptotics_service at the fitted trawl.
#   Without them it falls back to the Gaussian-seed Bartlett sum of the
#   fitted autocorrelations, which drops the fourth-cumulant term; for known
#   c(delta) the periodic factor beyond c(delta) is unknown and p = 1 is used.

import logging
import math
import warnings
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from trawlkit.core.errors import (
    AssumptionViolationError,
    AssumptionViolationWarning,
    DomainError,
)
from trawlkit.models import Acf, Exponential, ModelSpec, MomFitResult, SupGamma
from trawlkit.services.asymptotics_service import (
    MAX_LAG_CLOSED_FORM,
    acf_limit_matrix,
    bartlett_series,
)

logger = logging.getLogger(__name__)

EXPONENTIAL = "exponential"
SUPGAMMA = "supgamma"
W_TOLERANCE = 1e-10


class AlphaFit(NamedTuple):
    alpha: float
    hurst: float
    c: Tuple[float, ...]
    loss: float


def _phi(kind: str, lags: np.ndarray, delta: float, alpha: Optional[float]) -> np.ndarray:
    lags = np.asarray(lags, dtype=float)
    if kind == EXPONENTIAL:
        return -lags * delta
    if kind == SUPGAMMA:
        if alpha is None or not alpha > 0:
            raise DomainError(f"supGamma estimators need alpha > 0, got {alpha}")
        return -np.log1p(lags * delta / alpha)
    raise DomainError(f"unknown kernel '{kind}'")


def _kernel_parameter(kind: str, theta: float) -> Tuple[str, float]:
    return ("lambda", theta) if kind == EXPONENTIAL else ("H", 1.0 + theta)


def _check_delta(delta: float) -> None:
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")


# ---------------------------------------------------------------------------
# Inversion map and Jacobian
# ---------------------------------------------------------------------------


def mom_map(
    kind: str, rho: Sequence[float], delta: float, alpha: Optional[float] = None
) -> np.ndarray:
    """(theta, c(delta), ..., c(tau_tilde delta)) from rho_1..rho_T, T = len(rho).

    theta is lambda for the exponential kernel and H - 1 for supGamma.
    """
    rho = np.asarray(rho, dtype=float)
    T = rho.size
    if T < 2:
        raise DomainError(f"need at least two autocorrelations, got {T}")
    rho1, rhoT = rho[0], rho[-1]
    if rho1 == 0.0 or rhoT == 0.0:
        raise DomainError("autocorrelations at lags 1 and T must be nonzero")
    if (rho1 > 0) != (rhoT > 0):
        raise DomainError(
            f"autocorrelations at lags 1 and {T} have opposite signs ({rho1:g}, {rhoT:g})"
        )
    phi = _phi(kind, np.arange(1, T + 1), delta, alpha)
    theta = math.log(rhoT / rho1) / (phi[-1] - phi[0])
    c = rho[:-1] * np.exp(-theta * phi[:-1])
    return np.concatenate(([theta], c))


def mom_jacobian(
    kind: str, rho: Sequence[float], delta: float, alpha: Optional[float] = None
) -> np.ndarray:
    """D[i, j] = dF_i / d rho_j for the map of ``mom_map``; T x T."""
    rho = np.asarray(rho, dtype=float)
    T = rho.size
    F = mom_map(kind, rho, delta, alpha)
    theta = F[0]
    phi = _phi(kind, np.arange(1, T + 1), delta, alpha)
    spread = phi[-1] - phi[0]

    d_theta = np.zeros(T)
    d_theta[0] = -1.0 / (rho[0] * spread)
    d_theta[-1] += 1.0 / (rho[-1] * spread)

    D = np.zeros((T, T))
    D[0] = d_theta
    for l in range(1, T):
        scale = math.exp(-theta * phi[l - 1])
        D[l] = -rho[l - 1] * scale * phi[l - 1] * d_theta
        D[l, l - 1] += scale
    return D


def fitted_acf(
    kind: str,
    theta: float,
    c: Sequence[float],
    delta: float,
    max_lag: int,
    alpha: Optional[float] = None,
) -> np.ndarray:
    """rho(l delta) = c(l mod tau_tilde) exp(theta phi_l), l = 0..max_lag, c(0) = 1.

    ``c`` holds c(delta)..c(tau_tilde delta); its last entry is the period
    wrap and is replaced by c(0) = 1.
    """
    period = max(len(c), 1)
    table = np.concatenate(([1.0], np.asarray(c, dtype=float)[: period - 1]))
    lags = np.arange(max_lag + 1)
    return table[lags % period] * np.exp(theta * _phi(kind, lags, delta, alpha))


def _bartlett_lag(kind: str, theta: float, delta: float, alpha: Optional[float]) -> Optional[int]:
    """Truncation lag for the Bartlett sum, or None when it diverges."""
    if kind == EXPONENTIAL:
        if not theta > 0:
            return None
        lag = math.log(1.0 / W_TOLERANCE) / (theta * delta)
    else:
        # sum |gamma| needs H > 2
        if not theta > 1.0:
            return None
        lag = alpha / delta * (W_TOLERANCE ** (-1.0 / theta) - 1.0)
    return int(min(math.ceil(lag), MAX_LAG_CLOSED_FORM))


def _model_limit(
    kind: str,
    theta: float,
    delta: float,
    alpha: Optional[float],
    model: ModelSpec,
    h: int,
) -> Optional[np.ndarray]:
    """w_{pq}, p, q = 1..h, of ``model`` with its trawl replaced by the fitted one."""
    g = Exponential(lam=theta) if kind == EXPONENTIAL else SupGamma(alpha=alpha, H=1.0 + theta)
    fitted = model.model_copy(update={"g": g, "delta": delta})
    try:
        return acf_limit_matrix(fitted, h, delta)
    except AssumptionViolationError as exc:
        logger.warning("no limit matrix at the fitted model: %s", exc)
        return None


def _default_w(
    kind: str,
    F: np.ndarray,
    delta: float,
    alpha: Optional[float],
    h: int,
    model: Optional[ModelSpec] = None,
) -> Optional[np.ndarray]:
    theta = float(F[0])
    lag = _bartlett_lag(kind, theta, delta, alpha)
    if lag is None:
        return None
    if model is not None:
        return _model_limit(kind, theta, delta, alpha, model, h)
    rho = fitted_acf(kind, theta, F[1:], delta, lag + h, alpha)
    return bartlett_series(rho, h, lag)


def _warn_no_errors(kind: str, estimate: float) -> None:
    name, value = _kernel_parameter(kind, estimate)
    message = (
        f"{name}={value:.4g} lies outside the short-memory range of the central limit "
        "theorem; returning the point estimate without standard errors"
    )
    logger.warning(message)
    warnings.warn(message, AssumptionViolationWarning, stacklevel=3)


def _result(
    kind: str,
    F: np.ndarray,
    covariance: np.ndarray,
    n: Optional[int],
    delta: float,
    tau_tilde: int,
    alpha: Optional[float],
) -> MomFitResult:
    name, value = _kernel_parameter(kind, float(F[0]))
    if n is not None and n > 0 and np.all(np.isfinite(covariance)):
        errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None) / n)
    else:
        errors = np.full(F.size, math.nan)
    return MomFitResult(
        kernel_parameter=name,
        kernel_estimate=value,
        c_estimates=tuple(float(v) for v in F[1:]),
        covariance=covariance,
        std_errors=tuple(float(e) for e in errors),
        n_obs=n,
        delta=delta,
        tau_tilde=tau_tilde,
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# Known c(delta)
# ---------------------------------------------------------------------------


def _known_c(
    kind: str,
    rho1: float,
    c_delta: float,
    delta: float,
    alpha: Optional[float],
    n: Optional[int],
    w11: Optional[float],
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    _check_delta(delta)
    if c_delta == 0.0:
        raise DomainError("c(delta) must be nonzero")
    ratio = rho1 / c_delta
    if not ratio > 0:
        raise DomainError(f"rho(delta)/c(delta) must be positive, got {ratio:g}")
    if ratio > 1.0:
        raise DomainError(f"rho(delta)/c(delta) = {ratio:g} exceeds 1")
    phi1 = float(_phi(kind, np.array([1.0]), delta, alpha)[0])
    theta = math.log(ratio) / phi1
    F = np.array([theta])

    if w11 is None:
        w = _default_w(kind, F, delta, alpha, 1, model)
        w11 = None if w is None else float(w[0, 0])
    if w11 is None or (kind == SUPGAMMA and theta <= 1.0):
        _warn_no_errors(kind, theta)
        covariance = np.full((1, 1), math.nan)
    else:
        covariance = np.array([[w11 / (rho1 * phi1) ** 2]])

    result = _result(kind, F, covariance, n, delta, 0, alpha)
    logger.info("%s known c: %s = %.6g", kind, result.kernel_parameter, result.kernel_estimate)
    return result


def mom_exp_known_c(
    rho1: float,
    c_delta: float,
    delta: float,
    n: Optional[int] = None,
    w11: Optional[float] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    """lambda_hat = -log(rho1 / c(delta)) / delta.

    The asymptotic variance is w11 exp(2 lambda delta) / (delta c(delta))^2.
    Without ``w11``, a ``model`` supplies the seed and periodic kernel and w11
    is taken from asymptotics_service at exp(lambda_hat). Failing both, it is
    the Gaussian-seed value for the plain exponential trawl,
    1 - exp(-2 lambda delta), which ignores c(l delta) and the seed's
    fourth cumulant.
    """
    return _known_c(EXPONENTIAL, rho1, c_delta, delta, None, n, w11, model)


def mom_exp_plugin(
    rho1: float,
    c_hat: float,
    delta: float,
    n: Optional[int] = None,
    w11: Optional[float] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    """mom_exp_known_c with an estimated c(delta); the error in c_hat is not propagated."""
    logger.debug("plug-in estimate with c_hat=%.6g", c_hat)
    return _known_c(EXPONENTIAL, rho1, c_hat, delta, None, n, w11, model)


def mom_supgamma_known_c(
    rho1: float,
    c_delta: float,
    alpha: float,
    delta: float,
    n: Optional[int] = None,
    w11: Optional[float] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    """H_hat = 1 - log(rho1 / c(delta)) / log(1 + delta / alpha).

    Standard errors need H > 2; below that the point estimate comes with an
    AssumptionViolationWarning. ``w11`` defaults as in mom_exp_known_c.
    """
    return _known_c(SUPGAMMA, rho1, c_delta, delta, alpha, n, w11, model)


# ---------------------------------------------------------------------------
# Known period
# ---------------------------------------------------------------------------


def _known_tau(
    kind: str,
    acf: Acf,
    tau_tilde: int,
    delta: Optional[float],
    alpha: Optional[float],
    n: Optional[int],
    w_matrix: Optional[np.ndarray],
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    if tau_tilde < 1:
        raise DomainError(f"tau_tilde must be >= 1, got {tau_tilde}")
    delta = acf.delta if delta is None else delta
    _check_delta(delta)
    T = tau_tilde + 1
    if T > acf.max_lag:
        raise DomainError(f"need autocorrelations up to lag {T}, got {acf.max_lag}")
    rho = np.array(acf.values[1 : T + 1])
    F = mom_map(kind, rho, delta, alpha)
    D = mom_jacobian(kind, rho, delta, alpha)

    if w_matrix is None:
        short_memory = kind == EXPONENTIAL or F[0] > 1.0
        w_matrix = _default_w(kind, F, delta, alpha, T, model) if short_memory else None
    else:
        w_matrix = np.asarray(w_matrix, dtype=float)
        if w_matrix.shape != (T, T):
            raise DomainError(f"W must be {T} x {T}, got {w_matrix.shape}")

    if w_matrix is None:
        _warn_no_errors(kind, float(F[0]))
        covariance = np.full((T, T), math.nan)
    else:
        covariance = D @ w_matrix @ D.T
        covariance = 0.5 * (covariance + covariance.T)

    result = _result(kind, F, covariance, n, delta, tau_tilde, alpha)
    logger.info(
        "%s known period %d: %s = %.6g",
        kind,
        tau_tilde,
        result.kernel_parameter,
        result.kernel_estimate,
    )
    return result


def mom_exp_known_tau(
    acf: Acf,
    tau_tilde: int,
    delta: Optional[float] = None,
    n: Optional[int] = None,
    w_matrix: Optional[np.ndarray] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    """lambda = log(rho(T delta) / rho(delta)) / (delta (1 - T)),
    c(l delta) = rho(l delta) e^{lambda l delta}.

    W defaults to the limit matrix of ``model`` at the fitted trawl, or to the
    Gaussian-seed Bartlett matrix of the fitted autocorrelations.
    """
    return _known_tau(EXPONENTIAL, acf, tau_tilde, delta, None, n, w_matrix, model)


def mom_supgamma_known_tau(
    acf: Acf,
    tau_tilde: int,
    alpha: float,
    delta: Optional[float] = None,
    n: Optional[int] = None,
    w_matrix: Optional[np.ndarray] = None,
    model: Optional[ModelSpec] = None,
) -> MomFitResult:
    """H = 1 + log(rho(T delta) / rho(delta)) / log((alpha + delta) / (alpha + T delta)).

    c(l delta) = rho(l delta) (1 + l delta / alpha)^(H - 1).
    """
    return _known_tau(SUPGAMMA, acf, tau_tilde, delta, alpha, n, w_matrix, model)


# ---------------------------------------------------------------------------
# Preliminary alpha fit
# ---------------------------------------------------------------------------


def _profile_c(
    rho: np.ndarray, decay: np.ndarray, lags: np.ndarray, tau_tilde: int
) -> np.ndarray:
    """Least-squares c per residue class mod tau_tilde with c(0) = 1."""
    c = np.ones(tau_tilde)
    for j in range(1, tau_tilde):
        mask = lags % tau_tilde == j
        denom = float(np.dot(decay[mask], decay[mask]))
        if denom > 0.0:
            c[j] = float(np.dot(rho[mask], decay[mask])) / denom
    return c


def fit_supgamma_alpha(
    acf: Acf,
    tau_tilde: int,
    delta: Optional[float] = None,
    max_lag: Optional[int] = None,
    alpha_bounds: Tuple[float, float] = (1e-2, 1e3),
    hurst_bounds: Tuple[float, float] = (1.0 + 1e-6, 10.0),
) -> AlphaFit:
    """Least-squares fit of rho(l) = c(l mod tau_tilde) (1 + l delta / alpha)^(1 - H).

    The c values are profiled out per residue class, leaving a search over
    (log alpha, H). Used to fix alpha before mom_supgamma_known_tau.
    """
    if tau_tilde < 1:
        raise DomainError(f"tau_tilde must be >= 1, got {tau_tilde}")
    delta = acf.delta if delta is None else delta
    _check_delta(delta)
    max_lag = acf.max_lag if max_lag is None else min(max_lag, acf.max_lag)
    if max_lag < tau_tilde + 1:
        raise DomainError(f"need autocorrelations up to lag {tau_tilde + 1}, got {max_lag}")
    lags = np.arange(1, max_lag + 1)
    rho = np.array(acf.values[1 : max_lag + 1])
    lo_a, hi_a = alpha_bounds
    lo_h, hi_h = hurst_bounds

    def loss(x: np.ndarray) -> float:
        alpha = math.exp(min(max(x[0], math.log(lo_a)), math.log(hi_a)))
        hurst = min(max(x[1], lo_h), hi_h)
        decay = np.exp((hurst - 1.0) * _phi(SUPGAMMA, lags, delta, alpha))
        c = _profile_c(rho, decay, lags, tau_tilde)
        resid = rho - c[lags % tau_tilde] * decay
        return float(np.dot(resid, resid))

    best: Optional[optimize.OptimizeResult] = None
    for start_alpha in (0.5, 2.0, 8.0):
        start = np.array([math.log(start_alpha), 1.5])
        res = optimize.minimize(
            loss,
            start,
            method="Nelder-Mead",
            bounds=[(math.log(lo_a), math.log(hi_a)), (lo_h, hi_h)],
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res
    assert best is not None
    alpha = math.exp(float(best.x[0]))
    hurst = float(best.x[1])
    decay = np.exp((hurst - 1.0) * _phi(SUPGAMMA, lags, delta, alpha))
    c = _profile_c(rho, decay, lags, tau_tilde)
    logger.info("preliminary supGamma fit: alpha=%.4g H=%.4g", alpha, hurst)
    return AlphaFit(alpha=alpha, hurst=hurst, c=tuple(float(v) for v in c), loss=float(best.fun))


def finite_difference_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x: Sequence[float], rel_step: float = 1e-6
) -> np.ndarray:
    """Central differences with step rel_step * max(1, |x_j|)."""
    x = np.asarray(x, dtype=float)
    columns = []
    for j in range(x.size):
        step = rel_step * max(1.0, abs(x[j]))
        up, down = x.copy(), x.copy()
        up[j] += step
        down[j] -= step
        columns.append((np.asarray(f(up)) - np.asarray(f(down))) / (2.0 * step))
    return np.column_stack(columns)
