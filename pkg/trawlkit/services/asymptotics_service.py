# trawlkit/services/asymptotics_service.py
#
# Asymptotic covariances of the sample mean, sample autocovariances and
# sample autocorrelations, assumption diagnostics and weak-dependence
# coefficients.
#
# Notes:
# - Series over lags are truncated at a lag J chosen from the decay of g:
#   sum_{l >= J} |gamma(l delta)| <= kappa2 sup|p|^2 S(J) with
#   S(J) = (int_a^inf u g - a int_a^inf g) / delta, a = (J - 1) delta.
#   The achieved relative tolerance is reported with every result.
# - The fourth-cumulant term collapses the x-integral of four trawl indicators
#   to g at the largest time argument and is evaluated with Gauss-Legendre
#   nodes on [0, delta].
# - v is the limit for the uncentered gamma*_n. With mu = E(Y) != 0 it adds
#   2 mu (C_p + C_q) + 4 mu^2 V_delta to the mean-zero formula, where C_p sums
#   third joint cumulants. w is the Bartlett combination of the mean-zero
#   part, the limit of rho_n for any seed and of rho*_n when mu = 0.
# - Long-memory inputs raise AssumptionViolationError.

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from trawlkit.core.errors import (
    AssumptionViolationError,
    DomainError,
    UnsupportedMomentError,
)
from trawlkit.core.quadrature import finite_integral, gauss_legendre, tail_integral
from trawlkit.models import (
    AsymptoticCovariances,
    CltDiagnostics,
    Exponential,
    ModelSpec,
    Sine,
    SupGamma,
    TrawlFunction,
)
from trawlkit.models.kernels import kernel_tail_integral
from trawlkit.services.moment_service import MomentService

logger = logging.getLogger(__name__)

SERIES_TOLERANCE = 1e-10
G_TERM_TOLERANCE = 1e-8
MAX_LAG_CLOSED_FORM = 20000
MAX_LAG_QUADRATURE = 2000
GAUSS_ORDER = 32

# Cephes Euler-Maclaurin coefficients (2k)! / B_2k
_EM_COEFFS = (
    12.0,
    -720.0,
    30240.0,
    -1209600.0,
    47900160.0,
    -1.8924375803183791606e9,
    7.47242496e10,
    -2.950130727918164224e12,
    1.1646782814350067249e14,
    -4.5979787224074726105e15,
    1.8152105401943546773e17,
    -7.1661652561756670113e18,
)
_MACHEP = 1.11022302462515654042e-16


def hurwitz_zeta(s: float, a: float) -> float:
    """zeta(s, a) = sum_{k>=0} (k + a)^-s for s > 1, a > 0 (Euler-Maclaurin)."""
    if not s > 1.0:
        raise DomainError(f"Hurwitz zeta needs s > 1, got s={s}")
    if not a > 0.0:
        raise DomainError(f"Hurwitz zeta needs a > 0, got a={a}")

    total = a**-s
    q = a
    i = 0
    term = 0.0
    while i < 9 or q <= 9.0:
        i += 1
        q += 1.0
        term = q**-s
        total += term
        if abs(term / total) < _MACHEP:
            return total

    w = q
    total += term * w / (s - 1.0)
    total -= 0.5 * term
    factor = 1.0
    k = 0.0
    for coeff in _EM_COEFFS:
        factor *= s + k
        term /= w
        correction = factor * term / coeff
        total += correction
        if abs(correction / total) < _MACHEP:
            break
        k += 1.0
        factor *= s + k
        term /= w
        k += 1.0
    return total


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------


def _tail_sum_bound(g: TrawlFunction, delta: float, lag: int) -> float:
    """Upper bound for sum_{l >= lag} int_{l delta}^inf g."""
    a = max(lag - 1, 0) * delta
    first = g.tail_first_moment(a)
    if not math.isfinite(first):
        return math.inf
    return max(first - a * g.integral(a), 0.0) / delta


def _uses_closed_form(model: ModelSpec) -> bool:
    return model.p.is_one or (isinstance(model.p, Sine) and isinstance(model.g, Exponential))


def _lag_cap(model: ModelSpec) -> int:
    return MAX_LAG_CLOSED_FORM if _uses_closed_form(model) else MAX_LAG_QUADRATURE


def _choose_lag(
    bound: Callable[[int], float], scale: float, tolerance: float, cap: int
) -> Tuple[int, float]:
    """Smallest power-of-two lag J with bound(J) <= tolerance * scale, capped."""
    lag = 8
    while lag < cap and bound(lag) > tolerance * abs(scale):
        lag *= 2
    lag = min(lag, cap)
    achieved = bound(lag) / abs(scale) if scale else math.inf
    if achieved > tolerance:
        logger.warning(
            "series truncated at lag %d with relative tolerance %.2e (target %.0e)",
            lag,
            achieved,
            tolerance,
        )
    return lag, achieved


def _require_short_memory(model: ModelSpec) -> None:
    if not model.g.acov_summable:
        raise AssumptionViolationError(
            f"{model.g.describe()} has long memory: sum |gamma(j delta)| diverges"
        )


def _acov_lags(model: ModelSpec, delta: float, count: int) -> np.ndarray:
    """gamma(l delta), l = 0..count-1."""
    service = MomentService(model)
    return np.array([service.acov(l * delta) for l in range(count)])


# ---------------------------------------------------------------------------
# Sample mean
# ---------------------------------------------------------------------------


def sample_mean_series(model: ModelSpec, delta: Optional[float] = None) -> Tuple[float, int, float]:
    """(V_delta, truncation lag, achieved tolerance) from the truncated series."""
    delta = model.delta if delta is None else delta
    _require_short_memory(model)
    kappa2 = model.seed.variance()
    sup_sq = model.p.sup_norm**2
    gamma0 = MomentService(model).variance()

    def bound(lag: int) -> float:
        return 2.0 * kappa2 * sup_sq * _tail_sum_bound(model.g, delta, lag + 1)

    lag, achieved = _choose_lag(bound, gamma0, 1e-8, _lag_cap(model))
    gam = _acov_lags(model, delta, lag + 1)
    value = math.fsum([gam[0], *(2.0 * gam[1:])])
    return value, lag, achieved


def sample_mean_variance(model: ModelSpec, delta: Optional[float] = None) -> float:
    """V_delta = sum_{j in Z} gamma(j delta)."""
    delta = model.delta if delta is None else delta
    _require_short_memory(model)
    kappa2 = model.seed.variance()
    g = model.g
    if model.p.is_one and isinstance(g, Exponential):
        x = g.lam * delta
        return kappa2 * (2.0 + math.expm1(x)) / (g.lam * math.expm1(x))
    if model.p.is_one and isinstance(g, SupGamma):
        alpha, H = g.alpha, g.H
        zeta = hurwitz_zeta(H - 1.0, alpha / delta)
        return kappa2 * alpha / (H - 1.0) * (2.0 * (alpha / delta) ** (H - 1.0) * zeta - 1.0)
    value, _, _ = sample_mean_series(model, delta)
    return value


# ---------------------------------------------------------------------------
# Autocovariance and autocorrelation limits
# ---------------------------------------------------------------------------


def g_term_matrix(model: ModelSpec, h: int, lag: int, delta: Optional[float] = None) -> np.ndarray:
    """(int G_p G_q dx du)_{p,q=0..h} truncated at time index ``lag``.

    G_p(x, u) = sum_j f(x, u + j delta) f(x, u + (j+p) delta) with
    f(x, s) = p(s) 1(0 < x < g(s)). For each largest index M the pairs (j, k)
    split into those with j + p = M and those with k + q = M, j + p < M, which
    turns the double sum into cumulative sums over M.
    """
    delta = model.delta if delta is None else delta
    nodes, weights = gauss_legendre(0.0, delta, GAUSS_ORDER)
    size = lag + h + 1
    grid = np.arange(size)[:, None] * delta + nodes[None, :]
    p_grid = np.asarray(model.p(grid), dtype=float)
    g_grid = np.asarray(model.g(grid), dtype=float)

    padded: List[np.ndarray] = []
    cumulative: List[np.ndarray] = []
    for shift in range(h + 1):
        pairs = p_grid[: lag + 1] * p_grid[shift : shift + lag + 1]
        column = np.zeros((size, nodes.size))
        column[shift : shift + lag + 1] = pairs
        padded.append(column)
        cumulative.append(np.cumsum(column, axis=0))

    result = np.zeros((h + 1, h + 1))
    for p_idx in range(h + 1):
        for q_idx in range(p_idx, h + 1):
            below_p = np.vstack([np.zeros((1, nodes.size)), cumulative[p_idx][:-1]])
            inner = padded[p_idx] * cumulative[q_idx] + padded[q_idx] * below_p
            value = float(np.sum(g_grid * inner, axis=0) @ weights)
            result[p_idx, q_idx] = result[q_idx, p_idx] = value
    return result


def third_cumulant_sums(
    model: ModelSpec, h: int, lag: int, delta: Optional[float] = None
) -> np.ndarray:
    """C_p = sum_{l in Z} cum(Y_0, Y_{p delta}, Y_{l delta}) / kappa3, p = 0..h.

    With P_M = p(u + M delta) and G_M = g(u + M delta) on u in [0, delta)
    this is int sum_j P_j P_{j+p} (G_{j+p} sum_{m <= j+p} P_m
    + sum_{m > j+p} P_m G_m) du, truncated at time index ``lag``.
    """
    delta = model.delta if delta is None else delta
    nodes, weights = gauss_legendre(0.0, delta, GAUSS_ORDER)
    size = lag + h + 1
    grid = np.arange(size)[:, None] * delta + nodes[None, :]
    p_grid = np.asarray(model.p(grid), dtype=float)
    g_grid = np.asarray(model.g(grid), dtype=float)

    below = np.cumsum(p_grid, axis=0)
    weighted = p_grid * g_grid
    above = np.cumsum(weighted[::-1], axis=0)[::-1] - weighted
    inner = g_grid * below + above

    out = np.empty(h + 1)
    for shift in range(h + 1):
        pairs = p_grid[: lag + 1] * p_grid[shift : shift + lag + 1]
        out[shift] = float(np.sum(pairs * inner[shift : shift + lag + 1], axis=0) @ weights)
    return out


def _series_terms(gam: np.ndarray, h: int, lag: int) -> np.ndarray:
    """sum_{|l| <= lag} gamma(l) gamma(l+p-q) + gamma(l-q) gamma(l+p), p, q = 0..h."""
    ls = np.arange(-lag, lag + 1)

    def at(offsets: np.ndarray) -> np.ndarray:
        return gam[np.abs(offsets)]

    out = np.zeros((h + 1, h + 1))
    for p in range(h + 1):
        for q in range(p, h + 1):
            terms = at(ls) * at(ls + p - q) + at(ls - q) * at(ls + p)
            out[p, q] = out[q, p] = math.fsum(terms)
    return out


def _fourth_cumulant(model: ModelSpec) -> float:
    if not model.seed.has_fourth_moment:
        raise AssumptionViolationError(f"{model.seed.describe()} has no finite fourth moment")
    try:
        return model.seed.cumulants_1_to_4()[3]
    except UnsupportedMomentError as exc:
        raise AssumptionViolationError(str(exc)) from exc


def _limit_ingredients(
    model: ModelSpec, h: int, delta: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, float]:
    """(gamma lags, series matrix, kappa4 * G matrix, mean terms, J, tolerance)."""
    if h < 0:
        raise DomainError(f"lag count must be >= 0, got {h}")
    _require_short_memory(model)
    if not model.g.acov_square_summable:
        raise AssumptionViolationError(f"{model.g.describe()}: sum gamma^2 diverges")
    kappa4 = _fourth_cumulant(model)
    _, kappa2, kappa3, _ = model.seed.cumulants_1_to_4()
    mu = MomentService(model).mean()
    third = kappa3 != 0.0 and mu != 0.0
    sup = model.p.sup_norm
    gamma0 = MomentService(model).variance()
    if gamma0 == 0.0:
        raise DomainError("kernel is almost everywhere zero")

    def series_bound(lag: int) -> float:
        return 4.0 * gamma0 * kappa2 * sup**2 * _tail_sum_bound(model.g, delta, max(lag - h, 1))

    def g_bound(lag: int) -> float:
        scale = abs(kappa4) * sup**4 + (abs(mu * kappa3) * sup**3 if third else 0.0)
        if scale == 0.0:
            return 0.0
        first = model.g.tail_first_moment(lag * delta)
        if not math.isfinite(first):
            return math.inf
        tail = first / delta + model.g.integral(lag * delta)
        return 2.0 * scale * tail / delta

    cap = _lag_cap(model)
    lag_s, tol_s = _choose_lag(series_bound, gamma0**2, SERIES_TOLERANCE, cap)
    lag_g, tol_g = _choose_lag(g_bound, gamma0**2, G_TERM_TOLERANCE, MAX_LAG_CLOSED_FORM)
    lag = max(lag_s, lag_g if kappa4 != 0.0 or third else 0)
    logger.debug("limit matrices: h=%d truncation lag=%d", h, lag)

    gam = _acov_lags(model, delta, lag + h + 1)
    series = _series_terms(gam, h, lag)
    if kappa4 != 0.0:
        g_part = kappa4 * g_term_matrix(model, h, lag_g, delta)
    else:
        g_part = np.zeros((h + 1, h + 1))

    mean_part = np.zeros((h + 1, h + 1))
    if mu != 0.0:
        mean_part += 4.0 * mu**2 * sample_mean_variance(model, delta)
        if third:
            sums = 2.0 * mu * kappa3 * third_cumulant_sums(model, h, lag_g, delta)
            mean_part += sums[:, None] + sums[None, :]
    return gam, series, g_part, mean_part, lag, max(tol_s, tol_g)


def acov_limit_matrix(model: ModelSpec, h: int, delta: Optional[float] = None) -> np.ndarray:
    """v_{pq} = lim n Cov(gamma*_n(p delta), gamma*_n(q delta)), p, q = 0..h."""
    return acov_limit_covariances(model, h, delta).v_matrix


def _bartlett(v: np.ndarray, gam: np.ndarray, h: int) -> np.ndarray:
    rho = gam[: h + 1] / gam[0]
    w = np.empty((h, h))
    for p in range(1, h + 1):
        for q in range(1, h + 1):
            w[p - 1, q - 1] = (
                v[p, q] - rho[p] * v[0, q] - rho[q] * v[p, 0] + rho[p] * rho[q] * v[0, 0]
            ) / gam[0] ** 2
    return 0.5 * (w + w.T)


def acov_limit_covariances(
    model: ModelSpec, h: int, delta: Optional[float] = None
) -> AsymptoticCovariances:
    """V_delta, v and w for lags up to h in one pass."""
    delta = model.delta if delta is None else delta
    gam, series, g_part, mean_part, lag, tolerance = _limit_ingredients(model, h, delta)
    centered = g_part + series
    centered = 0.5 * (centered + centered.T)
    w = _bartlett(centered, gam, h) if h >= 1 else np.zeros((0, 0))
    v = centered + mean_part
    try:
        v_delta: Optional[float] = sample_mean_variance(model, delta)
    except AssumptionViolationError:
        v_delta = None
    return AsymptoticCovariances(
        delta=delta,
        V_delta=v_delta,
        v_matrix=v,
        w_matrix=w,
        truncation_lag=lag,
        achieved_tolerance=tolerance,
    )


def acf_limit_matrix(model: ModelSpec, h: int, delta: Optional[float] = None) -> np.ndarray:
    """w_{pq}, p, q = 1..h, from the Bartlett combination of the mean-zero part of v."""
    if h < 1:
        raise DomainError(f"autocorrelation limits need h >= 1, got {h}")
    return acov_limit_covariances(model, h, delta).w_matrix


def acf_limit_matrix_series(model: ModelSpec, h: int, delta: Optional[float] = None) -> np.ndarray:
    """w_{pq} written directly in autocorrelations (expanded form)."""
    if h < 1:
        raise DomainError(f"autocorrelation limits need h >= 1, got {h}")
    delta = model.delta if delta is None else delta
    gam, _, g_part, _, lag, _ = _limit_ingredients(model, h, delta)
    w = bartlett_series(gam / gam[0], h, lag)
    for p in range(1, h + 1):
        for q in range(1, h + 1):
            rp, rq = gam[p] / gam[0], gam[q] / gam[0]
            w[p - 1, q - 1] += (
                g_part[p, q] - rq * g_part[p, 0] - rp * g_part[0, q] + rp * rq * g_part[0, 0]
            ) / gam[0] ** 2
    return 0.5 * (w + w.T)


def bartlett_series(rho_all: np.ndarray, h: int, lag: int) -> np.ndarray:
    """Bartlett's formula for w_{pq}, p, q = 1..h, from autocorrelations alone.

    ``rho_all[l]`` is rho(l delta) for l = 0..lag + h. This is the whole
    limit when the seed has no fourth cumulant (Gaussian seed).
    """
    rho_all = np.asarray(rho_all, dtype=float)
    if rho_all.size < lag + h + 1:
        raise DomainError(f"need autocorrelations up to lag {lag + h}, got {rho_all.size - 1}")
    ls = np.arange(-lag, lag + 1)

    def rho(offsets: np.ndarray) -> np.ndarray:
        return rho_all[np.abs(offsets)]

    w = np.empty((h, h))
    for p in range(1, h + 1):
        for q in range(1, h + 1):
            rp, rq = rho_all[p], rho_all[q]
            terms = (
                rho(ls + q) * rho(ls + p)
                + rho(ls - q) * rho(ls + p)
                - 2.0 * rho(ls + q) * rho(ls) * rp
                - 2.0 * rho(ls) * rho(ls + p) * rq
                + 2.0 * rp * rq * rho(ls) ** 2
            )
            w[p - 1, q - 1] = math.fsum(terms)
    return 0.5 * (w + w.T)


def w11(model: ModelSpec, delta: Optional[float] = None) -> float:
    """Asymptotic variance of sqrt(n) rho*_n(delta)."""
    return float(acf_limit_matrix(model, 1, delta)[0, 0])


# ---------------------------------------------------------------------------
# Diagnostics and weak dependence
# ---------------------------------------------------------------------------


def check_clt_assumptions(model: ModelSpec, delta: Optional[float] = None) -> CltDiagnostics:
    """Report which of the sample-mean and autocorrelation CLTs apply."""
    delta = model.delta if delta is None else delta
    g = model.g
    summable = g.acov_summable
    square_summable = g.acov_square_summable
    fourth = model.seed.has_fourth_moment
    second = True
    try:
        model.seed.variance()
    except UnsupportedMomentError:
        second = False
    notes = []
    if isinstance(g, SupGamma):
        if not summable:
            notes.append(f"supGamma with H={g.H:g} <= 2 is long memory")
        if not square_summable:
            notes.append(f"supGamma with H={g.H:g} <= 3/2: squared autocovariances not summable")
    if not second:
        notes.append(f"{model.seed.describe()} has no finite variance")
    elif not fourth:
        notes.append(f"{model.seed.describe()} has no finite fourth moment")
    return CltDiagnostics(
        delta=delta,
        sum_abs_acov_finite=summable,
        sum_sq_acov_finite=square_summable,
        fourth_moment=fourth,
        sample_mean_clt=summable and second,
        acf_clt=summable and square_summable and fourth,
        notes=tuple(notes),
    )


def _weak_dependence_branch(model: ModelSpec, branch: str) -> str:
    if branch not in ("auto", "second-order", "finite-variation"):
        raise DomainError(f"unknown weak-dependence branch '{branch}'")
    if branch != "auto":
        return branch
    return "finite-variation" if model.seed.finite_variation else "second-order"


def weak_dependence_theta(model: ModelSpec, r: float, branch: str = "auto") -> float:
    """theta_Y(r) for r >= 0.

    Second-order: (Var(L') int_r^inf p^2 g + E(L')^2 (int_r^inf p g)^2)^(1/2).
    Finite variation: (int |xi| nu(d xi) + |gamma_0|) int_r^inf |p| g.
    """
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    g, p, seed = model.g, model.p, model.seed
    if _weak_dependence_branch(model, branch) == "finite-variation":
        if not seed.finite_variation:
            raise DomainError(f"{seed.describe()} is not of finite variation")
        return (seed.levy_abs_mass() + abs(seed.gamma0())) * kernel_tail_integral(
            g, p, r, "abs"
        )
    kappa1, kappa2 = seed.mean(), seed.variance()
    square = kernel_tail_integral(g, p, r, "square")
    linear = kernel_tail_integral(g, p, r, "identity") if kappa1 != 0.0 else 0.0
    return math.sqrt(max(kappa2 * square + kappa1**2 * linear**2, 0.0))


def weak_dependence_bound(model: ModelSpec, r: float, branch: str = "auto") -> float:
    """Upper bound of theta_Y(r) through the plain trawl tail mass int_r^inf g."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    seed, sup = model.seed, model.p.sup_norm
    tail = model.g.integral(r)
    if _weak_dependence_branch(model, branch) == "finite-variation":
        return (seed.levy_abs_mass() + abs(seed.gamma0())) * sup * tail
    kappa1, kappa2 = seed.mean(), seed.variance()
    return sup * math.sqrt(kappa2 * tail + kappa1**2 * tail**2)


def fourth_moment(model: ModelSpec, times: Sequence[float]) -> float:
    """E prod_{i=1..4} (Y_{t_i} - E Y) from the joint cumulants.

    kappa4 int_0^inf prod_i p(t_i - t_min + u) g(t_max - t_min + u) du plus
    the three pairings of autocovariances.
    """
    ts = np.asarray(times, dtype=float)
    if ts.shape != (4,):
        raise DomainError("fourth_moment needs exactly four time points")
    kappa4 = model.seed.cumulants_1_to_4()[3]
    service = MomentService(model)
    lo, hi = float(ts.min()), float(ts.max())
    offsets = ts - lo

    def integrand(u: float) -> float:
        return float(np.prod(model.p(offsets + u))) * float(model.g(hi - lo + u))

    joint = 0.0
    if kappa4 != 0.0:
        end = model.g.support_end
        if math.isfinite(end):
            joint = finite_integral(integrand, 0.0, max(end - (hi - lo), 0.0))
        else:
            joint = tail_integral(integrand, 0.0)

    def cov(a: float, b: float) -> float:
        return service.acov(abs(a - b))

    t1, t2, t3, t4 = ts
    pairs = cov(t1, t2) * cov(t3, t4) + cov(t1, t3) * cov(t2, t4) + cov(t1, t4) * cov(t2, t3)
    return kappa4 * joint + pairs
