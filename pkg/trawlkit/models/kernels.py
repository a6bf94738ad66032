# trawlkit/models/kernels.py
#
# Trawl functions g, periodic kernels p and the correlation factor c.
#
# Notes:
# - Closed forms are used for the exponential and supGamma trawls; the
#   tabulated trawl and every product with a general p go through
#   core.quadrature.
# - Periodic kernels reduce their argument modulo the period in long double
#   before evaluating.
# - TabulatedC stores the correlation factor itself on the lag grid; it can
#   drive correlations and fitted-ACF overlays but carries no kernel for
#   simulation or raw moments.

import math
from typing import Callable, ClassVar, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import optimize

from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.core.quadrature import finite_integral, semi_infinite_integral, tail_integral
from trawlkit.models.levy import build_model, parse_numbers, split_call

ArrayLike = Union[float, np.ndarray]

# Window for direct quadrature of oscillating integrands, in periods.
MAX_WINDOW_PERIODS = 400
# Relative tail mass beyond which integrands with general p are not resolved
# piecewise any more.
WINDOW_TAIL_FRACTION = 1e-13


class MemoryClass:
    SHORT = "short"
    LONG = "long"


# ---------------------------------------------------------------------------
# Trawl functions
# ---------------------------------------------------------------------------


class TrawlFunction(BaseModel):
    """Monotonically decreasing, nonnegative trawl function g on [0, inf)."""

    model_config = ConfigDict(frozen=True)

    kind: ClassVar[str] = "trawl"

    def __call__(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def _closed_integral(self, lo: float, hi: float) -> Optional[float]:
        return None

    @property
    def support_end(self) -> float:
        return math.inf

    @property
    def knots(self) -> Tuple[float, ...]:
        return ()

    def integral(self, lo: float, hi: float = math.inf) -> float:
        """int_lo^hi g(u) du."""
        if lo < 0 or math.isnan(lo) or math.isnan(hi):
            raise DomainError(f"integration bounds must satisfy 0 <= lo, got lo={lo}")
        if hi < lo:
            raise DomainError(f"upper bound {hi} below lower bound {lo}")
        if hi == lo:
            return 0.0
        closed = self._closed_integral(lo, hi)
        if closed is not None:
            return closed
        hi = min(hi, self.support_end)
        if hi <= lo:
            return 0.0
        if math.isinf(hi):
            return tail_integral(lambda u: float(self(u)), lo)
        return finite_integral(lambda u: float(self(u)), lo, hi, points=self.knots)

    @property
    def total_mass(self) -> float:
        return self.integral(0.0, math.inf)

    def tail_first_moment(self, lo: float = 0.0) -> float:
        """int_lo^inf u g(u) du (infinite when the first moment diverges)."""
        end = self.support_end
        if lo >= end:
            return 0.0
        if math.isinf(end):
            return tail_integral(lambda u: u * float(self(u)), lo)
        return finite_integral(lambda u: u * float(self(u)), lo, end, points=self.knots)

    def mass_quantile(self, fraction: float) -> float:
        """T with int_T^inf g = fraction * int_0^inf g."""
        if not 0.0 < fraction <= 1.0:
            raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
        total = self.total_mass
        if total == 0.0 or fraction == 1.0:
            return 0.0
        target = fraction * total
        upper = 1.0
        while self.integral(upper) > target:
            upper *= 2.0
            if upper > 1e12:
                raise DomainError("tail mass decays too slowly to locate the quantile")
        return float(optimize.brentq(lambda t: self.integral(t) - target, 0.0, upper, xtol=1e-12))

    @property
    def acov_summable(self) -> bool:
        """Whether sum_j |gamma(j delta)| is finite for every delta."""
        return True

    @property
    def acov_square_summable(self) -> bool:
        return True

    @property
    def memory_class(self) -> str:
        return MemoryClass.SHORT if self.acov_summable else MemoryClass.LONG

    def describe(self) -> str:
        raise NotImplementedError


class Exponential(TrawlFunction):
    """g(x) = exp(-lam x)."""

    kind: ClassVar[str] = "exp"

    lam: float = Field(gt=0.0)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return np.exp(-self.lam * np.asarray(x, dtype=float))

    def _closed_integral(self, lo: float, hi: float) -> Optional[float]:
        upper = 0.0 if math.isinf(hi) else math.exp(-self.lam * hi)
        return (math.exp(-self.lam * lo) - upper) / self.lam

    def tail_first_moment(self, lo: float = 0.0) -> float:
        lam = self.lam
        return math.exp(-lam * lo) * (lo / lam + 1.0 / lam**2)

    def mass_quantile(self, fraction: float) -> float:
        if not 0.0 < fraction <= 1.0:
            raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
        return -math.log(fraction) / self.lam

    def describe(self) -> str:
        return f"exp({self.lam:g})"


class SupGamma(TrawlFunction):
    """g(x) = (1 + x/alpha)^(-H); long memory for H in (1, 2]."""

    kind: ClassVar[str] = "supgamma"

    alpha: float = Field(gt=0.0)
    H: float = Field(gt=0.0)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return np.power(1.0 + np.asarray(x, dtype=float) / self.alpha, -self.H)

    def _closed_integral(self, lo: float, hi: float) -> Optional[float]:
        alpha, H = self.alpha, self.H
        if math.isinf(hi):
            if H <= 1.0:
                raise DomainError(f"supGamma tail diverges for H={H} <= 1")
            upper = 0.0
        elif H == 1.0:
            return alpha * (math.log(hi + alpha) - math.log(lo + alpha))
        else:
            upper = (hi + alpha) ** (1.0 - H)
        return alpha**H / (H - 1.0) * ((lo + alpha) ** (1.0 - H) - upper)

    def tail_first_moment(self, lo: float = 0.0) -> float:
        alpha, H = self.alpha, self.H
        if H <= 2.0:
            return math.inf
        v = lo + alpha
        return alpha**H * (v ** (2.0 - H) / (H - 2.0) - alpha * v ** (1.0 - H) / (H - 1.0))

    def mass_quantile(self, fraction: float) -> float:
        if not 0.0 < fraction <= 1.0:
            raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
        if self.H <= 1.0:
            raise DomainError(f"supGamma tail diverges for H={self.H} <= 1")
        return self.alpha * (fraction ** (1.0 / (1.0 - self.H)) - 1.0)

    @property
    def acov_summable(self) -> bool:
        return self.H > 2.0

    @property
    def acov_square_summable(self) -> bool:
        return self.H > 1.5

    def describe(self) -> str:
        return f"supgamma({self.alpha:g},{self.H:g})"


class NumericMonotone(TrawlFunction):
    """Piecewise-linear g through tabulated points, zero after the last one."""

    kind: ClassVar[str] = "numeric"

    xs: Tuple[float, ...]
    gs: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_table(self) -> "NumericMonotone":
        xs, gs = np.asarray(self.xs), np.asarray(self.gs)
        if xs.size < 2 or xs.size != gs.size:
            raise ValueError("need at least two (x, g) pairs of equal length")
        if xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
            raise ValueError("x grid must start at 0 and increase strictly")
        if np.any(gs < 0) or np.any(np.diff(gs) > 0):
            raise ValueError("tabulated g must be nonnegative and nonincreasing")
        if gs[-1] != 0.0:
            raise ValueError("last tabulated g value must be 0 (finite support)")
        return self

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return np.interp(np.asarray(x, dtype=float), self.xs, self.gs, right=0.0)

    @property
    def support_end(self) -> float:
        return float(self.xs[-1])

    @property
    def knots(self) -> Tuple[float, ...]:
        return self.xs

    def describe(self) -> str:
        return f"numeric({len(self.xs)} points)"


# ---------------------------------------------------------------------------
# Periodic kernels
# ---------------------------------------------------------------------------


def _reduce(x: ArrayLike, period: float) -> np.ndarray:
    """x mod period computed in extended precision."""
    wide = np.asarray(x, dtype=np.longdouble)
    return np.asarray(np.fmod(wide, np.longdouble(period)), dtype=float)


class PeriodicFunction(BaseModel):
    """Continuous, bounded tau-periodic kernel p."""

    model_config = ConfigDict(frozen=True)

    kind: ClassVar[str] = "periodic"
    has_kernel: ClassVar[bool] = True

    @property
    def period(self) -> float:
        raise NotImplementedError

    def __call__(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    @property
    def sup_norm(self) -> float:
        raise NotImplementedError

    @property
    def is_one(self) -> bool:
        return False

    def describe(self) -> str:
        raise NotImplementedError


class One(PeriodicFunction):
    """p = 1; any period is admissible, 1 is reported."""

    kind: ClassVar[str] = "one"

    @property
    def period(self) -> float:
        return 1.0

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return np.ones_like(np.asarray(x, dtype=float))

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def is_one(self) -> bool:
        return True

    def describe(self) -> str:
        return "one"


class Sine(PeriodicFunction):
    """p(x) = sin(2 pi x / tau)."""

    kind: ClassVar[str] = "sine"

    tau: float = Field(gt=0.0)

    @property
    def period(self) -> float:
        return self.tau

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return np.sin(2.0 * np.pi * _reduce(x, self.tau) / self.tau)

    @property
    def sup_norm(self) -> float:
        return 1.0

    def describe(self) -> str:
        return f"sine({self.tau:g})"


class FourierFinite(PeriodicFunction):
    """p(x) = a0 + sum_k a_k cos(2 pi k x / tau) + b_k sin(2 pi k x / tau).

    ``coefficients`` is (a1, b1, a2, b2, ...); an odd-length tuple carries a
    leading constant a0.
    """

    kind: ClassVar[str] = "fourier"

    tau: float = Field(gt=0.0)
    coefficients: Tuple[float, ...] = Field(min_length=1)

    @property
    def period(self) -> float:
        return self.tau

    def _split(self) -> Tuple[float, np.ndarray, np.ndarray]:
        coeffs = self.coefficients
        a0 = 0.0
        if len(coeffs) % 2 == 1:
            a0, coeffs = coeffs[0], coeffs[1:]
        pairs = np.asarray(coeffs, dtype=float).reshape(-1, 2)
        return a0, pairs[:, 0], pairs[:, 1]

    def __call__(self, x: ArrayLike) -> ArrayLike:
        a0, a, b = self._split()
        r = _reduce(x, self.tau)
        phase = 2.0 * np.pi * np.multiply.outer(r, np.arange(1, a.size + 1)) / self.tau
        return a0 + np.cos(phase) @ a + np.sin(phase) @ b

    @property
    def sup_norm(self) -> float:
        a0, a, b = self._split()
        return abs(a0) + float(np.sum(np.hypot(a, b)))

    def describe(self) -> str:
        return f"fourier({self.tau:g};{len(self.coefficients)} coefficients)"


class TabulatedC(PeriodicFunction):
    """Correlation factor c(l delta), l = 0..len(values)-1, with period len(values)*delta.

    Values between grid points are interpolated linearly (wrapping around the
    period) for display only.
    """

    kind: ClassVar[str] = "tabc"
    has_kernel: ClassVar[bool] = False

    delta: float = Field(gt=0.0)
    values: Tuple[float, ...] = Field(min_length=1)

    @property
    def period(self) -> float:
        return self.delta * len(self.values)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        grid = np.arange(len(self.values) + 1) * self.delta
        table = np.append(self.values, self.values[0])
        return np.interp(_reduce(x, self.period), grid, table)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def describe(self) -> str:
        return f"tabc({self.delta:g};{','.join(f'{v:g}' for v in self.values)})"


# ---------------------------------------------------------------------------
# Integrals mixing g and p
# ---------------------------------------------------------------------------


def eval_p(p: PeriodicFunction, x: ArrayLike) -> ArrayLike:
    """p(x) for x >= 0."""
    out = p(x)
    if np.ndim(out) == 0:
        return float(out)
    return out


def trawl_integral(g: TrawlFunction, lo: float, hi: float = math.inf) -> float:
    """int_lo^hi g(u) du."""
    return g.integral(lo, hi)


def _window(g: TrawlFunction, lo: float, period: float) -> float:
    end = g.support_end
    if math.isfinite(end):
        return max(end - lo, 0.0)
    try:
        horizon = g.mass_quantile(WINDOW_TAIL_FRACTION)
    except DomainError:
        horizon = math.inf
    return max(min(horizon, MAX_WINDOW_PERIODS * period) - lo, 0.0)


def weighted_trawl_integral(
    g: TrawlFunction,
    weight: Callable[[float], float],
    lo: float = 0.0,
    shift: float = 0.0,
    period: float = 1.0,
) -> float:
    """int_lo^inf weight(u) g(u + shift) du for a bounded periodic ``weight``.

    The window where g carries mass is cut into half-period chunks; the rest
    goes through the tail map.
    """

    def integrand(u: float) -> float:
        return float(weight(u)) * float(g(u + shift))

    end = g.support_end - shift
    if math.isfinite(end):
        if end <= lo:
            return 0.0
        knots = [k - shift for k in g.knots]
        return finite_integral(integrand, lo, end, points=knots)
    window = _window(g, lo + shift, period)
    return semi_infinite_integral(integrand, lo, window=window, chunk=0.5 * period)


def kernel_product_integral(
    g: TrawlFunction, p: PeriodicFunction, t: float, closed_form: bool = True
) -> float:
    """int_0^inf p(u) p(t+u) g(t+u) du."""
    if t < 0:
        raise DomainError(f"lag must be >= 0, got {t}")
    _require_kernel(p)
    if p.is_one and closed_form:
        return g.integral(t)
    if closed_form and isinstance(p, Sine) and isinstance(g, Exponential):
        return exp_sine_kernel_product(g.lam, p.tau, t)

    def weight(u: float) -> float:
        return float(p(u)) * float(p(t + u))

    return weighted_trawl_integral(g, weight, shift=t, period=p.period)


def exp_sine_kernel_product(lam: float, tau: float, t: float) -> float:
    """Closed form of int_0^inf p(u) p(t+u) g(t+u) du for exp(lam) with sine(tau)."""
    phase = 2.0 * math.pi * t / tau
    numer = math.sin(phase) * tau * lam + 4.0 * math.pi * math.cos(phase)
    return (
        2.0
        * math.pi
        * math.exp(-lam * t)
        * numer
        / (lam * (lam**2 * tau**2 + 16.0 * math.pi**2))
    )


def exp_sine_c(lam: float, tau: float, t: float) -> float:
    """c(t) = (sin(2 pi t/tau) tau lam + 4 pi cos(2 pi t/tau)) / (4 pi)."""
    phase = 2.0 * math.pi * t / tau
    return (math.sin(phase) * tau * lam + 4.0 * math.pi * math.cos(phase)) / (4.0 * math.pi)


def kernel_tail_integral(
    g: TrawlFunction,
    p: PeriodicFunction,
    r: float = 0.0,
    transform: str = "identity",
    closed_form: bool = True,
) -> float:
    """int_r^inf T(p(u)) g(u) du with T one of identity, square, abs."""
    if r < 0:
        raise DomainError(f"lower bound must be >= 0, got {r}")
    if transform not in ("identity", "square", "abs"):
        raise ConfigurationError(f"unknown kernel transform '{transform}'")
    _require_kernel(p)
    if p.is_one and closed_form:
        return g.integral(r)
    if closed_form and transform != "abs" and isinstance(p, Sine) and isinstance(g, Exponential):
        lam, omega = g.lam, 2.0 * math.pi / p.tau
        decay = math.exp(-lam * r)
        if transform == "identity":
            return decay * (lam * math.sin(omega * r) + omega * math.cos(omega * r)) / (
                lam**2 + omega**2
            )
        b = 2.0 * omega
        cosine_part = decay * (lam * math.cos(b * r) - b * math.sin(b * r)) / (lam**2 + b**2)
        return 0.5 * (decay / lam - cosine_part)

    if transform == "identity":

        def weight(u: float) -> float:
            return float(p(u))

    elif transform == "square":

        def weight(u: float) -> float:
            return float(p(u)) ** 2

    else:

        def weight(u: float) -> float:
            return abs(float(p(u)))

    return weighted_trawl_integral(g, weight, lo=r, period=p.period)


def _require_kernel(p: PeriodicFunction) -> None:
    if not p.has_kernel:
        raise ConfigurationError(
            f"{p.describe()} tabulates a correlation factor and has no kernel p"
        )


def correlation_factor_c(
    g: TrawlFunction, p: PeriodicFunction, t: float, closed_form: bool = True
) -> float:
    """Periodic factor c(t) in Cor(Y_0, Y_t) = c(t) int_t^inf g / int_0^inf g."""
    if t < 0:
        raise DomainError(f"lag must be >= 0, got {t}")
    if not p.has_kernel:
        return float(p(t))
    if p.is_one:
        return 1.0
    if closed_form and isinstance(p, Sine) and isinstance(g, Exponential):
        return exp_sine_c(g.lam, p.tau, t)

    variance_integral = kernel_product_integral(g, p, 0.0, closed_form=closed_form)
    tail = g.integral(t)
    if variance_integral == 0.0 or tail == 0.0:
        raise DomainError("correlation factor undefined: degenerate kernel or exhausted trawl")
    ratio = kernel_product_integral(g, p, t, closed_form=closed_form) / variance_integral
    return ratio * g.total_mass / tail


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_trawl(text: str) -> TrawlFunction:
    """``exp(lambda)``, ``supgamma(alpha,H)`` or ``numeric(x0,x1,...;g0,g1,...)``."""
    name, args = split_call(text)
    if name in ("exp", "exponential"):
        values = parse_numbers(args)
        _expect(name, values, 1)
        model = build_model(Exponential, lam=values[0])
    elif name == "supgamma":
        values = parse_numbers(args)
        _expect(name, values, 2)
        model = build_model(SupGamma, alpha=values[0], H=values[1])
    elif name == "numeric":
        xs, gs = _two_lists(name, args)
        model = build_model(NumericMonotone, xs=xs, gs=gs)
    else:
        raise ConfigurationError(f"unsupported trawl function '{name}'")
    assert isinstance(model, TrawlFunction)
    return model


def parse_periodic(text: str) -> PeriodicFunction:
    """``one``, ``sine(tau)``, ``fourier(tau;a1,b1,...)`` or ``tabc(delta;c0,c1,...)``."""
    name, args = split_call(text)
    if name == "one":
        if args:
            raise ConfigurationError("'one' takes no parameters")
        return One()
    if name == "sine":
        values = parse_numbers(args)
        _expect(name, values, 1)
        model = build_model(Sine, tau=values[0])
    elif name == "fourier":
        head, tail = _two_lists(name, args)
        _expect(name, head, 1)
        model = build_model(FourierFinite, tau=head[0], coefficients=tail)
    elif name == "tabc":
        head, tail = _two_lists(name, args)
        _expect(name, head, 1)
        model = build_model(TabulatedC, delta=head[0], values=tail)
    else:
        raise ConfigurationError(f"unsupported periodic function '{name}'")
    assert isinstance(model, PeriodicFunction)
    return model


def _expect(name: str, values: Sequence[float], count: int) -> None:
    if len(values) != count:
        raise ConfigurationError(f"{name} expects {count} parameter(s), got {len(values)}")


def _two_lists(name: str, args: str) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    if args.count(";") != 1:
        raise ConfigurationError(f"{name} expects two ';'-separated lists")
    left, right = args.split(";")
    return parse_numbers(left), parse_numbers(right)
