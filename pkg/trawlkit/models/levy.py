# trawlkit/models/levy.py
#
# Homogeneous Levy-basis seeds: characteristic triplets, cumulants and
# samplers for slice-scaled infinitely divisible laws.
#
# Notes:
# - Truncation function is the indicator of [-1, 1]; each family translates
#   its natural parameters into (zeta, a, nu) under that convention.
# - Every family is closed under "law with cumulant s * C(theta; L')", so a
#   slice of Lebesgue measure s is one draw with rescaled parameters.
# - Seeds are frozen pydantic models and are safe to share across threads.

import cmath
import enum
import math
import re
from typing import Callable, ClassVar, Dict, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from trawlkit.core.errors import ConfigurationError, DomainError, UnsupportedMomentError
from trawlkit.core.quadrature import finite_integral, tail_integral
from trawlkit.core.random import RandomStream

ArrayLike = Union[float, np.ndarray]


class LevyFamily(str, enum.Enum):
    """Seed families shipped with trawlkit (config tags in parentheses)."""

    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    GAMMA = "gamma"
    NEGBIN = "negbin"
    CAUCHY = "cauchy"


class LevyTriplet(BaseModel):
    """Characteristic triplet (zeta, a, nu) with nu given as a family tag plus parameters."""

    model_config = ConfigDict(frozen=True)

    zeta: float
    a: float = Field(ge=0.0)
    levy_measure: LevyFamily
    measure_params: Tuple[float, ...] = ()
    finite_variation: bool
    fourth_moment: bool

    def jump_part(self, theta: float) -> complex:
        """int (e^{i theta xi} - 1 - i theta xi 1_{|xi|<=1}) nu(d xi)."""
        family = self.levy_measure
        if family is LevyFamily.GAUSSIAN:
            return 0j
        if family is LevyFamily.POISSON:
            (rate,) = self.measure_params
            return rate * (cmath.exp(1j * theta) - 1.0 - 1j * theta)
        if family is LevyFamily.NEGBIN:
            size, prob = self.measure_params
            q = 1.0 - prob
            total = 0j
            k = 1
            weight = size * q
            while weight > 1e-18 * size or k < 3:
                term = cmath.exp(1j * theta * k) - 1.0
                if k == 1:
                    term -= 1j * theta
                total += weight / k * term
                k += 1
                weight *= q
            return total
        if family is LevyFamily.GAMMA:
            shape, rate = self.measure_params

            def density(xi: float) -> float:
                return shape * math.exp(-rate * xi) / xi

            def re_part(xi: float) -> float:
                return density(xi) * (math.cos(theta * xi) - 1.0)

            def im_inner(xi: float) -> float:
                return density(xi) * (math.sin(theta * xi) - theta * xi)

            def im_outer(xi: float) -> float:
                return density(xi) * math.sin(theta * xi)

            real = finite_integral(re_part, 0.0, 1.0) + tail_integral(re_part, 1.0)
            imag = finite_integral(im_inner, 0.0, 1.0) + tail_integral(im_outer, 1.0)
            return complex(real, imag)
        if family is LevyFamily.CAUCHY:
            # (s/pi) int (cos(theta xi) - 1) xi^-2 d xi over R has this closed form.
            (scale,) = self.measure_params
            return complex(-scale * abs(theta), 0.0)
        raise ConfigurationError(f"unsupported Levy measure '{family}'")

    def cumulant(self, theta: float) -> complex:
        """C(theta; L') assembled from the triplet."""
        return 1j * theta * self.zeta - 0.5 * self.a * theta**2 + self.jump_part(theta)


class LevySeed(BaseModel):
    """Law of L' for a homogeneous Levy basis.

    Subclasses fix the family; ``cumulant`` is the closed form, ``triplet``
    the equivalent characteristic triplet.
    """

    model_config = ConfigDict(frozen=True)

    family: ClassVar[LevyFamily]

    # -- interface implemented per family ---------------------------------
    @property
    def triplet(self) -> LevyTriplet:
        raise NotImplementedError

    def _cumulant(self, theta: float) -> complex:
        raise ConfigurationError(f"unsupported seed {self!r}")

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        raise NotImplementedError

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    # -- shared behaviour --------------------------------------------------
    def cumulant(self, theta: float) -> complex:
        """C(theta; L') = log E exp(i theta L')."""
        if not math.isfinite(theta):
            raise DomainError("theta must be finite")
        return self._cumulant(theta)

    @property
    def has_fourth_moment(self) -> bool:
        return self.triplet.fourth_moment

    @property
    def finite_variation(self) -> bool:
        return self.triplet.finite_variation

    def cumulants_1_to_4(self) -> Tuple[float, float, float, float]:
        """(kappa1, kappa2, kappa3, kappa4) with kappa4 = (eta - 3) kappa2^2."""
        if not self.has_fourth_moment:
            raise UnsupportedMomentError(
                f"{self.describe()} has no finite fourth moment"
            )
        return self._raw_cumulants()

    def mean(self) -> float:
        return self.cumulants_1_to_4()[0]

    def variance(self) -> float:
        return self.cumulants_1_to_4()[1]

    def kurtosis(self) -> float:
        """eta = E(L'^4) / kappa2^2 for a centred seed, i.e. 3 + kappa4 / kappa2^2."""
        _, k2, _, k4 = self.cumulants_1_to_4()
        return 3.0 + k4 / (k2 * k2)

    def levy_abs_mass(self) -> float:
        """int |xi| nu(d xi); infinite for families of infinite variation."""
        raise NotImplementedError

    def gamma0(self) -> float:
        """Drift in the finite-variation representation: zeta - int_{|xi|<=1} xi nu(d xi)."""
        raise NotImplementedError

    def sample_slice(self, leb: float, stream: RandomStream) -> float:
        """One draw from the law with cumulant ``leb * C(theta; L')``."""
        if leb < 0 or not math.isfinite(leb):
            raise DomainError(f"slice measure must be finite and >= 0, got {leb}")
        if leb == 0:
            return 0.0
        return float(self._draw(np.array([leb]), stream.generator)[0])

    def sample_slices(self, leb: ArrayLike, stream: RandomStream) -> np.ndarray:
        """Independent draws, one per entry of ``leb``; zero measure gives exactly 0."""
        return self.draw_slices(leb, stream.generator)

    def draw_slices(self, leb: ArrayLike, generator: np.random.Generator) -> np.ndarray:
        leb = np.asarray(leb, dtype=float)
        if np.any(leb < 0) or not np.all(np.isfinite(leb)):
            raise DomainError("slice measures must be finite and >= 0")
        out = np.zeros(leb.shape, dtype=float)
        positive = leb > 0
        if np.any(positive):
            out[positive] = self._draw(leb[positive], generator)
        return out


class GaussianSeed(LevySeed):
    family: ClassVar[LevyFamily] = LevyFamily.GAUSSIAN

    mu: float = 0.0
    sigma2: float = Field(default=1.0, gt=0.0)

    @property
    def triplet(self) -> LevyTriplet:
        return LevyTriplet(
            zeta=self.mu,
            a=self.sigma2,
            levy_measure=self.family,
            finite_variation=False,
            fourth_moment=True,
        )

    def _cumulant(self, theta: float) -> complex:
        return complex(-0.5 * self.sigma2 * theta**2, self.mu * theta)

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        return (self.mu, self.sigma2, 0.0, 0.0)

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        return generator.normal(loc=self.mu * leb, scale=np.sqrt(self.sigma2 * leb))

    def levy_abs_mass(self) -> float:
        return 0.0

    def gamma0(self) -> float:
        return self.mu

    def describe(self) -> str:
        return f"gaussian({self.mu:g},{self.sigma2:g})"


class PoissonSeed(LevySeed):
    family: ClassVar[LevyFamily] = LevyFamily.POISSON

    rate: float = Field(gt=0.0)

    @property
    def triplet(self) -> LevyTriplet:
        # Unit jumps sit inside [-1, 1], so zeta = rate cancels the compensator.
        return LevyTriplet(
            zeta=self.rate,
            a=0.0,
            levy_measure=self.family,
            measure_params=(self.rate,),
            finite_variation=True,
            fourth_moment=True,
        )

    def _cumulant(self, theta: float) -> complex:
        return self.rate * (cmath.exp(1j * theta) - 1.0)

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        r = self.rate
        return (r, r, r, r)

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        return generator.poisson(self.rate * leb).astype(float)

    def levy_abs_mass(self) -> float:
        return self.rate

    def gamma0(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"poisson({self.rate:g})"


class GammaSeed(LevySeed):
    family: ClassVar[LevyFamily] = LevyFamily.GAMMA

    shape: float = Field(gt=0.0)
    rate: float = Field(gt=0.0)

    @property
    def triplet(self) -> LevyTriplet:
        # nu(d xi) = shape xi^-1 e^{-rate xi} on xi > 0
        zeta = self.shape * (1.0 - math.exp(-self.rate)) / self.rate
        return LevyTriplet(
            zeta=zeta,
            a=0.0,
            levy_measure=self.family,
            measure_params=(self.shape, self.rate),
            finite_variation=True,
            fourth_moment=True,
        )

    def _cumulant(self, theta: float) -> complex:
        return -self.shape * cmath.log(1.0 - 1j * theta / self.rate)

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        k, b = self.shape, self.rate
        return (k / b, k / b**2, 2.0 * k / b**3, 6.0 * k / b**4)

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        return generator.gamma(self.shape * leb, 1.0 / self.rate)

    def levy_abs_mass(self) -> float:
        return self.shape / self.rate

    def gamma0(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"gamma({self.shape:g},{self.rate:g})"


class NegBinSeed(LevySeed):
    """Failures before ``size`` successes with success probability ``prob``."""

    family: ClassVar[LevyFamily] = LevyFamily.NEGBIN

    size: float = Field(gt=0.0)
    prob: float = Field(gt=0.0, lt=1.0)

    @property
    def triplet(self) -> LevyTriplet:
        # nu({k}) = size (1-prob)^k / k, k >= 1; only the k = 1 atom is compensated.
        return LevyTriplet(
            zeta=self.size * (1.0 - self.prob),
            a=0.0,
            levy_measure=self.family,
            measure_params=(self.size, self.prob),
            finite_variation=True,
            fourth_moment=True,
        )

    def _cumulant(self, theta: float) -> complex:
        q = 1.0 - self.prob
        return self.size * cmath.log(self.prob / (1.0 - q * cmath.exp(1j * theta)))

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        r, p = self.size, self.prob
        q = 1.0 - p
        return (
            r * q / p,
            r * q / p**2,
            r * q * (1.0 + q) / p**3,
            r * q * (1.0 + 4.0 * q + q * q) / p**4,
        )

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        return generator.negative_binomial(self.size * leb, self.prob).astype(float)

    def levy_abs_mass(self) -> float:
        return self.size * (1.0 - self.prob) / self.prob

    def gamma0(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"negbin({self.size:g},{self.prob:g})"


class CauchySeed(LevySeed):
    family: ClassVar[LevyFamily] = LevyFamily.CAUCHY

    scale: float = Field(gt=0.0)

    @property
    def triplet(self) -> LevyTriplet:
        return LevyTriplet(
            zeta=0.0,
            a=0.0,
            levy_measure=self.family,
            measure_params=(self.scale,),
            finite_variation=False,
            fourth_moment=False,
        )

    def _cumulant(self, theta: float) -> complex:
        return complex(-self.scale * abs(theta), 0.0)

    def _raw_cumulants(self) -> Tuple[float, float, float, float]:
        raise UnsupportedMomentError("the Cauchy seed has no moments")

    def _draw(self, leb: np.ndarray, generator: np.random.Generator) -> np.ndarray:
        return self.scale * leb * generator.standard_cauchy(size=leb.shape)

    def levy_abs_mass(self) -> float:
        return math.inf

    def gamma0(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"cauchy({self.scale:g})"


_SEED_CLASSES: Dict[str, Tuple[Type[LevySeed], Tuple[str, ...]]] = {
    "gaussian": (GaussianSeed, ("mu", "sigma2")),
    "normal": (GaussianSeed, ("mu", "sigma2")),
    "poisson": (PoissonSeed, ("rate",)),
    "gamma": (GammaSeed, ("shape", "rate")),
    "negbin": (NegBinSeed, ("size", "prob")),
    "cauchy": (CauchySeed, ("scale",)),
}

_CALL_PATTERN = re.compile(r"^\s*([A-Za-z_\-]+)\s*(?:\((.*)\))?\s*$")


def split_call(text: str) -> Tuple[str, str]:
    """'name(args)' -> ('name', 'args'); shared by all model-string parsers."""
    match = _CALL_PATTERN.match(text or "")
    if not match:
        raise ConfigurationError(f"cannot parse model string '{text}'")
    return match.group(1).lower(), (match.group(2) or "").strip()


def parse_numbers(args: str, separator: str = ",") -> Tuple[float, ...]:
    if not args:
        return ()
    try:
        return tuple(float(part) for part in args.split(separator) if part.strip())
    except ValueError as exc:
        raise ConfigurationError(f"non-numeric parameter in '{args}'") from exc


def build_model(factory: Callable[..., BaseModel], **kwargs: object) -> BaseModel:
    """Construct a pydantic model, turning validation failures into ConfigurationError."""
    try:
        return factory(**kwargs)
    except ValidationError as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_seed(text: str) -> LevySeed:
    """Parse ``gaussian(mu,sigma2)``, ``poisson(rate)``, ``gamma(shape,rate)``,
    ``negbin(size,prob)`` or ``cauchy(scale)``."""
    name, args = split_call(text)
    if name not in _SEED_CLASSES:
        raise ConfigurationError(f"unsupported Levy seed family '{name}'")
    cls, fields = _SEED_CLASSES[name]
    values = parse_numbers(args)
    if len(values) != len(fields):
        raise ConfigurationError(
            f"{name} expects {len(fields)} parameter(s) {fields}, got {len(values)}"
        )
    seed = build_model(cls, **dict(zip(fields, values)))
    assert isinstance(seed, LevySeed)
    return seed

