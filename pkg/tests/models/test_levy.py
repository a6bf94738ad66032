"""Unit tests for the Levy seed families."""

import cmath
import math

import numpy as np
import pytest

from trawlkit.core.errors import ConfigurationError, DomainError, UnsupportedMomentError
from trawlkit.core.random import RandomStream
from trawlkit.models import (
    CauchySeed,
    GammaSeed,
    GaussianSeed,
    NegBinSeed,
    PoissonSeed,
    parse_seed,
)
SEEDS = [
    GaussianSeed(mu=0.5, sigma2=2.0),
    PoissonSeed(rate=1.5),
    GammaSeed(shape=2.0, rate=3.0),
    NegBinSeed(size=2.0, prob=0.4),
]


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: s.describe())
def test_triplet_matches_closed_form_cumulant(seed):
    for theta in (-2.0, -0.3, 0.7, 1.9):
        assert seed.triplet.cumulant(theta) == pytest.approx(seed.cumulant(theta), abs=1e-8)


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: s.describe())
def test_cumulant_vanishes_at_zero(seed):
    assert seed.cumulant(0.0) == pytest.approx(0j, abs=1e-14)


def test_gaussian_cumulants():
    seed = GaussianSeed(mu=1.0, sigma2=4.0)

    assert seed.cumulants_1_to_4() == (1.0, 4.0, 0.0, 0.0)
    assert seed.kurtosis() == pytest.approx(3.0)
    assert seed.cumulant(1.0) == complex(-2.0, 1.0)


def test_poisson_cumulants_all_equal_rate():
    seed = PoissonSeed(rate=2.5)

    assert seed.cumulants_1_to_4() == (2.5, 2.5, 2.5, 2.5)
    assert seed.cumulant(math.pi) == pytest.approx(2.5 * (cmath.exp(1j * math.pi) - 1.0))


def test_gamma_cumulants():
    k1, k2, k3, k4 = GammaSeed(shape=2.0, rate=2.0).cumulants_1_to_4()

    assert (k1, k2, k3, k4) == pytest.approx((1.0, 0.5, 0.5, 0.75))


def test_gamma_cumulants_unit_rate():
    assert GammaSeed(shape=2.0, rate=1.0).cumulants_1_to_4() == pytest.approx((2.0, 2.0, 4.0, 12.0))


def _differentiated_cumulants(seed, step=2e-3):
    c = {k: seed.cumulant(k * step) for k in (-2, -1, 0, 1, 2)}
    first = (c[1] - c[-1]) / (2.0 * step)
    second = (c[1] - 2.0 * c[0] + c[-1]) / step**2
    third = (c[2] - 2.0 * c[1] + 2.0 * c[-1] - c[-2]) / (2.0 * step**3)
    fourth = (c[2] - 4.0 * c[1] + 6.0 * c[0] - 4.0 * c[-1] + c[-2]) / step**4
    # C^(k)(0) = i^k kappa_k
    return ((-1j * first).real, (-second).real, (1j * third).real, fourth.real)


@pytest.mark.parametrize(
    "seed, expected",
    [
        (GaussianSeed(mu=0.0, sigma2=1.0), (0.0, 1.0, 0.0, 0.0)),
        (PoissonSeed(rate=3.0), (3.0, 3.0, 3.0, 3.0)),
        (GammaSeed(shape=2.0, rate=1.0), (2.0, 2.0, 4.0, 12.0)),
        (NegBinSeed(size=2.0, prob=0.4), None),
    ],
    ids=lambda v: v.describe() if hasattr(v, "describe") else None,
)
def test_cumulants_match_differentiated_cumulant(seed, expected):
    numeric = _differentiated_cumulants(seed)

    assert numeric == pytest.approx(seed.cumulants_1_to_4(), rel=1e-3, abs=1e-6)
    if expected is not None:
        assert seed.cumulants_1_to_4() == pytest.approx(expected)


def test_cauchy_has_no_moments():
    seed = CauchySeed(scale=1.0)

    assert seed.cumulant(-3.0) == complex(-3.0, 0.0)
    assert not seed.has_fourth_moment
    with pytest.raises(UnsupportedMomentError):
        seed.mean()
    with pytest.raises(UnsupportedMomentError):
        seed.variance()
    with pytest.raises(UnsupportedMomentError):
        seed.cumulants_1_to_4()


def test_cumulant_rejects_non_finite_theta():
    with pytest.raises(DomainError):
        GaussianSeed().cumulant(math.inf)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("gaussian(0,1)", GaussianSeed(mu=0.0, sigma2=1.0)),
        ("Normal( 1 , 2 )", GaussianSeed(mu=1.0, sigma2=2.0)),
        ("poisson(3)", PoissonSeed(rate=3.0)),
        ("gamma(1,2)", GammaSeed(shape=1.0, rate=2.0)),
        ("negbin(2,0.5)", NegBinSeed(size=2.0, prob=0.5)),
        ("cauchy(0.5)", CauchySeed(scale=0.5)),
    ],
)
def test_parse_seed(text, expected):
    assert parse_seed(text) == expected


@pytest.mark.parametrize(
    "text", ["stable(1.5)", "gaussian(0)", "poisson(-1)", "gamma(a,b)", "negbin(1,1.5)", ""]
)
def test_parse_seed_rejects_bad_strings(text):
    with pytest.raises(ConfigurationError):
        parse_seed(text)


def test_sample_slice_of_zero_measure_is_exactly_zero(stream):
    assert PoissonSeed(rate=1.0).sample_slice(0.0, stream) == 0.0


def test_sample_slice_rejects_negative_measure(stream):
    with pytest.raises(DomainError):
        GaussianSeed().sample_slice(-0.1, stream)


def test_draw_slices_is_reproducible():
    leb = np.linspace(0.0, 1.0, 50)
    first = GammaSeed(shape=1.0, rate=1.0).sample_slices(leb, RandomStream(7, 3))
    second = GammaSeed(shape=1.0, rate=1.0).sample_slices(leb, RandomStream(7, 3))

    np.testing.assert_array_equal(first, second)
    assert first[0] == 0.0


@pytest.mark.slow
def test_slice_draws_match_scaled_moments():
    seed = NegBinSeed(size=2.0, prob=0.4)
    leb = np.full(200_000, 0.3)
    draws = seed.sample_slices(leb, RandomStream(11))
    k1, k2, _, _ = seed.cumulants_1_to_4()

    assert draws.mean() == pytest.approx(0.3 * k1, rel=0.02)
    assert draws.var() == pytest.approx(0.3 * k2, rel=0.03)


def _ecf(draws, thetas):
    return np.exp(1j * np.outer(thetas, draws)).mean(axis=1)


def test_gaussian_slice_moments():
    draws = GaussianSeed(mu=0.0, sigma2=1.0).sample_slices(np.full(100_000, 4.0), RandomStream(3))

    assert abs(draws.mean()) < 3.0 * 2.0 / math.sqrt(1e5)
    assert draws.var() == pytest.approx(4.0, rel=0.05)


def test_poisson_slice_mean():
    stream = RandomStream(4)
    draws = np.array([PoissonSeed(rate=1.0).sample_slice(2.5, stream) for _ in range(100_000)])

    assert abs(draws.mean() - 2.5) < 3.0 * math.sqrt(2.5 / 1e5)
    assert np.all(draws == np.round(draws))


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS + [CauchySeed(scale=0.5)], ids=lambda s: s.describe())
def test_slice_laws_add_over_disjoint_measures(seed):
    size, s, t = 100_000, 0.7, 1.3
    thetas = np.linspace(-2.0, 2.0, 9)
    split = seed.sample_slices(np.full(size, s), RandomStream(21, 1)) + seed.sample_slices(
        np.full(size, t), RandomStream(21, 2)
    )
    joined = seed.sample_slices(np.full(size, s + t), RandomStream(21, 3))
    exact = np.exp([(s + t) * seed.cumulant(theta) for theta in thetas])

    assert np.max(np.abs(_ecf(split, thetas) - _ecf(joined, thetas))) < 0.02
    assert np.max(np.abs(_ecf(joined, thetas) - exact)) < 0.02


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: s.describe())
def test_log_ecf_derivatives_match_cumulants(seed):
    draws = seed.sample_slices(np.full(200_000, 1.0), RandomStream(33))
    step = 0.05
    # even part of the log ECF: -kappa2 theta^2 / 2 + kappa4 theta^4 / 24 - ...
    f1, f2 = np.log(np.abs(_ecf(draws, np.array([step, 2.0 * step]))))
    _, k2, _, k4 = seed.cumulants_1_to_4()

    assert -2.0 * f1 / step**2 == pytest.approx(k2, rel=0.03)
    assert (2.0 * f2 - 8.0 * f1) / step**4 == pytest.approx(k4, rel=0.25, abs=0.3)
