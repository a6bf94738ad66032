"""Unit tests for trawl functions, periodic kernels and the correlation factor."""

import math

import numpy as np
import pytest

from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.models import (
    Exponential,
    FourierFinite,
    MemoryClass,
    NumericMonotone,
    One,
    Sine,
    SupGamma,
    TabulatedC,
    correlation_factor_c,
    eval_p,
    parse_periodic,
    parse_trawl,
    trawl_integral,
)
from trawlkit.models.kernels import exp_sine_c, kernel_product_integral, kernel_tail_integral


def test_exponential_integral_closed_form():
    g = Exponential(lam=2.0)

    assert trawl_integral(g, 0.0) == pytest.approx(0.5)
    assert trawl_integral(g, 1.0, 2.0) == pytest.approx((math.exp(-2.0) - math.exp(-4.0)) / 2.0)
    assert g.mass_quantile(0.01) == pytest.approx(math.log(100.0) / 2.0)


def test_supgamma_integral_and_memory_class():
    g = SupGamma(alpha=1.0, H=1.5)

    assert trawl_integral(g, 0.0) == pytest.approx(2.0)
    assert g.memory_class == MemoryClass.LONG
    assert SupGamma(alpha=1.0, H=2.5).memory_class == MemoryClass.SHORT
    assert math.isinf(g.tail_first_moment())


def test_supgamma_with_heavy_tail_has_infinite_mass():
    with pytest.raises(DomainError):
        trawl_integral(SupGamma(alpha=1.0, H=0.8), 0.0)


def test_numeric_trawl_integrates_piecewise_linear():
    g = NumericMonotone(xs=(0.0, 1.0, 2.0), gs=(1.0, 0.5, 0.0))

    assert g.total_mass == pytest.approx(1.0)
    assert trawl_integral(g, 1.0) == pytest.approx(0.25)
    assert trawl_integral(g, 3.0) == 0.0


def test_numeric_trawl_must_decrease_to_zero():
    with pytest.raises(ConfigurationError):
        parse_trawl("numeric(0,1,2;1,0.7,0.2)")
    with pytest.raises(ConfigurationError):
        parse_trawl("numeric(0,1,2;1,1.2,0)")


def test_integral_rejects_negative_lower_bound():
    with pytest.raises(DomainError):
        trawl_integral(Exponential(lam=1.0), -1.0)


def test_sine_reduces_argument_modulo_period():
    p = Sine(tau=3.0)

    assert p(0.75) == pytest.approx(1.0)
    assert p(3.0e6 + 0.75) == pytest.approx(1.0, abs=1e-9)


def test_eval_p_returns_floats_for_scalars():
    p = Sine(tau=3.0)

    assert eval_p(p, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert isinstance(eval_p(p, 0.75), float)
    np.testing.assert_allclose(eval_p(p, np.array([0.0, 0.75])), [0.0, 1.0], atol=1e-12)


def test_fourier_with_constant_term():
    p = parse_periodic("fourier(4;1,0.5,0)")

    assert isinstance(p, FourierFinite)
    assert p(0.0) == pytest.approx(1.5)
    assert p(2.0) == pytest.approx(0.5)
    assert p.sup_norm == pytest.approx(1.5)


def test_tabulated_c_wraps_around_period():
    p = TabulatedC(delta=1.0, values=(1.0, 0.5, -0.5))

    assert p.period == 3.0
    assert p(4.0) == pytest.approx(0.5)
    assert correlation_factor_c(Exponential(lam=1.0), p, 2.0) == pytest.approx(-0.5)


def test_tabulated_c_has_no_kernel():
    with pytest.raises(ConfigurationError):
        kernel_product_integral(Exponential(lam=1.0), TabulatedC(delta=1.0, values=(1.0,)), 0.0)


@pytest.mark.parametrize("t", [0.0, 0.4, 1.0, 2.7])
def test_exp_sine_closed_form_matches_quadrature(t):
    g, p = Exponential(lam=0.5), Sine(tau=3.0)

    closed = kernel_product_integral(g, p, t, closed_form=True)
    numeric = kernel_product_integral(g, p, t, closed_form=False)

    assert closed == pytest.approx(numeric, rel=1e-7, abs=1e-10)


@pytest.mark.parametrize("transform", ["identity", "square"])
def test_kernel_tail_closed_form_matches_quadrature(transform):
    g, p = Exponential(lam=0.8), Sine(tau=2.0)

    closed = kernel_tail_integral(g, p, 0.3, transform, closed_form=True)
    numeric = kernel_tail_integral(g, p, 0.3, transform, closed_form=False)

    assert closed == pytest.approx(numeric, rel=1e-7, abs=1e-10)


def test_exp_sine_correlation_factor():
    g, p = Exponential(lam=0.5), Sine(tau=3.0)

    assert exp_sine_c(0.5, 3.0, 0.0) == pytest.approx(1.0)
    for t in (0.5, 1.5, 3.0):
        assert correlation_factor_c(g, p, t) == pytest.approx(
            correlation_factor_c(g, p, t, closed_form=False), rel=1e-6, abs=1e-9
        )


def test_correlation_factor_is_tau_periodic():
    g, p = Exponential(lam=0.5), Sine(tau=3.0)

    assert correlation_factor_c(g, p, 1.0) == pytest.approx(correlation_factor_c(g, p, 4.0))


def test_correlation_factor_for_plain_trawl_is_one():
    assert correlation_factor_c(SupGamma(alpha=1.0, H=2.0), One(), 5.0) == 1.0


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp(1.5)", Exponential(lam=1.5)),
        ("supgamma(2,2.5)", SupGamma(alpha=2.0, H=2.5)),
        ("numeric(0,1;1,0)", NumericMonotone(xs=(0.0, 1.0), gs=(1.0, 0.0))),
    ],
)
def test_parse_trawl(text, expected):
    assert parse_trawl(text) == expected


@pytest.mark.parametrize("text", ["exp(0)", "exp(1,2)", "gauss(1)", "supgamma(1)"])
def test_parse_trawl_rejects_bad_strings(text):
    with pytest.raises(ConfigurationError):
        parse_trawl(text)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("one", One()),
        ("sine(7)", Sine(tau=7.0)),
        ("tabc(1;1,0.5)", TabulatedC(delta=1.0, values=(1.0, 0.5))),
    ],
)
def test_parse_periodic(text, expected):
    assert parse_periodic(text) == expected


@pytest.mark.parametrize("text", ["one(2)", "sine(-1)", "fourier(3)", "cosine(2)"])
def test_parse_periodic_rejects_bad_strings(text):
    with pytest.raises(ConfigurationError):
        parse_periodic(text)


def test_vectorised_evaluation():
    xs = np.array([0.0, 1.0, 2.0])

    np.testing.assert_allclose(Exponential(lam=1.0)(xs), np.exp(-xs))
    np.testing.assert_allclose(SupGamma(alpha=1.0, H=2.0)(xs), (1.0 + xs) ** -2.0)
