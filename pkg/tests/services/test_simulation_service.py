"""Unit tests for the slice matrix and the slice-based simulator."""

import math

import numpy as np
import pytest
from scipy import stats

from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.models import Exponential, NumericMonotone, Sine, SupGamma
from trawlkit.services.simulation_service import (
    add_weighted_slices,
    compute_slices,
    default_burn_in,
    kernel_weights,
    simulate,
    simulate_grid_oracle,
    simulate_replicates,
    simulate_shared_noise,
)


def test_exponential_slice_vectors():
    slices = compute_slices(Exponential(lam=1.0), 3, 1.0)

    assert slices.b[0] == pytest.approx(1.0 - math.exp(-1.0))
    assert slices.b[1] == pytest.approx(math.exp(-1.0) - math.exp(-2.0))
    assert slices.c[0] == pytest.approx(0.3995764, abs=1e-7)
    assert slices.d[0] == pytest.approx(1.0)
    assert slices.d[1] == pytest.approx(math.exp(-1.0))
    assert slices.e[0] == pytest.approx(0.6321206, abs=1e-7)


def test_smallest_slice_matrix_layout():
    slices = compute_slices(Exponential(lam=2.0), 1, 0.5)

    expected = np.array([[slices.e[0], slices.b[0]], [slices.d[1], 0.0]])
    np.testing.assert_array_equal(slices.s, expected)


@pytest.mark.parametrize(
    "g",
    [
        Exponential(lam=0.7),
        SupGamma(alpha=1.0, H=2.5),
        NumericMonotone(xs=(0.0, 1.0, 3.0), gs=(1.0, 0.4, 0.0)),
    ],
    ids=lambda g: g.describe(),
)
def test_slice_mass_telescopes_to_total_mass(g):
    slices = compute_slices(g, 12, 0.4)

    assert np.all(slices.s >= 0)
    for k in range(slices.n + 1):
        assert slices.entering_mass(k) == pytest.approx(g.total_mass, abs=1e-9)


def test_weighted_slices_of_measures_reproduce_total_mass():
    g = Exponential(lam=1.3)
    slices = compute_slices(g, 6, 0.5)

    x = add_weighted_slices(slices.s, np.ones(7))

    np.testing.assert_allclose(x, g.total_mass, atol=1e-9)


def test_add_weighted_slices_hand_trace():
    assert add_weighted_slices(np.ones((2, 2)), [1.0, 1.0]).tolist() == [2.0, 2.0]
    assert add_weighted_slices(np.ones((3, 3)), np.zeros(3)).tolist() == [0.0, 0.0, 0.0]


def test_add_weighted_slices_rejects_mismatched_weights():
    with pytest.raises(DomainError):
        add_weighted_slices(np.ones((3, 3)), [1.0, 1.0])
    with pytest.raises(DomainError):
        add_weighted_slices(np.ones((2, 3)), [1.0, 1.0])


def test_compute_slices_rejects_bad_grid():
    with pytest.raises(DomainError):
        compute_slices(Exponential(lam=1.0), 0, 1.0)
    with pytest.raises(DomainError):
        compute_slices(SupGamma(alpha=1.0, H=1.0), 3, 1.0)


def test_kernel_weights_with_and_without_shift():
    p = Sine(tau=4.0)

    np.testing.assert_allclose(kernel_weights(p, 3, 1.0), [1.0, 0.0, -1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(
        kernel_weights(p, 3, 1.0, weight_shift=True), [0.0, 1.0, 0.0, -1.0], atol=1e-12
    )


def test_default_burn_in_uses_tail_mass_rule():
    assert default_burn_in(Exponential(lam=1.0), 0.1) == math.ceil(math.log(100.0) / 0.1)


def test_simulate_is_deterministic(model_factory):
    model = model_factory(levy="poisson(2)", trawl="exp(0.5)", p="sine(3)", n=200)

    first = simulate(model, master_seed=42)
    second = simulate(model, master_seed=42)
    other = simulate(model, master_seed=43)

    np.testing.assert_array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)


def test_simulate_drops_burn_in(model_factory):
    model = model_factory(n=100)

    path = simulate(model, master_seed=1, burn_in=10)

    assert path.values.size == 91
    assert path.times[0] == pytest.approx(10.0)


def test_simulate_rejects_burn_in_beyond_grid(model_factory):
    with pytest.raises(DomainError):
        simulate(model_factory(n=20), burn_in=20)


def test_replicates_do_not_depend_on_threads(model_factory):
    model = model_factory(n=100)

    serial = simulate_replicates(model, master_seed=9, replicates=4, threads=1, burn_in=0)
    parallel = simulate_replicates(model, master_seed=9, replicates=4, threads=3, burn_in=0)

    assert [p.replicate for p in parallel] == [0, 1, 2, 3]
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.values, b.values)


def test_shared_noise_with_plain_kernel_is_identical(model_factory):
    model = model_factory(n=80)

    y, x = simulate_shared_noise(model, master_seed=4)

    np.testing.assert_array_equal(y.values, x.values)


def test_tabulated_c_cannot_be_simulated(model_factory):
    with pytest.raises(ConfigurationError):
        simulate(model_factory(p="tabc(1;1,0.5)", n=20), burn_in=0)


def test_grid_oracle_of_exhausted_trawl_is_zero(model_factory):
    model = model_factory(trawl="numeric(0,1;0,0)", n=10)

    path = simulate_grid_oracle(model, spatial_cells=100)

    np.testing.assert_array_equal(path.values, np.zeros(11))


def test_grid_oracle_needs_enough_cells(gaussian_exp_model):
    with pytest.raises(DomainError):
        simulate_grid_oracle(gaussian_exp_model, n=10, spatial_cells=50)


@pytest.mark.slow
def test_gaussian_path_matches_theoretical_moments(model_factory):
    model = model_factory(trawl="exp(1)", delta=0.1, n=2000)
    paths = simulate_replicates(model, master_seed=2024, replicates=40, burn_in=200)
    values = np.array([p.values for p in paths])

    variance = values.var(axis=1).mean()
    lag1 = np.mean([np.corrcoef(v[:-1], v[1:])[0, 1] for v in values])

    assert variance == pytest.approx(1.0, rel=0.1)
    assert lag1 == pytest.approx(math.exp(-0.1), abs=0.02)


@pytest.mark.slow
def test_poisson_marginal_has_equal_mean_and_variance(model_factory):
    model = model_factory(levy="poisson(1)", trawl="exp(1)", n=3000)

    path = simulate(model, master_seed=17, burn_in=10)

    assert path.values.mean() == pytest.approx(1.0, abs=0.1)
    assert path.values.var() == pytest.approx(1.0, abs=0.15)


@pytest.mark.slow
def test_grid_oracle_agrees_with_slice_simulator(model_factory):
    model = model_factory(trawl="exp(1)", delta=0.5, n=8)
    slice_draws = [
        simulate(model, master_seed=1, burn_in=0, replicate=r).values[-1] for r in range(600)
    ]
    oracle_draws = [
        simulate_grid_oracle(model, spatial_cells=200, master_seed=2, replicate=r).values[-1]
        for r in range(600)
    ]

    assert stats.ks_2samp(slice_draws, oracle_draws).statistic < 0.1
