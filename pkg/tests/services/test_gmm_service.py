"""Unit tests for the GMM estimator."""

import math

import numpy as np
import pytest

from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.models import GmmSpec
from trawlkit.services.gmm_service import (
    get_family,
    gmm_fit,
    gmm_objective,
    moment_contributions,
    newey_west,
    sample_moment_vector,
    theoretical_moment_vector,
)
from trawlkit.services.simulation_service import simulate


def test_exp_gaussian_moment_vector():
    family = get_family("exp-gaussian")

    moments = theoretical_moment_vector(family, [0.5, 1.0, 2.0], 1.0, 2)

    # mu = 2, variance = 4
    expected = [2.0, 4.0 + 4.0, 4.0 * math.exp(-0.5) + 4.0, 4.0 * math.exp(-1.0) + 4.0]
    np.testing.assert_allclose(moments, expected, rtol=1e-10)


def test_exp_poisson_moment_vector():
    family = get_family("exp-poisson")

    moments = theoretical_moment_vector(family, [1.0, 3.0], 0.5, 2)

    assert moments[0] == pytest.approx(3.0)
    assert moments[1] == pytest.approx(3.0 + 9.0)


def test_objective_vanishes_at_true_parameters():
    family = get_family("supgamma-gaussian")
    theta = [1.0, 2.5, 0.3, 1.2]
    target = theoretical_moment_vector(family, theta, 1.0, 3)

    assert gmm_objective(theta, target, family, 1.0, np.eye(5)) == pytest.approx(0.0, abs=1e-20)
    assert gmm_objective([1.0, 3.0, 0.3, 1.2], target, family, 1.0, np.eye(5)) > 0


def test_objective_scales_with_weight():
    family = get_family("exp-gaussian")
    target = theoretical_moment_vector(family, [0.5, 1.0, 2.0], 1.0, 2)
    theta = [0.7, 1.0, 2.0]

    base = gmm_objective(theta, target, family, 1.0, np.eye(4))
    scaled = gmm_objective(theta, target, family, 1.0, 3.0 * np.eye(4))

    assert scaled == pytest.approx(3.0 * base)


def test_unknown_family():
    with pytest.raises(ConfigurationError):
        get_family("exp-cauchy")


def test_moment_contributions_layout():
    rows = moment_contributions([1.0, 2.0, 3.0, 4.0, 5.0], 2)

    assert rows.shape == (3, 4)
    np.testing.assert_array_equal(rows[0], [1.0, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(rows[2], [3.0, 9.0, 12.0, 15.0])
    np.testing.assert_allclose(sample_moment_vector([1.0, 2.0, 3.0, 4.0, 5.0], 2), rows.mean(0))


def test_moment_contributions_needs_enough_observations():
    with pytest.raises(DomainError):
        moment_contributions([1.0, 2.0, 3.0, 4.0], 2)


def test_newey_west_without_lags_is_sample_covariance():
    rows = np.random.default_rng(0).normal(size=(200, 3))

    np.testing.assert_allclose(newey_west(rows, bandwidth=0), np.cov(rows.T, bias=True))


def test_newey_west_is_symmetric():
    rows = np.cumsum(np.random.default_rng(1).normal(size=(300, 2)), axis=0)

    S = newey_west(rows)

    np.testing.assert_allclose(S, S.T)


def test_fit_rejects_bad_configuration():
    series = np.random.default_rng(2).normal(size=50)

    with pytest.raises(DomainError):
        gmm_fit(series, GmmSpec(family="exp-gaussian", lags=2), 0.0)
    with pytest.raises(ConfigurationError):
        gmm_fit(series, GmmSpec(family="exp-gaussian", lags=2, bounds=((0.1, 1.0),)), 1.0)
    with pytest.raises(ConfigurationError):
        gmm_fit(series, GmmSpec(family="exp-gaussian", lags=2, weight=np.eye(3)), 1.0)
    with pytest.raises(ConfigurationError):
        bounds = ((0.0, 1.0), (-1.0, 1.0), (0.1, 2.0))
        gmm_fit(series, GmmSpec(family="exp-gaussian", lags=2, bounds=bounds), 1.0)


@pytest.mark.slow
def test_exp_gaussian_fit_recovers_parameters(model_factory):
    model = model_factory(levy="gaussian(0.5,1)", trawl="exp(0.5)", n=4000)
    path = simulate(model, master_seed=77)

    fit = gmm_fit(path.values, GmmSpec(family="exp-gaussian", lags=4, restarts=3), 1.0)

    assert fit.names == ("lambda", "mu_L", "sigma2_L")
    assert fit.theta[0] == pytest.approx(0.5, rel=0.35)
    assert fit.theta[1] / fit.theta[0] == pytest.approx(1.0, abs=0.3)
    assert len(fit.trace) == 3
    assert np.all(np.isfinite(fit.std_errors))
