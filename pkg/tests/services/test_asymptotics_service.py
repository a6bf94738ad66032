"""Unit tests for the asymptotic covariances, diagnostics and weak dependence."""

import math

import numpy as np
import pytest
from scipy import special

from trawlkit.core.errors import AssumptionViolationError, DomainError
from trawlkit.services.asymptotics_service import (
    acf_limit_matrix,
    acf_limit_matrix_series,
    acov_limit_covariances,
    acov_limit_matrix,
    bartlett_series,
    check_clt_assumptions,
    fourth_moment,
    hurwitz_zeta,
    sample_mean_series,
    sample_mean_variance,
    third_cumulant_sums,
    w11,
    weak_dependence_bound,
    weak_dependence_theta,
)
from trawlkit.services.moment_service import sample_acf, sample_acov
from trawlkit.services.simulation_service import simulate_replicates


def _exp_cov(a: float, b: float) -> float:
    return math.exp(-abs(a - b))


def test_hurwitz_zeta_special_values():
    assert hurwitz_zeta(2.0, 1.0) == pytest.approx(math.pi**2 / 6.0, rel=1e-12)
    assert hurwitz_zeta(2.0, 2.0) == pytest.approx(math.pi**2 / 6.0 - 1.0, rel=1e-12)


@pytest.mark.parametrize("s, a", [(1.5, 0.7), (1.1, 3.0), (4.0, 0.05), (2.3, 25.0)])
def test_hurwitz_zeta_matches_scipy(s, a):
    assert hurwitz_zeta(s, a) == pytest.approx(float(special.zeta(s, a)), rel=1e-12)


def test_hurwitz_zeta_domain():
    with pytest.raises(DomainError):
        hurwitz_zeta(1.0, 1.0)
    with pytest.raises(DomainError):
        hurwitz_zeta(2.0, 0.0)


def test_sample_mean_variance_exponential(model_factory):
    model = model_factory(trawl="exp(1)")

    assert sample_mean_variance(model) == pytest.approx(2.1639534, abs=1e-7)


def test_sample_mean_variance_supgamma(model_factory):
    model = model_factory(trawl="supgamma(1,3)")

    assert sample_mean_variance(model) == pytest.approx(1.1449341, abs=1e-7)


def test_sample_mean_variance_large_step_keeps_lag_zero_only(model_factory):
    model = model_factory(trawl="exp(2)", delta=50.0)

    assert sample_mean_variance(model) == pytest.approx(0.5, rel=1e-12)


def test_closed_form_matches_truncated_series(model_factory):
    model = model_factory(trawl="supgamma(1,5)", delta=0.5)

    series, lag, achieved = sample_mean_series(model)

    assert sample_mean_variance(model) == pytest.approx(series, rel=1e-7)
    assert lag >= 8
    assert achieved <= 1e-8


def test_periodic_kernel_uses_series(exp_sine_model):
    value = sample_mean_variance(exp_sine_model)

    assert value > 0
    assert math.isfinite(value)


def test_long_memory_rejected(model_factory):
    with pytest.raises(AssumptionViolationError):
        sample_mean_variance(model_factory(trawl="supgamma(1,1.8)"))
    with pytest.raises(AssumptionViolationError):
        acov_limit_matrix(model_factory(trawl="supgamma(1,1.8)"), 2)


def test_missing_fourth_moment_rejected(model_factory):
    with pytest.raises(AssumptionViolationError):
        acov_limit_matrix(model_factory(levy="cauchy(1)"), 2)


def test_gaussian_v00_is_twice_sum_of_squares(gaussian_exp_model):
    v = acov_limit_matrix(gaussian_exp_model, 2)

    assert v[0, 0] == pytest.approx(2.0 / math.tanh(1.0), rel=1e-9)
    assert v[0, 0] == pytest.approx(2.62607, abs=1e-5)


def test_gaussian_w11_matches_first_order_autoregression(model_factory):
    model = model_factory(trawl="exp(0.5)")

    assert w11(model) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-8)


def test_poisson_fourth_cumulant_term_is_positive(model_factory):
    gaussian = acov_limit_matrix(model_factory(levy="gaussian(0,1)"), 1)
    poisson = acov_limit_matrix(model_factory(levy="poisson(1)"), 1)

    assert poisson[0, 0] > gaussian[0, 0]


def test_nonzero_mean_adds_sample_mean_term(model_factory):
    centered = acov_limit_covariances(model_factory(levy="gaussian(0,1)"), 2)
    shifted = acov_limit_covariances(model_factory(levy="gaussian(2,1)"), 2)

    np.testing.assert_allclose(shifted.v_matrix - centered.v_matrix, 16.0 * 2.1639534, rtol=1e-7)
    np.testing.assert_allclose(shifted.w_matrix, centered.w_matrix, atol=1e-12)


def test_third_cumulant_sums_for_exponential_trawl(gaussian_exp_model):
    e = math.exp(-1.0)
    expected = [1.0 + 2.0 * e / (1.0 - e), e / (1.0 - e) + e + e**2 / (1.0 - e)]

    sums = third_cumulant_sums(gaussian_exp_model, 1, 60)

    np.testing.assert_allclose(sums, expected, rtol=1e-10)


def test_poisson_v00_includes_mean_terms(model_factory):
    model = model_factory(levy="poisson(1)")
    ratio = (math.e + 1.0) / (math.e - 1.0)

    v = acov_limit_matrix(model, 1)

    # 2 coth(1) from the series, ratio from the G-term, 8 ratio from mu = 1
    assert v[0, 0] == pytest.approx(2.0 / math.tanh(1.0) + 9.0 * ratio, rel=1e-7)


def test_poisson_v00_for_independent_draws(model_factory):
    model = model_factory(levy="poisson(1)", delta=50.0)

    # Var(Y^2) for Y ~ Poisson(1): E Y^4 - (E Y^2)^2 = 15 - 4
    assert acov_limit_matrix(model, 0)[0, 0] == pytest.approx(11.0, rel=1e-8)


@pytest.mark.parametrize("levy", ["gaussian(0,1)", "poisson(1)", "gamma(2,1)"])
def test_bartlett_combination_matches_series_form(model_factory, levy):
    model = model_factory(levy=levy, trawl="exp(0.8)", p="sine(3)", delta=0.5)

    from_v = acf_limit_matrix(model, 3)
    expanded = acf_limit_matrix_series(model, 3)

    np.testing.assert_allclose(from_v, expanded, atol=1e-8)


def test_limit_matrices_are_symmetric_psd(model_factory):
    model = model_factory(levy="poisson(2)", trawl="exp(1)", p="sine(4)", delta=0.5)

    result = acov_limit_covariances(model, 4)

    for matrix in (result.v_matrix, result.w_matrix):
        np.testing.assert_allclose(matrix, matrix.T, atol=1e-10)
        assert np.linalg.eigvalsh(matrix).min() > -1e-8
    assert result.w_matrix.shape == (4, 4)
    assert result.V_delta is not None and result.V_delta > 0


def test_bartlett_series_needs_enough_lags():
    with pytest.raises(DomainError):
        bartlett_series(np.ones(5), 2, 4)


def test_bartlett_series_for_white_noise_is_identity():
    rho = np.zeros(20)
    rho[0] = 1.0

    np.testing.assert_allclose(bartlett_series(rho, 3, 10), np.eye(3))


def test_clt_diagnostics(model_factory):
    short = check_clt_assumptions(model_factory(trawl="exp(0.5)"))
    medium = check_clt_assumptions(model_factory(trawl="supgamma(1,1.8)"))
    long = check_clt_assumptions(model_factory(trawl="supgamma(1,1.2)"))

    assert short.sum_abs_acov_finite and short.sum_sq_acov_finite and short.acf_clt
    assert not medium.sum_abs_acov_finite and medium.sum_sq_acov_finite
    assert not long.sum_abs_acov_finite and not long.sum_sq_acov_finite
    assert not long.sample_mean_clt
    assert "long memory" in long.render()


def test_cauchy_seed_fails_diagnostics(model_factory):
    report = check_clt_assumptions(model_factory(levy="cauchy(1)"))

    assert not report.sample_mean_clt
    assert not report.acf_clt


def test_weak_dependence_second_order_branch(gaussian_exp_model):
    assert weak_dependence_theta(gaussian_exp_model, 0.0) == pytest.approx(1.0)
    assert weak_dependence_theta(gaussian_exp_model, 2.0) == pytest.approx(math.exp(-1.0))


def test_weak_dependence_finite_variation_branch(model_factory):
    model = model_factory(levy="poisson(1)")

    assert weak_dependence_theta(model, 1.0) == pytest.approx(math.exp(-1.0))
    with pytest.raises(DomainError):
        weak_dependence_theta(model_factory(), 1.0, branch="finite-variation")


def test_weak_dependence_is_nonincreasing_and_bounded(model_factory):
    model = model_factory(levy="gaussian(0,2)", trawl="exp(0.5)", p="sine(3)")
    rs = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 60.0]

    thetas = [weak_dependence_theta(model, r) for r in rs]

    assert all(a >= b - 1e-12 for a, b in zip(thetas, thetas[1:]))
    assert thetas[-1] < 1e-5
    for r, theta in zip(rs, thetas):
        assert theta <= weak_dependence_bound(model, r) + 1e-12


def test_fourth_moment_at_a_single_time(model_factory):
    gaussian = model_factory()
    poisson = model_factory(levy="poisson(2)")

    assert fourth_moment(gaussian, [0.0, 0.0, 0.0, 0.0]) == pytest.approx(3.0)
    assert fourth_moment(poisson, [0.0, 0.0, 0.0, 0.0]) == pytest.approx(2.0 + 3.0 * 4.0)


def test_fourth_moment_gaussian_isserlis(gaussian_exp_model):
    times = [0.0, 0.5, 1.0, 2.0]
    expected = (
        _exp_cov(0.0, 0.5) * _exp_cov(1.0, 2.0)
        + _exp_cov(0.0, 1.0) * _exp_cov(0.5, 2.0)
        + _exp_cov(0.0, 2.0) * _exp_cov(0.5, 1.0)
    )

    assert fourth_moment(gaussian_exp_model, times) == pytest.approx(expected)


@pytest.mark.slow
def test_sample_mean_clt_variance(model_factory):
    model = model_factory(trawl="exp(1)", n=500)
    paths = simulate_replicates(model, master_seed=99, replicates=200)
    scaled = [math.sqrt(p.values.size) * p.values.mean() for p in paths]

    assert np.var(scaled) == pytest.approx(sample_mean_variance(model), rel=0.3)


@pytest.mark.slow
def test_poisson_v00_matches_monte_carlo(model_factory):
    model = model_factory(levy="poisson(1)", n=20000)
    paths = simulate_replicates(model, master_seed=2024, replicates=500)
    n = paths[0].values.size
    stats = [sample_acov(p.values, 1.0, 0, centered=False) for p in paths]

    assert n * np.var(stats) == pytest.approx(acov_limit_matrix(model, 0)[0, 0], rel=0.1)


@pytest.mark.slow
def test_w11_matches_monte_carlo(model_factory):
    model = model_factory(trawl="exp(0.5)", n=5000)
    paths = simulate_replicates(model, master_seed=7, replicates=500)
    n = paths[0].values.size
    stats = [sample_acf(p.values, 1.0, 1, centered=False).values[1] for p in paths]

    assert n * np.var(stats) == pytest.approx(w11(model), rel=0.1)


@pytest.mark.slow
def test_bartlett_forms_agree_for_five_lags(model_factory):
    model = model_factory(trawl="exp(0.5)")
    rho = np.exp(-0.5 * np.arange(400))

    from_v = acf_limit_matrix(model, 5)

    np.testing.assert_allclose(from_v, acf_limit_matrix_series(model, 5), atol=1e-8)
    np.testing.assert_allclose(from_v, bartlett_series(rho, 5, 390), atol=1e-8)
