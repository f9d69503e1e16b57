import math

import numpy as np
import pytest
from scipy import stats as sps

from conftest import DAX, MERVAL, SP500
from vgvalid.garch import (
    FitReport, GarchError, GjrGarchParams, filter_volatility, fit, log_likelihood,
    relaxation_time, simulate, stationarity_check, unconditional_variance,
)
from vgvalid.stats import NoiseFamily

PLAIN = GjrGarchParams(0.1, 0.1, 0.8, 0.0)
# persistence 0.95, unconditional variance 2, finite fourth moment
FINITE_KURTOSIS = GjrGarchParams(0.1, 0.05, 0.85, 0.1)


def reference_loglik(params, r, sigma0):
    """Plain-Python likelihood written from the model definition."""
    s2 = sigma0 ** 2
    nu = params.noise.dof
    total = 0.0
    for t, x in enumerate(r):
        if t:
            prev = r[t - 1]
            s2 = params.alpha0 + (params.alpha1 + params.gamma1 * (prev < 0)) * prev ** 2 + params.beta1 * s2
        s = math.sqrt(s2)
        if params.noise.kind == "t":
            total += sps.t.logpdf(x / s, nu, scale=math.sqrt((nu - 2) / nu)) - math.log(s)
        else:
            total += sps.norm.logpdf(x / s) - math.log(s)
    return total


def test_persistence_and_unconditional_variance():
    assert SP500.persistence == pytest.approx(0.996)
    assert unconditional_variance(SP500) == pytest.approx(0.5)
    assert unconditional_variance(FINITE_KURTOSIS) == pytest.approx(2.0)
    assert stationarity_check(SP500).margin == pytest.approx(0.004)


def test_relaxation_time():
    assert relaxation_time(SP500) == pytest.approx(-1 / math.log(0.996))
    assert 245 <= relaxation_time(SP500) <= 255


def test_non_stationary_rejected():
    p = GjrGarchParams(0.1, 0.1, 0.9, 0.2)
    assert not stationarity_check(p)
    with pytest.raises(GarchError):
        unconditional_variance(p)
    with pytest.raises(GarchError):
        simulate(p, 10, 1.0)


@pytest.mark.parametrize("kw", [dict(alpha0=0.0), dict(alpha1=-0.1), dict(gamma1=-0.5)])
def test_invalid_params(kw):
    base = dict(alpha0=0.1, alpha1=0.1, beta1=0.8, gamma1=0.0)
    base.update(kw)
    with pytest.raises(GarchError):
        GjrGarchParams(**base)


def test_filter_hand_cases():
    assert filter_volatility(PLAIN, [1.0, 0.0], 1.0).values[1] ** 2 == pytest.approx(1.0)
    lev = GjrGarchParams(0.1, 0.1, 0.5, 0.2)
    s = filter_volatility(lev, [-2.0, 2.0, 0.0], 1.0).values
    assert s[1] ** 2 == pytest.approx(0.1 + 0.3 * 4 + 0.5)
    assert s[2] ** 2 == pytest.approx(0.1 + 0.1 * 4 + 0.5 * 1.8)


def test_zero_returns_converge_to_geometric_fixed_point():
    s = filter_volatility(SP500, np.zeros(5000), 1.0).values
    assert s[-1] ** 2 == pytest.approx(0.002 / 0.074, rel=1e-10)


def test_filter_labels_and_errors():
    with pytest.raises(GarchError):
        filter_volatility(PLAIN, [1.0, 2.0], 0.0)
    with pytest.raises(GarchError, match="index 2"):
        filter_volatility(PLAIN, [1.0, 1e200, 1.0], 1.0)


@pytest.mark.parametrize("params", [SP500, MERVAL, PLAIN])
def test_log_likelihood_matches_reference(params):
    r, _ = simulate(params, 400, 1.0, seed=5)
    assert log_likelihood(params, r, 1.2) == pytest.approx(reference_loglik(params, r.values, 1.2), rel=1e-10)


def test_log_likelihood_scaling_identity():
    r, _ = simulate(DAX, 1000, 1.0, seed=2)
    c = 3.0
    scaled = GjrGarchParams(DAX.alpha0 * c * c, DAX.alpha1, DAX.beta1, DAX.gamma1, DAX.noise)
    base = log_likelihood(DAX, r, 1.0)
    assert log_likelihood(scaled, r.values * c, c) == pytest.approx(base - len(r) * math.log(c), rel=1e-12)


def test_simulate_is_deterministic_and_consistent():
    r1, s1 = simulate(MERVAL, 500, 1.5, seed=9)
    r2, s2 = simulate(MERVAL, 500, 1.5, seed=9)
    assert r1 == r2 and s1 == s2
    assert s1.values[0] == 1.5
    np.testing.assert_allclose(filter_volatility(MERVAL, r1, 1.5).values, s1.values, rtol=1e-13)


def test_simulated_variance_finite_kurtosis_model():
    r, _ = simulate(FINITE_KURTOSIS, 10 ** 6, math.sqrt(2.0), seed=1)
    assert np.var(r.values) == pytest.approx(2.0, rel=0.02)


def test_fit_recovers_merval():
    r, _ = simulate(MERVAL, 5000, math.sqrt(unconditional_variance(MERVAL)), seed=0)
    rep = fit(r)
    assert rep.converged and rep.hessian_ok
    truth = dict(zip(rep.names, MERVAL.as_vector()))
    for name, est in rep.estimates.items():
        assert abs(est - truth[name]) <= 3 * rep.std_errors[name], name
    assert abs(rep.params.persistence - MERVAL.persistence) <= 3 * rep.persistence_std_error()
    assert rep.log_likelihood >= log_likelihood(MERVAL, r, rep.sigma0) - 1e-6


def test_fit_boundary_and_report_roundtrip():
    r, _ = simulate(SP500, 5000, math.sqrt(0.5), seed=0)
    rep = fit(r)
    assert rep.boundary["alpha1"]
    assert rep.params.alpha1 == 0.0
    assert rep.std_errors["alpha1"] == 0.0 and rep.p_values["alpha1"] == 1.0
    assert "(boundary)" in rep.table()
    again = FitReport.from_json(rep.to_json())
    assert again.params == rep.params
    assert again.std_errors == rep.std_errors
    assert again.log_likelihood == rep.log_likelihood


def test_fit_normal_noise():
    r, _ = simulate(FINITE_KURTOSIS, 3000, math.sqrt(2.0), seed=4)
    rep = fit(r, noise="normal")
    assert rep.params.noise == NoiseFamily.normal()
    assert set(rep.estimates) == {"alpha0", "alpha1", "beta1", "gamma1"}
    assert rep.params.persistence < 1


def test_fit_input_errors():
    with pytest.raises(GarchError):
        fit(np.random.default_rng(0).standard_normal(100))
    with pytest.raises(GarchError):
        fit(np.ones(500))
    with pytest.raises(GarchError):
        fit(np.random.default_rng(0).standard_normal(500), noise="laplace")


DEGENERATE = GjrGarchParams(4.0, 0.0, 0.0, 0.0)


def test_constant_variance_degenerate_case():
    r = np.random.default_rng(0).standard_normal(50) * 3
    s = filter_volatility(DEGENERATE, r, 1.0).values
    assert s[0] == 1.0 and np.all(s[1:] == 2.0)
    assert unconditional_variance(GjrGarchParams(7.0, 0.0, 0.0, 0.0)) == 7.0


def test_spec_hand_case_with_leverage():
    p = GjrGarchParams(0.1, 0.2, 0.5, 0.2)
    assert filter_volatility(p, [-1.0, 0.0], 1.0).values[1] ** 2 == pytest.approx(1.0, abs=1e-15)


def test_degenerate_log_likelihood_closed_form():
    sigma = 2.0
    expected = 2 * (-0.5 * math.log(2 * math.pi) - math.log(sigma))
    assert log_likelihood(DEGENERATE, [0.0, 0.0], sigma) == pytest.approx(expected, abs=1e-12)


def test_true_parameters_beat_perturbed_beta():
    r, _ = simulate(SP500, 20000, math.sqrt(0.5), seed=6)
    at_truth = log_likelihood(SP500, r, math.sqrt(0.5))
    for factor in (0.8, 1.2):
        beta = SP500.beta1 * factor
        if SP500.alpha1 + beta + SP500.gamma1 / 2 >= 1:
            # +20% on beta1 leaves the stationary region; the likelihood is undefined there
            with pytest.raises(GarchError):
                log_likelihood(GjrGarchParams(SP500.alpha0, SP500.alpha1, beta, SP500.gamma1, SP500.noise), r, 0.7)
            continue
        other = GjrGarchParams(SP500.alpha0, SP500.alpha1, beta, SP500.gamma1, SP500.noise)
        assert at_truth > log_likelihood(other, r, math.sqrt(0.5))


def test_iid_degenerate_simulation():
    r, s = simulate(GjrGarchParams(1.0, 0.0, 0.0, 0.0), 10 ** 6, 1.0, seed=3)
    sq = r.values ** 2
    acf1 = np.corrcoef(sq[:-1], sq[1:])[0, 1]
    assert abs(acf1) < 0.01
    assert np.all(s.values == 1.0)


def test_fit_on_white_noise():
    r = 2.0 * np.random.default_rng(8).standard_normal(3000)
    rep = fit(r, noise="normal")
    for name in ("alpha1", "gamma1"):
        assert abs(rep.estimates[name]) <= 2 * rep.std_errors[name] or rep.boundary[name]
    assert 3.6 <= unconditional_variance(rep.params) <= 4.4


@pytest.mark.parametrize("persistence,tau", [(1 / math.e, 1.0), (0.5, 1 / math.log(2))])
def test_relaxation_time_closed_forms(persistence, tau):
    assert relaxation_time(GjrGarchParams(0.1, 0.0, persistence, 0.0)) == pytest.approx(tau, rel=1e-12)


def test_stationarity_table_values():
    assert stationarity_check(MERVAL).stationary
    assert stationarity_check(MERVAL).margin == pytest.approx(0.034)
    assert not stationarity_check(GjrGarchParams(0.1, 0.6, 0.6, 0.0))
    with pytest.raises(GarchError):
        unconditional_variance(GjrGarchParams(0.1, 0.25, 0.5, 0.5))
