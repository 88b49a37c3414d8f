"""Threshold classifier and certification chain.

Point estimates are checked against numpy, error probabilities against
closed forms and a large-sample empirical oracle, envelope bounds against
hand-computed quantile values, and the certification identity directly.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sil_assessor.classifier import (CertifiedError, DegenerateSampleError, ErrorKind,
                                     GaussianClassParams, Label, LabeledSample,
                                     ThresholdPolicy, certify, classify,
                                     error_probabilities, fit_class, select_threshold,
                                     split_samples, worst_case_envelope)
from sil_assessor.statdist import normal_quantile


def _params(m, sigma, n=None):
    return GaussianClassParams(m=m, sigma=sigma, n=n)


# ---------------------------------------------------------------------------
# fitting

def test_fit_three_values():
    est = fit_class(LabeledSample((1.0, 2.0, 3.0), Label.LEFT))
    assert est.m == 2.0
    assert est.sigma == 1.0
    assert est.n == 3


def test_fit_identical_values_degenerate():
    with pytest.raises(DegenerateSampleError):
        fit_class(LabeledSample((5.0, 5.0, 5.0), Label.RIGHT))


def test_fit_matches_numpy_on_large_sample():
    rng = np.random.default_rng(123)
    values = tuple(float(v) for v in rng.normal(0.7, 1.3, size=1000))
    est = fit_class(LabeledSample(values, Label.LEFT))
    arr = np.asarray(values)
    assert abs(est.m - float(arr.mean())) <= 1e-12
    assert abs(est.sigma - float(arr.std(ddof=1))) <= 1e-12


def test_labeled_sample_validation():
    with pytest.raises(ValueError):
        LabeledSample((1.0,), Label.LEFT)
    with pytest.raises(ValueError):
        LabeledSample((1.0, math.nan), Label.LEFT)


def test_class_params_validation():
    with pytest.raises(DegenerateSampleError):
        _params(0.0, 0.0)
    with pytest.raises(DegenerateSampleError):
        _params(0.0, -1.0)
    with pytest.raises(ValueError):
        _params(math.inf, 1.0)
    with pytest.raises(ValueError):
        _params(0.0, 1.0, n=1)
    assert _params(0.0, 1.0).known
    assert not _params(0.0, 1.0, n=5).known


# ---------------------------------------------------------------------------
# decision rule

def test_classify_tie_goes_left():
    assert classify(1.0, 1.0) is Label.LEFT
    assert classify(math.nextafter(1.0, math.inf), 1.0) is Label.RIGHT
    assert classify(0.0, 1.0) is Label.LEFT


def test_classify_rejects_nonfinite():
    with pytest.raises(ValueError):
        classify(math.nan, 0.0)
    with pytest.raises(ValueError):
        classify(math.inf, 0.0)


# ---------------------------------------------------------------------------
# error probabilities

def test_alpha_half_at_left_mean():
    probs = error_probabilities(_params(0.0, 1.0), _params(2.0, 1.0), z=0.0)
    assert probs.alpha == 0.5


def test_symmetric_midpoint_errors():
    # z one sigma from both means: alpha = beta = 1 - Phi(1)
    probs = error_probabilities(_params(0.0, 1.0), _params(2.0, 1.0), z=1.0)
    assert abs(probs.alpha - 0.15866) <= 1e-5
    assert abs(probs.beta - 0.15866) <= 1e-5


def test_far_threshold_alpha_negligible():
    probs = error_probabilities(_params(0.0, 1.0), _params(20.0, 1.0), z=10.0)
    assert probs.alpha < 1e-15


def test_complements_exact():
    probs = error_probabilities(_params(0.3, 0.7), _params(2.1, 1.4), z=1.2)
    assert probs.alpha + probs.correct_left == 1.0
    assert probs.beta + probs.correct_right == 1.0


def test_error_probabilities_rejects_nonfinite_threshold():
    with pytest.raises(ValueError):
        error_probabilities(_params(0.0, 1.0), _params(2.0, 1.0), z=math.inf)


def test_alpha_matches_empirical_frequency():
    # 1e6 draws from the left class against the analytic first-kind error
    left, z = _params(0.0, 1.0), 1.0
    alpha = error_probabilities(left, _params(2.0, 1.0), z).alpha
    rng = np.random.default_rng(2024)
    draws = rng.normal(left.m, left.sigma, size=1_000_000)
    observed = float(np.mean(draws > z))
    spread = 3.0 * math.sqrt(alpha * (1.0 - alpha) / draws.size)
    assert abs(observed - alpha) <= spread


@given(z1=st.floats(-30.0, 30.0), z2=st.floats(-30.0, 30.0))
@settings(max_examples=100, deadline=None)
def test_alpha_nonincreasing_beta_nondecreasing_in_threshold(z1, z2):
    lo, hi = min(z1, z2), max(z1, z2)
    left, right = _params(0.0, 1.0), _params(2.0, 1.0)
    at_lo = error_probabilities(left, right, lo)
    at_hi = error_probabilities(left, right, hi)
    assert at_hi.alpha <= at_lo.alpha + 1e-12
    assert at_hi.beta >= at_lo.beta - 1e-12


# ---------------------------------------------------------------------------
# worst-case envelope

def test_sigma_upper_known_quantile_value():
    # n=30: sqrt(29 / chi2_quantile(0.05, 29)) = sqrt(29 / 17.708) = 1.2797
    env = worst_case_envelope(_params(0.0, 1.0, n=30), _params(5.0, 1.0, n=30), 0.05)
    assert abs(env.sigma_left_up - 1.2797) <= 1e-3
    assert env.sigma_left_up == env.sigma_right_up


def test_mean_shift_known_quantile_value():
    # n=25: t_quantile(0.95, 24) / 5 = 1.7109 / 5 = 0.3422
    env = worst_case_envelope(_params(0.0, 1.0, n=25), _params(5.0, 1.0, n=25), 0.05)
    assert abs(env.m_left_worst - 0.3422) <= 1e-3
    assert abs(env.m_right_worst - (5.0 - 0.3422)) <= 1e-3


def test_envelope_directions():
    env = worst_case_envelope(_params(0.0, 0.8, n=40), _params(3.0, 1.1, n=60), 0.01)
    assert env.sigma_left_up > 0.8
    assert env.sigma_right_up > 1.1
    assert env.m_left_worst > 0.0
    assert env.m_right_worst < 3.0


def test_envelope_mean_shift_vanishes_near_half():
    env = worst_case_envelope(_params(0.0, 1.0, n=30), _params(5.0, 1.0, n=30),
                              0.4999999)
    assert abs(env.m_left_worst) <= 1e-5
    assert env.sigma_left_up > 1.0  # median of chi2 sits below its dof


def test_envelope_rejects_known_parameters():
    with pytest.raises(ValueError):
        worst_case_envelope(_params(0.0, 1.0), _params(5.0, 1.0, n=30), 0.05)
    with pytest.raises(ValueError):
        worst_case_envelope(_params(0.0, 1.0, n=30), _params(5.0, 1.0), 0.05)


@pytest.mark.parametrize("gamma", [0.0, 0.5, -0.1, 1.0])
def test_envelope_rejects_bad_gamma(gamma):
    with pytest.raises(ValueError):
        worst_case_envelope(_params(0.0, 1.0, n=30), _params(5.0, 1.0, n=30), gamma)


@given(n=st.integers(2, 300), sigma=st.floats(0.01, 50.0),
       gamma=st.floats(1e-4, 0.49))
@settings(max_examples=100, deadline=None)
def test_envelope_bounds_strictly_worse(n, sigma, gamma):
    env = worst_case_envelope(_params(0.0, sigma, n=n), _params(100.0, sigma, n=n),
                              gamma)
    assert env.sigma_left_up > sigma
    assert env.m_left_worst > 0.0
    assert env.m_right_worst < 100.0


# ---------------------------------------------------------------------------
# certification

def test_certified_is_worst_alpha_plus_two_gamma():
    cert = certify(_params(0.0, 1.0, n=50), _params(4.0, 1.0, n=50), z=2.0,
                   gamma=0.0125)
    assert cert.gamma_terms == 2
    assert cert.certified_dangerous == min(1.0, cert.alpha_worst + 2 * 0.0125)


def test_certified_reproduces_default_budget_share():
    # threshold placed so the worst-case first-kind error is exactly 0.025;
    # with gamma 0.0125 the certified value lands on 0.05
    gamma = 0.0125
    left = _params(0.0, 1.0, n=100)
    env = worst_case_envelope(left, _params(50.0, 1.0, n=100), gamma)
    z = env.m_left_worst + env.sigma_left_up * normal_quantile(0.975)
    cert = certify(left, _params(50.0, 1.0, n=100), z, gamma)
    assert abs(cert.alpha_worst - 0.025) <= 1e-9
    assert abs(cert.certified_dangerous - 0.05) <= 1e-9


def test_known_parameters_bypass_surcharge():
    left = _params(0.0, 1.0)  # exact: no estimation uncertainty
    right = _params(4.0, 1.0, n=50)
    cert = certify(left, right, z=2.0, gamma=0.05)
    assert cert.gamma_terms == 0
    assert cert.certified_dangerous == cert.alpha_worst
    point = error_probabilities(left, right, z=2.0)
    assert cert.alpha_worst == point.alpha  # alpha depends on the left class only


def test_known_right_bypasses_surcharge_for_second_kind():
    left = _params(0.0, 1.0, n=50)
    right = _params(4.0, 1.0)
    cert = certify(left, right, z=2.0, gamma=0.05, dangerous=ErrorKind.SECOND_KIND)
    assert cert.gamma_terms == 0
    assert cert.dangerous is ErrorKind.SECOND_KIND
    assert cert.certified_dangerous == cert.beta_worst
    assert cert.beta_worst == error_probabilities(left, right, z=2.0).beta


def test_certified_caps_at_one():
    cert = certify(_params(0.0, 1.0, n=2), _params(0.5, 1.0, n=2), z=-50.0,
                   gamma=0.49)
    assert cert.certified_dangerous == 1.0


@given(n=st.integers(2, 200), sigma=st.floats(0.05, 20.0),
       gamma=st.floats(1e-3, 0.49), offset=st.floats(0.0, 40.0))
@settings(max_examples=150, deadline=None)
def test_worst_case_alpha_dominates_point_alpha_right_of_mean(n, sigma, gamma, offset):
    # holds whenever the threshold sits at or above the fitted left mean:
    # the worst-case standardized margin is then never larger than the
    # point-estimate one
    left = _params(1.0, sigma, n=n)
    right = _params(1000.0, sigma, n=n)
    z = left.m + offset
    cert = certify(left, right, z, gamma)
    point = error_probabilities(left, right, z)
    assert cert.alpha_worst >= point.alpha - 1e-12


# ---------------------------------------------------------------------------
# threshold selection

def test_equal_error_symmetric_midpoint():
    z = select_threshold(_params(0.0, 1.0), _params(2.0, 1.0),
                         ThresholdPolicy.equal_error())
    assert abs(z - 1.0) <= 1e-9
    probs = error_probabilities(_params(0.0, 1.0), _params(2.0, 1.0), z)
    assert abs(probs.alpha - probs.beta) <= 1e-12


def test_equal_error_unequal_spreads_balances():
    left, right = _params(0.0, 0.5), _params(3.0, 2.0)
    z = select_threshold(left, right, ThresholdPolicy.equal_error())
    probs = error_probabilities(left, right, z)
    assert abs(probs.alpha - probs.beta) <= 1e-12


def test_alpha_target_places_quantile():
    left = _params(0.0, 1.0)
    z = select_threshold(left, _params(5.0, 1.0), ThresholdPolicy.alpha_target(0.025))
    assert abs(z - 1.95996) <= 1e-4
    probs = error_probabilities(left, _params(5.0, 1.0), z)
    assert abs(probs.alpha - 0.025) <= 1e-10


def test_fixed_policy_identity():
    z = select_threshold(_params(0.0, 1.0), _params(2.0, 1.0),
                         ThresholdPolicy.fixed(1.25))
    assert z == 1.25


def test_solving_rejects_unordered_means():
    with pytest.raises(ValueError):
        select_threshold(_params(2.0, 1.0), _params(0.0, 1.0),
                         ThresholdPolicy.equal_error())
    with pytest.raises(ValueError):
        select_threshold(_params(1.0, 1.0), _params(1.0, 1.0),
                         ThresholdPolicy.alpha_target(0.1))


def test_policy_validation():
    with pytest.raises(ValueError):
        ThresholdPolicy(kind="median")
    with pytest.raises(ValueError):
        ThresholdPolicy(kind="fixed")
    with pytest.raises(ValueError):
        ThresholdPolicy(kind="alpha_target", alpha=1.5)


# ---------------------------------------------------------------------------
# sample bookkeeping

def test_split_samples_orders_by_label():
    left = LabeledSample((0.0, 1.0), Label.LEFT)
    right = LabeledSample((5.0, 6.0), Label.RIGHT)
    assert split_samples([right, left]) == (left, right)


def test_split_samples_missing_class():
    left = LabeledSample((0.0, 1.0), Label.LEFT)
    with pytest.raises(ValueError, match="right"):
        split_samples([left])
