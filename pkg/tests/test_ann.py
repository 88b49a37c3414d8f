"""Single-hidden-layer network: forward transcription, training, evidence.

The forward pass is checked against an independent pure-Python transcription
of the same formula; gradients against central finite differences (with the
step-squared truncation scaling as a second witness); the held-out bound
against the exact binomial quantile from scipy.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from sil_assessor.ann import (AnnModel, CostKind, Decision, GateRule,
                              Hyperparameters, Label, PointSet2D, StopReason,
                              approximation_check, clopper_pearson_upper, decide,
                              forward, forward_batch, gated_decide,
                              gated_heldout_failures, gradient_check,
                              heldout_error_bound, model_from_json, model_to_json,
                              rings_set, separable_set, train,
                              _gradients, _hidden, _init_params)

_FAST_HP = Hyperparameters(learning_rate=0.05, max_epochs=6000, patience=800,
                           tol=1e-12, lr_final_fraction=0.01, seed=3)


def _random_model(seed, n_nodes=3, scale=1.0, cost=CostKind.CROSS_ENTROPY):
    rng = np.random.default_rng(seed)
    return AnnModel(
        n_nodes=n_nodes, input_dim=2,
        hidden_weights=rng.normal(0.0, scale, (n_nodes, 2)),
        offsets=rng.normal(0.0, scale, n_nodes),
        output_weights=rng.normal(0.0, scale, n_nodes),
        cost=cost,
    )


def _random_points(seed, m=12):
    rng = np.random.default_rng(seed)
    labels = tuple(Label.LEFT if i % 2 else Label.RIGHT for i in range(m))
    return PointSet2D(rng.normal(0.0, 1.0, (m, 2)), labels)


def _reference_forward(model, x):
    # independent transcription of F(x) = sum_i v_i / (1 + exp(-(w_i.x + b_i)))
    total = 0.0
    for i in range(model.n_nodes):
        s = model.offsets[i]
        for j in range(model.input_dim):
            s += model.hidden_weights[i, j] * x[j]
        total += model.output_weights[i] / (1.0 + math.exp(-s))
    return total


def _always_right():
    # zero pre-activations: F = sum(v) * 0.5 = 0.5 > 0 everywhere
    return AnnModel(n_nodes=1, input_dim=2, hidden_weights=np.zeros((1, 2)),
                    offsets=np.zeros(1), output_weights=np.ones(1))


def _linear_separator(k=100.0):
    # sigma(k*x1) - 0.25: positive for x1 > 0, negative for x1 < 0
    return AnnModel(n_nodes=2, input_dim=2,
                    hidden_weights=np.array([[k, 0.0], [0.0, 0.0]]),
                    offsets=np.zeros(2), output_weights=np.array([1.0, -0.5]))


# ---------------------------------------------------------------------------
# forward pass

def test_zero_output_weights_give_zero():
    model = AnnModel(n_nodes=4, input_dim=2, hidden_weights=np.ones((4, 2)),
                     offsets=np.ones(4), output_weights=np.zeros(4))
    assert forward(model, (3.0, -1.0)) == 0.0


def test_single_node_identity_point():
    model = AnnModel(n_nodes=1, input_dim=2, hidden_weights=np.zeros((1, 2)),
                     offsets=np.zeros(1), output_weights=np.ones(1))
    assert forward(model, (7.0, -2.0)) == 0.5


def test_forward_matches_independent_transcription():
    rng = np.random.default_rng(99)
    for seed in range(5):
        model = _random_model(seed, n_nodes=6, scale=2.0)
        for _ in range(20):
            x = rng.normal(0.0, 3.0, 2)
            assert abs(forward(model, x) - _reference_forward(model, x)) <= 1e-12


def test_forward_batch_matches_scalar():
    model = _random_model(1, n_nodes=5)
    X = np.random.default_rng(2).normal(0.0, 1.0, (30, 2))
    F = forward_batch(model, X)
    for i in range(30):
        assert abs(F[i] - forward(model, X[i])) <= 1e-14


def test_dimension_mismatch_rejected():
    model = _random_model(0)
    with pytest.raises(ValueError):
        forward(model, (1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        forward_batch(model, np.zeros((4, 3)))


def test_decision_tie_goes_left():
    model = AnnModel(n_nodes=1, input_dim=2, hidden_weights=np.zeros((1, 2)),
                     offsets=np.zeros(1), output_weights=np.zeros(1))
    assert decide(model, (0.0, 0.0)) is Decision.LEFT
    assert decide(_always_right(), (0.0, 0.0)) is Decision.RIGHT


@given(scale=st.floats(1e-3, 1e3), x1=st.floats(-5.0, 5.0), x2=st.floats(-5.0, 5.0))
@settings(max_examples=100, deadline=None)
def test_decision_invariant_under_positive_output_scaling(scale, x1, x2):
    model = _random_model(17, n_nodes=4)
    scaled = AnnModel(n_nodes=4, input_dim=2,
                      hidden_weights=model.hidden_weights.copy(),
                      offsets=model.offsets.copy(),
                      output_weights=model.output_weights * scale)
    assert decide(model, (x1, x2)) is decide(scaled, (x1, x2))


def test_model_validation():
    with pytest.raises(ValueError):
        AnnModel(n_nodes=2, input_dim=2, hidden_weights=np.zeros((3, 2)),
                 offsets=np.zeros(2), output_weights=np.zeros(2))
    with pytest.raises(ValueError):
        AnnModel(n_nodes=1, input_dim=2, hidden_weights=np.full((1, 2), np.nan),
                 offsets=np.zeros(1), output_weights=np.zeros(1))


def test_model_arrays_immutable():
    model = _random_model(0)
    with pytest.raises(ValueError):
        model.hidden_weights[0, 0] = 5.0


# ---------------------------------------------------------------------------
# training

def test_separable_training_reaches_full_accuracy():
    model, report = train(separable_set(), n_nodes=8)
    assert report.train_accuracy == 1.0
    assert report.final_cost < 0.05
    assert report.epochs_run <= 4000


def test_training_is_deterministic():
    data = separable_set()
    m1, r1 = train(data, n_nodes=8)
    m2, r2 = train(data, n_nodes=8)
    assert np.array_equal(m1.hidden_weights, m2.hidden_weights)
    assert np.array_equal(m1.offsets, m2.offsets)
    assert np.array_equal(m1.output_weights, m2.output_weights)
    assert r1 == r2


def test_nonlinear_boundary_learned():
    # disk inside annulus: no linear separator exists, so high accuracy
    # certifies that the hidden layer is actually doing the work
    model, report = train(rings_set(), n_nodes=32)
    assert report.train_accuracy >= 0.98


def test_zero_epoch_budget_returns_init():
    data = separable_set(n_per_class=10)
    hp = Hyperparameters(max_epochs=0, seed=5)
    model, report = train(data, n_nodes=3, hyperparameters=hp)
    w, b, v = _init_params(3, 2, hp)
    assert np.array_equal(model.hidden_weights, w)
    assert np.array_equal(model.offsets, b)
    assert np.array_equal(model.output_weights, v)
    assert report.epochs_run == 0
    assert report.stop_reason is StopReason.EPOCH_LIMIT


def test_patience_stop_reports_convergence():
    data = separable_set(n_per_class=20)
    hp = Hyperparameters(max_epochs=100000, patience=200, tol=1e-8, seed=1)
    _, report = train(data, n_nodes=4, hyperparameters=hp)
    assert report.stop_reason is StopReason.CONVERGED
    assert report.epochs_run < 100000


def test_training_rejects_degenerate_data():
    with pytest.raises(ValueError, match="single class"):
        train(PointSet2D(np.zeros((3, 2)), (Label.LEFT,) * 3), n_nodes=2)


def test_squared_error_cost_also_separates():
    data = separable_set(n_per_class=50)
    _, report = train(data, n_nodes=8, cost=CostKind.SQUARED_ERROR)
    assert report.train_accuracy == 1.0


def test_hyperparameter_validation():
    with pytest.raises(ValueError):
        Hyperparameters(learning_rate=0.0)
    with pytest.raises(ValueError):
        Hyperparameters(patience=0)
    with pytest.raises(ValueError):
        Hyperparameters(lr_final_fraction=0.0)
    with pytest.raises(ValueError):
        Hyperparameters(max_epochs=-1)


# ---------------------------------------------------------------------------
# gradients

@pytest.mark.parametrize("cost", [CostKind.CROSS_ENTROPY, CostKind.SQUARED_ERROR])
def test_gradient_check_small_step(cost):
    model = _random_model(5, n_nodes=3, scale=2.0, cost=cost)
    assert gradient_check(model, _random_points(8), step=1e-5) <= 1e-6


def test_gradient_deviation_scales_as_step_squared():
    # central differences carry an O(step^2) truncation term; halving the
    # step must cut the deviation by about 4 while truncation dominates
    model = _random_model(5, n_nodes=3, scale=2.0, cost=CostKind.SQUARED_ERROR)
    data = _random_points(8)
    ratio = gradient_check(model, data, step=2e-2) / gradient_check(model, data, step=1e-2)
    assert 3.0 <= ratio <= 5.0


def test_gradients_symmetric_across_identical_nodes():
    # identical nodes (zero weights, equal outputs) must receive identical
    # gradient rows: any asymmetry would be a backpropagation indexing bug
    X = np.random.default_rng(3).normal(0.0, 1.0, (20, 2))
    H = _hidden(X, np.zeros((4, 2)), np.zeros(4))
    flow = np.random.default_rng(4).normal(0.0, 1.0, 20)
    gw, gb, gv = _gradients(X, H, np.ones(4), flow)
    for i in range(1, 4):
        assert np.allclose(gw[i], gw[0], atol=1e-15)
        assert abs(gb[i] - gb[0]) <= 1e-15
        assert abs(gv[i] - gv[0]) <= 1e-15


# ---------------------------------------------------------------------------
# approximation capacity

def test_constant_target_one_node_suffices():
    out = approximation_check(lambda x: 0.3, [1], hyperparameters=_FAST_HP)
    assert out[1] <= 1e-3


def test_smooth_target_improves_with_width():
    out = approximation_check(lambda x: math.sin(2.0 * math.pi * x), [1, 8],
                              hyperparameters=_FAST_HP)
    assert out[8] <= 0.1
    assert out[8] < out[1] / 5.0


def test_jump_target_leaves_plateau():
    # a discontinuity cannot be matched in sup norm by finitely many
    # bounded continuous units on a fixed grid straddling the jump
    out = approximation_check(lambda x: 0.0 if x < 0.5 else 1.0, [4],
                              hyperparameters=_FAST_HP)
    assert out[4] >= 0.1


# ---------------------------------------------------------------------------
# exact binomial upper bound

def test_binomial_bound_zero_failures_closed_form():
    assert clopper_pearson_upper(0, 1000, 0.0125) == 1.0 - 0.0125 ** (1.0 / 1000)
    assert clopper_pearson_upper(0, 10, 0.05) == 1.0 - 0.05 ** 0.1


def test_binomial_bound_all_failures():
    assert clopper_pearson_upper(7, 7, 0.01) == 1.0


def test_binomial_bound_named_value():
    assert abs(clopper_pearson_upper(1, 100, 0.05) - 0.04656) <= 1e-4


def test_binomial_bound_matches_beta_quantile():
    # the exact bound is the 1-gamma quantile of Beta(k+1, n-k)
    for k, n, gamma in [(1, 100, 0.05), (3, 50, 0.0125), (10, 200, 0.01),
                        (25, 60, 0.1), (5, 1000, 0.025)]:
        oracle = float(stats.beta.ppf(1.0 - gamma, k + 1, n - k))
        assert abs(clopper_pearson_upper(k, n, gamma) - oracle) <= 1e-9


def test_binomial_bound_monotone_in_failures():
    prev = 0.0
    for k in range(0, 30):
        cur = clopper_pearson_upper(k, 30, 0.05)
        assert cur >= prev
        prev = cur


def test_binomial_bound_monotone_in_trials():
    prev = 1.0
    for n in (10, 30, 100, 300, 1000):
        cur = clopper_pearson_upper(2, n, 0.05)
        assert cur <= prev
        prev = cur


def test_binomial_bound_validation():
    with pytest.raises(ValueError):
        clopper_pearson_upper(0, 0, 0.05)
    with pytest.raises(ValueError):
        clopper_pearson_upper(5, 4, 0.05)
    with pytest.raises(ValueError):
        clopper_pearson_upper(0, 10, 0.5)


# ---------------------------------------------------------------------------
# held-out evidence

def test_heldout_counts_joint_dangerous_event():
    pts = np.array([[-1.0, 0.0], [-2.0, 1.0], [-1.5, -1.0], [1.0, 0.0], [2.0, 1.0]])
    labels = (Label.LEFT,) * 3 + (Label.RIGHT,) * 2
    heldout = PointSet2D(pts, labels)
    # the always-right model misclassifies exactly the true-left points
    bound, failures, trials = heldout_error_bound(_always_right(), heldout, 0.05)
    assert (failures, trials) == (3, 5)
    assert bound == clopper_pearson_upper(3, 5, 0.05)
    # in the other dangerous direction nothing is ever decided left
    _, failures, trials = heldout_error_bound(_always_right(), heldout, 0.05,
                                              dangerous=Label.RIGHT)
    assert (failures, trials) == (0, 5)


def test_heldout_accepts_label_name():
    heldout = PointSet2D(np.zeros((2, 2)), (Label.LEFT, Label.RIGHT))
    a = heldout_error_bound(_always_right(), heldout, 0.05, dangerous="left")
    b = heldout_error_bound(_always_right(), heldout, 0.05, dangerous=Label.LEFT)
    assert a == b


def test_heldout_zero_failures_exact_bound():
    heldout = separable_set(n_per_class=500, seed=101)
    bound, failures, trials = heldout_error_bound(_linear_separator(), heldout, 0.0125)
    assert failures == 0
    assert trials == 1000
    assert bound == 1.0 - 0.0125 ** (1.0 / 1000)


def test_heldout_rejects_empty_set():
    with pytest.raises(ValueError):
        heldout_error_bound(_always_right(),
                            PointSet2D(np.zeros((0, 2)), ()), 0.05)


# ---------------------------------------------------------------------------
# gating

def test_empty_gate_is_identity():
    gate = GateRule(boxes=())
    model = _random_model(21)
    for x in np.random.default_rng(6).normal(0.0, 2.0, (25, 2)):
        assert gated_decide(model, gate, x) is decide(model, x)


@given(x1=st.floats(-1.0, 1.0), x2=st.floats(-1.0, 1.0))
@settings(max_examples=100, deadline=None)
def test_gate_precedence_is_absolute(x1, x2):
    gate = GateRule(boxes=(((-1.0, 1.0), (-1.0, 1.0)),))
    assert gated_decide(_always_right(), gate, (x1, x2)) is Decision.REJECT


def test_gate_fallback_configurable():
    gate = GateRule(boxes=(((-1.0, 1.0), (-1.0, 1.0)),), fallback=Decision.LEFT)
    assert gated_decide(_always_right(), gate, (0.0, 0.0)) is Decision.LEFT


def test_gate_reduces_measured_failures():
    heldout = separable_set(n_per_class=50, seed=13)
    ungated = heldout_error_bound(_always_right(), heldout, 0.05)[1]
    assert ungated == 50
    # inhibit box covering the whole left cluster
    gate = GateRule(boxes=(((-2.1, -0.2), (-2.1, 2.1)),))
    gated = gated_heldout_failures(_always_right(), gate, heldout)
    assert gated == 0


def test_gate_validation():
    with pytest.raises(ValueError):
        GateRule(boxes=(((2.0, 1.0), (0.0, 1.0)),))
    with pytest.raises(ValueError):
        GateRule(boxes=(((0.0, math.inf), (0.0, 1.0)),))


# ---------------------------------------------------------------------------
# serialization

def test_model_round_trip_exact():
    model = _random_model(33, n_nodes=7)
    clone = model_from_json(model_to_json(model))
    assert clone.n_nodes == model.n_nodes
    assert clone.input_dim == model.input_dim
    assert np.array_equal(clone.hidden_weights, model.hidden_weights)
    assert np.array_equal(clone.offsets, model.offsets)
    assert np.array_equal(clone.output_weights, model.output_weights)
    assert clone.activation is model.activation
    assert clone.cost is model.cost
    assert clone.seed == model.seed


def test_model_json_is_canonical():
    model = _random_model(33)
    assert model_to_json(model) == model_to_json(model_from_json(model_to_json(model)))


def test_model_rejects_unknown_schema():
    doc = json.loads(model_to_json(_random_model(1)))
    doc["schema_version"] = 999
    with pytest.raises(ValueError, match="schema"):
        model_from_json(json.dumps(doc))
