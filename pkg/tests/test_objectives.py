import math

import numpy as np
import pytest
from conftest import central_difference, make_dataset

from fairpareto import data, objectives
from fairpareto.errors import SchemaError
from fairpareto.model import LinearModel
from fairpareto.objectives import (
    ObjectiveSpec,
    build_objectives,
    di_binary,
    di_binary_grad,
    di_multi,
    di_multi_grad,
    eq_opp_fnr,
    eq_opp_fnr_grad,
    fairness_report,
    logistic_loss,
    logistic_loss_grad,
    soft_max,
)


def _dataset_from_margins(margins, a, labels=None):
    """1-feature dataset whose margins under c=1, b=0 equal ``margins``."""
    margins = np.asarray(margins, dtype=float)
    n = margins.size
    labels = np.ones(n, dtype=int) if labels is None else np.asarray(labels)
    return data.Dataset(margins[:, None], labels, {"g": np.asarray(a, dtype=int)},
                        (data.Attribute("g", 2),))


UNIT = np.array([1.0, 0.0])  # packed (c=1, b=0) for 1-feature datasets


# --- logistic loss ---------------------------------------------------------

def test_loss_at_origin_is_log_two(small_dataset):
    x = np.zeros(small_dataset.feature_dim + 1)
    assert logistic_loss(x, small_dataset) == pytest.approx(math.log(2), abs=1e-12)


def test_loss_single_sample_large_margin():
    ds = _dataset_from_margins([10.0], [0], labels=[1])
    assert logistic_loss(UNIT, ds) == pytest.approx(math.log1p(math.exp(-10)))
    assert logistic_loss(UNIT, ds) == pytest.approx(4.5398e-5, rel=1e-3)


def test_loss_regularizer_added_exactly(small_dataset):
    x = np.zeros(small_dataset.feature_dim + 1)
    x[0] = 2.0
    base = logistic_loss(x, small_dataset, lambda_reg=0.0)
    assert logistic_loss(x, small_dataset, lambda_reg=1.0) == pytest.approx(base + 2.0)


def test_loss_stable_at_extreme_margins():
    ds = _dataset_from_margins([700.0, -700.0], [0, 1], labels=[1, -1])
    assert np.isfinite(logistic_loss(UNIT, ds))
    assert np.all(np.isfinite(logistic_loss_grad(UNIT, ds)))


def test_loss_grad_hand_value():
    # single sample at c=0, b=0: gradient is -y/2 * (z, 1)
    rng = np.random.default_rng(3)
    z = rng.normal(size=3)
    for y in (-1, 1):
        ds = data.Dataset(z[None, :], np.array([y]), {"g": np.array([0])},
                          (data.Attribute("g", 2),))
        grad = logistic_loss_grad(np.zeros(4), ds)
        assert np.allclose(grad, -y / 2 * np.append(z, 1.0), atol=1e-12)


def test_loss_convexity_midpoint():
    ds = make_dataset(n=60, seed=4)
    rng = np.random.default_rng(5)
    for _ in range(25):
        u, v = rng.normal(size=(2, ds.feature_dim + 1))
        mid = logistic_loss((u + v) / 2, ds)
        assert mid <= (logistic_loss(u, ds) + logistic_loss(v, ds)) / 2 + 1e-12


# --- binary disparate-impact proxy ----------------------------------------

def test_di_binary_worked_example():
    ds = _dataset_from_margins([0.0, 2.0], [0, 1])
    assert di_binary(UNIT, ds, "g") == pytest.approx(0.25, abs=1e-15)


def test_di_binary_constant_attribute_is_zero():
    ds = data.Dataset(np.array([[1.0], [2.0]]), np.array([1, -1]),
                      {"g": np.array([1, 1])}, (data.Attribute("g", 2),))
    assert di_binary(UNIT, ds, "g") == 0.0
    assert np.allclose(di_binary_grad(UNIT, ds, "g"), 0.0)


def test_di_binary_constant_margins_is_zero():
    ds = _dataset_from_margins([3.0, 3.0, 3.0, 3.0], [0, 1, 0, 1])
    assert di_binary(UNIT, ds, "g") == pytest.approx(0.0, abs=1e-30)


def test_di_binary_relabel_invariance():
    ds = make_dataset(n=30, seed=6)
    flipped = data.Dataset(ds.features, ds.labels,
                           {"g": 1 - ds.sensitive["g"], "r": ds.sensitive["r"]},
                           ds.attributes)
    rng = np.random.default_rng(7)
    x = rng.normal(size=ds.feature_dim + 1)
    assert di_binary(x, ds, "g") == pytest.approx(di_binary(x, flipped, "g"))


def test_di_binary_rejects_multivalued(small_dataset):
    x = np.zeros(small_dataset.feature_dim + 1)
    with pytest.raises(SchemaError, match="multi"):
        di_binary(x, small_dataset, "r")


def test_di_binary_batch_uses_full_mean():
    # the centered indicator keeps the full-dataset mean under a batch
    ds = _dataset_from_margins([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1])
    batch = np.array([2, 3])  # both from group 1: batch mean would center to 0
    value = di_binary(UNIT, ds, "g", batch=batch)
    assert value == pytest.approx(np.mean((1 - 0.5) * np.array([3.0, 4.0])) ** 2)
    assert value > 0


# --- smoothed maximum and multi-valued proxy -------------------------------

def test_soft_max_of_equal_arguments():
    assert soft_max([0.7, 0.7, 0.7], beta=8.0) == pytest.approx(0.7)


def test_soft_max_two_values_hand_computed():
    expected = math.exp(8) / (1 + math.exp(8))
    assert soft_max([0.0, 1.0], beta=8.0) == pytest.approx(expected)
    assert expected == pytest.approx(0.999665, abs=1e-6)


def test_soft_max_bounds_and_hard_limit():
    rng = np.random.default_rng(8)
    for _ in range(50):
        v = rng.uniform(0, 3, size=4)
        s = soft_max(v, beta=8.0)
        assert v.min() - 1e-12 <= s <= v.max() + 1e-12
    # one argument above the rest by >= 40/beta pins the hard max
    v = np.array([0.1, 0.2, 0.2 + 40 / 8.0])
    assert soft_max(v, beta=8.0) == pytest.approx(v.max(), abs=1e-12)


def test_soft_max_large_beta_matches_hard_max():
    v = np.array([0.3, 1.4, 0.9])
    assert soft_max(v, beta=200.0) == pytest.approx(v.max(), abs=1e-6)


def test_soft_max_overflow_safe():
    assert np.isfinite(soft_max([500.0, 900.0], beta=8.0))


def test_di_multi_equals_binary_structure(small_dataset):
    rng = np.random.default_rng(9)
    x = rng.normal(size=small_dataset.feature_dim + 1)
    from fairpareto.objectives import category_covariances

    covs = category_covariances(x, small_dataset, "r")
    assert di_multi(x, small_dataset, "r", beta=8.0) == pytest.approx(
        soft_max(covs**2, 8.0))


def test_di_multi_relabel_invariance_of_binary_case():
    ds = make_dataset(n=30, seed=10)
    x = np.random.default_rng(11).normal(size=ds.feature_dim + 1)
    flipped = data.Dataset(ds.features, ds.labels,
                           {"g": 1 - ds.sensitive["g"], "r": ds.sensitive["r"]},
                           ds.attributes)
    assert di_multi(x, ds, "g", 8.0) == pytest.approx(di_multi(x, flipped, "g", 8.0))


# --- equal-opportunity proxy ------------------------------------------------

def test_eq_opp_negative_label_contribution_is_constant():
    # for y=-1 the gated score is 0 and the smoothed min gives -log(2)/beta
    from fairpareto.objectives import _smoothed_hinge

    assert _smoothed_hinge(np.array([0.0]), 8.0)[0] == pytest.approx(-math.log(2) / 8)


def test_eq_opp_positive_large_margin_is_nearly_zero():
    from fairpareto.objectives import _smoothed_hinge

    assert abs(_smoothed_hinge(np.array([3.0]), 8.0)[0]) < 2e-11


def test_eq_opp_constant_attribute_is_zero():
    ds = _dataset_from_margins([1.0, -1.0, 2.0], [1, 1, 1], labels=[1, 1, -1])
    assert eq_opp_fnr(UNIT, ds, "g", 8.0) == 0.0


def test_eq_opp_nonnegative_and_needs_positives(small_dataset):
    rng = np.random.default_rng(12)
    for _ in range(10):
        x = rng.normal(size=small_dataset.feature_dim + 1)
        assert eq_opp_fnr(x, small_dataset, "g", 8.0) >= 0.0
    all_neg = data.Dataset(small_dataset.features,
                           -np.ones(len(small_dataset), dtype=int),
                           dict(small_dataset.sensitive), small_dataset.attributes)
    with pytest.raises(SchemaError, match="positive"):
        eq_opp_fnr(np.zeros(small_dataset.feature_dim + 1), all_neg, "g", 8.0)


# --- gradients match central finite differences -----------------------------

def _bound_objectives(ds):
    specs = [ObjectiveSpec("logistic_loss", lambda_reg=0.3),
             ObjectiveSpec("di_binary", attribute="g"),
             ObjectiveSpec("di_multi", attribute="r", beta=8.0)]
    bound = build_objectives(specs, ds)
    bound += build_objectives(
        [ObjectiveSpec("logistic_loss"),
         ObjectiveSpec("eq_opp_fnr", attribute="g", beta=8.0)], ds)[1:]
    return bound


def test_all_gradients_match_finite_differences():
    ds = make_dataset(n=40, d=3, seed=0)
    rng = np.random.default_rng(1)
    for obj in _bound_objectives(ds):
        for _ in range(20):
            x = rng.uniform(-1, 1, size=ds.feature_dim + 1)
            analytic = obj.grad(x)
            numeric = central_difference(obj.value, x)
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-8)
            assert rel < 1e-5, (obj.spec.kind, rel)


def test_batch_gradients_match_finite_differences():
    ds = make_dataset(n=50, d=3, seed=2)
    rng = np.random.default_rng(3)
    batch = rng.integers(0, 50, size=16)
    for obj in _bound_objectives(ds):
        x = rng.uniform(-1, 1, size=ds.feature_dim + 1)
        analytic = obj.grad(x, batch)
        numeric = central_difference(lambda v: obj.value(v, batch), x)
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-8)
        assert rel < 1e-5


def test_di_grad_zero_when_attribute_constant():
    ds = data.Dataset(np.array([[1.0], [2.0]]), np.array([1, -1]),
                      {"g": np.array([0, 0])}, (data.Attribute("g", 2),))
    assert np.allclose(di_binary_grad(UNIT, ds, "g"), 0.0)


# --- fairness report ---------------------------------------------------------

def test_report_perfect_predictor_zero_fnr():
    ds = _dataset_from_margins([1.0, -2.0, 3.0, -0.5], [0, 0, 1, 1],
                               labels=[1, -1, 1, -1])
    report = fairness_report(UNIT, ds, "g")
    assert report.fnr == (0.0, 0.0)
    assert report.cv_fnr == 0.0


def test_report_constant_positive_predictor():
    ds = _dataset_from_margins([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1],
                               labels=[1, -1, 1, -1])
    report = fairness_report(UNIT, ds, "g")
    assert report.positive_rates == (1.0, 1.0)
    assert report.cv_score == 0.0


def test_report_multivalued_cv_is_max_gap():
    # group rates engineered to (0.6, 0.2, 0.5)
    margins, codes = [], []
    for g, rate, size in ((0, 0.6, 5), (1, 0.2, 5), (2, 0.5, 4)):
        k = round(rate * size)
        margins += [1.0] * k + [-1.0] * (size - k)
        codes += [g] * size
    ds = data.Dataset(np.asarray(margins, float)[:, None],
                      np.ones(len(margins), dtype=int),
                      {"r": np.asarray(codes)}, (data.Attribute("r", 3),))
    report = fairness_report(UNIT, ds, "r", with_fnr=False)
    assert report.positive_rates == (0.6, 0.2, 0.5)
    assert report.cv_score == pytest.approx(0.4)


def test_report_empty_group_names_group():
    ds = _dataset_from_margins([1.0, 2.0], [0, 0], labels=[1, 1])
    with pytest.raises(SchemaError, match="group 1"):
        fairness_report(UNIT, ds, "g")


def test_report_boundary_counts_as_positive():
    ds = _dataset_from_margins([0.0, -1.0], [0, 1], labels=[1, 1])
    report = fairness_report(UNIT, ds, "g", with_fnr=False)
    assert report.positive_rates == (1.0, 0.0)


def test_objective_set_size_validated(small_dataset):
    with pytest.raises(SchemaError, match="2 or 3"):
        build_objectives([ObjectiveSpec("logistic_loss")], small_dataset)


def test_cv_functions_on_model_objects(small_dataset):
    model = LinearModel(c=np.ones(small_dataset.feature_dim), b=0.0)
    assert objectives.logistic_loss(model, small_dataset) > 0
