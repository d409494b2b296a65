"""Training objectives and their exact / batch-stochastic gradients.

All objectives are functions of the packed parameter vector x = (c, b) of a
linear classifier with margin phi(z) = c.z + b:

* ``logistic_loss``: mean softplus(-y * phi(z)) plus an optional ridge term
  on the weights.
* ``di_binary``: squared empirical covariance between a binary sensitive
  indicator and the margin (smooth disparate-impact proxy).
* ``di_multi``: smooth maximum (exponentially weighted mean, sharpness
  ``beta``) of the per-category squared covariances of a multi-valued
  attribute.
* ``eq_opp_fnr``: squared covariance between the indicator and a smoothed
  hinge psi that is active only on truly positive, wrongly scored samples
  (equal-opportunity proxy).

Indicator means are always the full-dataset means, also under mini-batches;
batch means are taken over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import expit

from fairpareto.data import Dataset
from fairpareto.errors import SchemaError
from fairpareto.model import LinearModel


def _as_vector(model) -> np.ndarray:
    if isinstance(model, LinearModel):
        return model.as_vector()
    return np.asarray(model, dtype=float)


def _margins(x: np.ndarray, Z: np.ndarray) -> np.ndarray:
    return Z @ x[:-1] + x[-1]


def _batch(dataset: Dataset, batch) -> np.ndarray:
    if batch is None:
        return np.arange(len(dataset))
    return np.asarray(batch, dtype=int)


def softplus(t: np.ndarray) -> np.ndarray:
    """log(1 + exp(t)), stable for arbitrarily large |t|."""
    return np.logaddexp(0.0, t)


def soft_max(values, beta: float) -> float:
    """Exponentially weighted mean sum(v_i e^(b v_i)) / sum(e^(b v_i)).

    Lies between min and max of the inputs and approaches the hard maximum
    as beta grows; computed with shifted exponents so large inputs cannot
    overflow.
    """
    v = np.asarray(values, dtype=float)
    w = np.exp(beta * (v - v.max()))
    return float((w * v).sum() / w.sum())


def _soft_max_weights(v: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Value of the smooth max and its partial derivatives w.r.t. each input."""
    w = np.exp(beta * (v - v.max()))
    total = w.sum()
    s = float((w * v).sum() / total)
    return s, w * (1.0 + beta * (v - s)) / total


# ---------------------------------------------------------------------------
# Prediction loss
# ---------------------------------------------------------------------------


def logistic_loss(model, dataset: Dataset, batch=None, lambda_reg: float = 0.0) -> float:
    """Mean log(1+exp(-y*margin)) over the batch plus (lambda_reg/2)*||c||^2."""
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    m = _margins(x, dataset.features[idx])
    loss = float(np.mean(softplus(-dataset.labels[idx] * m)))
    if lambda_reg:
        loss += 0.5 * lambda_reg * float(x[:-1] @ x[:-1])
    return loss


def logistic_loss_grad(model, dataset: Dataset, batch=None,
                       lambda_reg: float = 0.0) -> np.ndarray:
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    Z = dataset.features[idx]
    y = dataset.labels[idx]
    coef = -y * expit(-y * _margins(x, Z)) / idx.size
    grad = np.empty_like(x)
    grad[:-1] = Z.T @ coef
    grad[-1] = coef.sum()
    if lambda_reg:
        grad[:-1] += lambda_reg * x[:-1]
    return grad


# ---------------------------------------------------------------------------
# Disparate-impact proxies
# ---------------------------------------------------------------------------


def margin_covariance(model, dataset: Dataset, attribute: str, batch=None) -> float:
    """Mean-centered covariance (1/B) sum (a_j - abar) * margin_j for a binary
    attribute, with abar the full-dataset indicator mean."""
    attr = dataset.attribute(attribute)
    if attr.cardinality != 2:
        raise SchemaError(
            f"attribute {attribute!r} has {attr.cardinality} categories; "
            "the binary covariance needs exactly 2 (use the multi-valued proxy)"
        )
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    centered = dataset.sensitive[attribute] - dataset.indicator_means(attribute)[1]
    return float(np.mean(centered[idx] * _margins(x, dataset.features[idx])))


def di_binary(model, dataset: Dataset, attribute: str, batch=None) -> float:
    """Squared margin covariance of a binary sensitive attribute."""
    return margin_covariance(model, dataset, attribute, batch) ** 2


def di_binary_grad(model, dataset: Dataset, attribute: str, batch=None) -> np.ndarray:
    attr = dataset.attribute(attribute)
    if attr.cardinality != 2:
        raise SchemaError(f"attribute {attribute!r} is not binary")
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    Z = dataset.features[idx]
    centered = (dataset.sensitive[attribute] - dataset.indicator_means(attribute)[1])[idx]
    cov = float(np.mean(centered * _margins(x, Z)))
    # d(cov^2) = 2*cov*d(cov); d(cov)/dx is a single weighted data pass.
    grad = np.empty_like(x)
    grad[:-1] = Z.T @ centered / idx.size
    grad[-1] = centered.mean()
    return 2.0 * cov * grad


def category_covariances(model, dataset: Dataset, attribute: str,
                         batch=None) -> np.ndarray:
    """Per-category margin covariances of a multi-valued attribute, length K."""
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    centered = dataset.indicators(attribute) - dataset.indicator_means(attribute)[:, None]
    return centered[:, idx] @ _margins(x, dataset.features[idx]) / idx.size


def di_multi(model, dataset: Dataset, attribute: str, beta: float = 8.0,
             batch=None) -> float:
    """Smooth max over the per-category squared margin covariances."""
    cov = category_covariances(model, dataset, attribute, batch)
    return soft_max(cov**2, beta)


def di_multi_grad(model, dataset: Dataset, attribute: str, beta: float = 8.0,
                  batch=None) -> np.ndarray:
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    Z = dataset.features[idx]
    centered = (dataset.indicators(attribute)
                - dataset.indicator_means(attribute)[:, None])[:, idx]
    cov = centered @ _margins(x, Z) / idx.size
    _, dv = _soft_max_weights(cov**2, beta)
    sample_weights = (2.0 * dv * cov) @ centered / idx.size
    grad = np.empty_like(x)
    grad[:-1] = Z.T @ sample_weights
    grad[-1] = sample_weights.sum()
    return grad


# ---------------------------------------------------------------------------
# Equal-opportunity proxy
# ---------------------------------------------------------------------------


def _smoothed_hinge(t: np.ndarray, beta: float) -> np.ndarray:
    """Smooth min{0, t} = -softplus(-beta*t)/beta; within log(2)/beta of the
    hard min everywhere."""
    return -softplus(-beta * t) / beta


def eq_opp_fnr(model, dataset: Dataset, attribute: str, beta: float = 8.0,
               batch=None) -> float:
    """Squared covariance between a binary indicator and the smoothed score
    psi = min{0, ((1+y)/2) * y * margin}, which is active only on truly
    positive samples."""
    attr = dataset.attribute(attribute)
    if attr.cardinality != 2:
        raise SchemaError(f"attribute {attribute!r} is not binary")
    if not np.any(dataset.labels == 1):
        raise SchemaError("equal-opportunity proxy needs at least one positive label")
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    y = dataset.labels[idx]
    t = 0.5 * (1 + y) * y * _margins(x, dataset.features[idx])
    centered = (dataset.sensitive[attribute] - dataset.indicator_means(attribute)[1])[idx]
    return float(np.mean(centered * _smoothed_hinge(t, beta))) ** 2


def eq_opp_fnr_grad(model, dataset: Dataset, attribute: str, beta: float = 8.0,
                    batch=None) -> np.ndarray:
    if not np.any(dataset.labels == 1):
        raise SchemaError("equal-opportunity proxy needs at least one positive label")
    x = _as_vector(model)
    idx = _batch(dataset, batch)
    Z = dataset.features[idx]
    y = dataset.labels[idx]
    gate = 0.5 * (1 + y) * y  # 1 on positive samples, 0 on negatives
    t = gate * _margins(x, Z)
    centered = (dataset.sensitive[attribute] - dataset.indicator_means(attribute)[1])[idx]
    cov = float(np.mean(centered * _smoothed_hinge(t, beta)))
    sample_weights = centered * expit(-beta * t) * gate / idx.size
    grad = np.empty_like(x)
    grad[:-1] = Z.T @ sample_weights
    grad[-1] = sample_weights.sum()
    return 2.0 * cov * grad


# ---------------------------------------------------------------------------
# Fairness diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FairnessReport:
    """Empirical per-group outcome rates for one sensitive attribute."""

    attribute: str
    positive_rates: tuple[float, ...]
    cv_score: float
    fnr: tuple[float, ...] | None = None
    cv_fnr: float | None = None


def fairness_report(model, dataset: Dataset, attribute: str,
                    with_fnr: bool = True) -> FairnessReport:
    """Per-group positive-outcome rates and false-negative rates.

    The CV score is the gap between the largest and smallest group rates
    (equal to the absolute difference for a binary attribute); CV_FNR is the
    same gap over per-group false-negative rates on truly positive samples.
    """
    attr = dataset.attribute(attribute)
    x = _as_vector(model)
    pred_pos = _margins(x, dataset.features) >= 0.0
    codes = dataset.sensitive[attribute]
    rates, fnrs = [], []
    for g in range(attr.cardinality):
        in_group = codes == g
        if not in_group.any():
            raise SchemaError(f"group {g} of attribute {attribute!r} is empty")
        rates.append(float(pred_pos[in_group].mean()))
        if with_fnr:
            positives = in_group & (dataset.labels == 1)
            if not positives.any():
                raise SchemaError(
                    f"group {g} of attribute {attribute!r} has no positive labels; "
                    "false-negative rates are undefined"
                )
            fnrs.append(float((~pred_pos[positives]).mean()))
    return FairnessReport(
        attribute=attribute,
        positive_rates=tuple(rates),
        cv_score=max(rates) - min(rates),
        fnr=tuple(fnrs) if with_fnr else None,
        cv_fnr=(max(fnrs) - min(fnrs)) if with_fnr else None,
    )


def has_positives_per_group(dataset: Dataset, attribute: str) -> bool:
    attr = dataset.attribute(attribute)
    codes = dataset.sensitive[attribute]
    return all(
        np.any((codes == g) & (dataset.labels == 1)) for g in range(attr.cardinality)
    )


# ---------------------------------------------------------------------------
# Objective descriptors and bound evaluators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectiveSpec:
    """Config-level description of one objective.

    ``kind`` is one of logistic_loss, di_binary, di_multi, eq_opp_fnr;
    fairness kinds need ``attribute``; the smoothed kinds take ``beta``.
    """

    kind: str
    attribute: str | None = None
    beta: float = 8.0
    lambda_reg: float = 0.0

    def __post_init__(self):
        if self.kind not in ("logistic_loss", "di_binary", "di_multi", "eq_opp_fnr"):
            raise SchemaError(f"unknown objective kind {self.kind!r}")
        if self.kind != "logistic_loss" and not self.attribute:
            raise SchemaError(f"objective {self.kind!r} needs a sensitive attribute")
        if self.beta <= 0:
            raise SchemaError("beta must be positive")

    @property
    def label(self) -> str:
        return self.kind if self.kind == "logistic_loss" else f"{self.kind}({self.attribute})"


class BoundObjective:
    """One objective bound to a dataset: value and gradient on index batches."""

    def __init__(self, spec: ObjectiveSpec, dataset: Dataset):
        self.spec = spec
        self.dataset = dataset
        self.n_samples = len(dataset)
        self.dim = dataset.feature_dim + 1
        kind = spec.kind
        if kind == "logistic_loss":
            self._value = lambda x, b: logistic_loss(x, dataset, b, spec.lambda_reg)
            self._grad = lambda x, b: logistic_loss_grad(x, dataset, b, spec.lambda_reg)
        elif kind == "di_binary":
            self._value = lambda x, b: di_binary(x, dataset, spec.attribute, b)
            self._grad = lambda x, b: di_binary_grad(x, dataset, spec.attribute, b)
        elif kind == "di_multi":
            self._value = lambda x, b: di_multi(x, dataset, spec.attribute, spec.beta, b)
            self._grad = lambda x, b: di_multi_grad(x, dataset, spec.attribute,
                                                    spec.beta, b)
        else:
            self._value = lambda x, b: eq_opp_fnr(x, dataset, spec.attribute,
                                                  spec.beta, b)
            self._grad = lambda x, b: eq_opp_fnr_grad(x, dataset, spec.attribute,
                                                      spec.beta, b)

    def value(self, x, batch=None) -> float:
        return self._value(x, batch)

    def grad(self, x, batch=None) -> np.ndarray:
        return self._grad(x, batch)


ObjectiveLike = Union[BoundObjective, "object"]


def build_objectives(specs, dataset: Dataset) -> list[BoundObjective]:
    """Bind 2-3 objective descriptors to one dataset."""
    specs = list(specs)
    if not 2 <= len(specs) <= 3:
        raise SchemaError("an objective set must contain 2 or 3 objectives")
    bound = [BoundObjective(s, dataset) for s in specs]
    for obj in bound:
        spec = obj.spec
        if spec.attribute is not None:
            attr = dataset.attribute(spec.attribute)
            if spec.kind in ("di_binary", "eq_opp_fnr") and attr.cardinality != 2:
                raise SchemaError(
                    f"objective {spec.kind!r} needs a binary attribute; "
                    f"{spec.attribute!r} has {attr.cardinality} categories"
                )
    return bound


def evaluate_all(objectives, x) -> np.ndarray:
    """Full-batch objective vector at x."""
    return np.array([obj.value(x) for obj in objectives], dtype=float)
