"""Linear binary classifier: margin, prediction, accuracy."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearModel:
    """Classifier parameters: weights ``c`` and intercept ``b``.

    Scores a feature vector z by the margin c.z + b and predicts +1 on
    nonnegative margins (boundary ties go to the positive class).
    """

    c: np.ndarray
    b: float

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", float(self.b))
        if c.ndim != 1:
            raise ValueError("weight vector must be one-dimensional")
        if not (np.all(np.isfinite(c)) and np.isfinite(self.b)):
            raise ValueError("model parameters must be finite")

    @property
    def dim(self) -> int:
        return self.c.size

    def as_vector(self) -> np.ndarray:
        """Pack (c, b) into a single flat vector, intercept last."""
        return np.append(self.c, self.b)

    @staticmethod
    def from_vector(x) -> "LinearModel":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("packed parameter vector must be 1-D with length >= 2")
        return LinearModel(c=x[:-1].copy(), b=float(x[-1]))

    def to_json(self) -> str:
        return json.dumps({"c": self.c.tolist(), "b": self.b})

    @staticmethod
    def from_json(text: str) -> "LinearModel":
        obj = json.loads(text)
        return LinearModel(c=np.asarray(obj["c"], dtype=float), b=float(obj["b"]))


def margin(model: LinearModel, z) -> float | np.ndarray:
    """Margin c.z + b for one feature vector or a stack of them."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != model.dim:
        raise ValueError(
            f"feature dimension {z.shape[-1]} does not match model dimension {model.dim}"
        )
    out = z @ model.c + model.b
    return float(out) if z.ndim == 1 else out


def predict(model: LinearModel, z) -> int | np.ndarray:
    """Predicted label: +1 where margin >= 0, else -1."""
    m = margin(model, z)
    if np.isscalar(m):
        return 1 if m >= 0 else -1
    return np.where(m >= 0.0, 1, -1)


def accuracy(model: LinearModel, dataset) -> float:
    """Fraction of dataset samples whose prediction equals the label."""
    if len(dataset) == 0:
        raise ValueError("accuracy is undefined on an empty dataset")
    return float(np.mean(predict(model, dataset.features) == dataset.labels))
