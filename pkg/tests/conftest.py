import numpy as np
import pytest

from fairpareto import data


class Quadratic:
    """Deterministic toy objective ||x - center||^2 for front-search tests."""

    def __init__(self, center):
        self.center = np.asarray(center, dtype=float)
        self.n_samples = 0
        self.dim = self.center.size

    def value(self, x, batch=None):
        d = np.asarray(x, dtype=float) - self.center
        return float(d @ d)

    def grad(self, x, batch=None):
        return 2.0 * (np.asarray(x, dtype=float) - self.center)


@pytest.fixture
def toy_objectives():
    return [Quadratic([1.0, 0.0]), Quadratic([-1.0, 0.0])]


def central_difference(fun, x, h=1e-6):
    """Independent gradient oracle: central differences coordinate by coordinate."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (fun(x + step) - fun(x - step)) / (2 * h)
    return grad


def make_dataset(n=40, d=3, seed=0, k_multi=4):
    """Small random dataset with one binary and one multi-valued attribute."""
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n, d))
    labels = rng.choice([-1, 1], size=n)
    labels[: max(3, n // 8)] = 1  # guarantee positives in both groups
    binary = rng.integers(0, 2, size=n)
    binary[:2] = (0, 1)
    multi = rng.integers(0, k_multi, size=n)
    multi[:k_multi] = np.arange(k_multi)
    return data.Dataset(
        features=features,
        labels=labels,
        sensitive={"g": binary, "r": multi},
        attributes=(data.Attribute("g", 2), data.Attribute("r", k_multi)),
    )


@pytest.fixture
def small_dataset():
    return make_dataset()
