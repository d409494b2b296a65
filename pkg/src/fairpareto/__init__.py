"""Accuracy-fairness Pareto fronts for linear binary classifiers.

The package builds Pareto fronts trading prediction loss against smooth
disparate-impact and equal-opportunity proxies, using a stochastic
multi-gradient front search, with an epsilon-constraint baseline and
front-quality metrics for comparing the two.
"""

from fairpareto.errors import (
    ConfigError,
    FairparetoError,
    ParseError,
    PfsmgAborted,
    SchemaError,
    SolverError,
)
from fairpareto.model import LinearModel, accuracy, margin, predict

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "FairparetoError",
    "LinearModel",
    "ParseError",
    "PfsmgAborted",
    "SchemaError",
    "SolverError",
    "__version__",
    "accuracy",
    "margin",
    "predict",
]
