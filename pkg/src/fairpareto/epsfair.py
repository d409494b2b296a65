"""Epsilon-constraint baseline: bounded-covariance loss minimization.

Each subproblem minimizes the logistic loss subject to the margin covariance
of a binary sensitive attribute staying within a threshold. The covariance
is linear in the parameters, so the pair of inequality constraints is linear
and an augmented-Lagrangian loop with smooth inner solves reaches KKT
tolerances quickly. Sweeping evenly spaced thresholds from zero up to the
covariance of the unconstrained loss minimizer traces the trade-off front,
from which dominated points are removed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from fairpareto.data import Dataset
from fairpareto.errors import SolverError
from fairpareto.model import LinearModel
from fairpareto.objectives import (
    di_binary,
    logistic_loss,
    logistic_loss_grad,
    margin_covariance,
)
from fairpareto.pfsmg import FrontPoint, filter_nondominated

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsSweepConfig:
    n_thresholds: int = 50
    tol_feasibility: float = 1e-6
    tol_stationarity: float = 1e-5
    tol_unconstrained: float = 1e-6
    max_outer: int = 50
    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    max_inner_iter: int = 5000
    lambda_reg: float = 0.0

    def __post_init__(self):
        if self.n_thresholds < 2:
            raise ValueError("threshold sweep needs at least 2 thresholds")
        for tol in (self.tol_feasibility, self.tol_stationarity,
                    self.tol_unconstrained):
            if tol <= 0:
                raise ValueError("tolerances must be positive")


@dataclass
class SweepStats:
    grad_samples: int = 0
    failures: list = field(default_factory=list)


def _covariance_vector(dataset: Dataset, attribute: str) -> np.ndarray:
    """w such that the margin covariance equals w @ (c, b)."""
    attr = dataset.attribute(attribute)
    if attr.cardinality != 2:
        raise SolverError(
            f"the covariance constraint needs a binary attribute; "
            f"{attribute!r} has {attr.cardinality} categories"
        )
    centered = dataset.sensitive[attribute] - dataset.indicator_means(attribute)[1]
    n = len(dataset)
    return np.append(dataset.features.T @ centered / n, centered.mean())


def minimize_loss(dataset: Dataset, lambda_reg: float = 0.0,
                  grad_tol: float = 1e-6, max_iter: int = 5000,
                  x0=None, stats: SweepStats | None = None) -> np.ndarray:
    """Unconstrained full-batch loss minimizer to ||grad|| <= grad_tol."""
    n = len(dataset)

    def fun(x):
        if stats is not None:
            stats.grad_samples += n
        return (logistic_loss(x, dataset, lambda_reg=lambda_reg),
                logistic_loss_grad(x, dataset, lambda_reg=lambda_reg))

    x = np.zeros(dataset.feature_dim + 1) if x0 is None else np.asarray(x0, float)
    for _ in range(5):
        res = minimize(fun, x, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": grad_tol / 10,
                                "ftol": 1e-16})
        x = res.x
        gnorm = float(np.linalg.norm(logistic_loss_grad(x, dataset,
                                                        lambda_reg=lambda_reg)))
        if gnorm <= grad_tol:
            return x
    raise SolverError(
        f"unconstrained loss minimization stalled at gradient norm {gnorm:.3e} "
        f"(target {grad_tol:.1e})"
    )


def epsilon_upper_bound(dataset: Dataset, attribute: str,
                        cfg: EpsSweepConfig | None = None,
                        stats: SweepStats | None = None) -> float:
    """|covariance| at the unconstrained loss minimizer; the top of the sweep."""
    cfg = cfg or EpsSweepConfig()
    x = minimize_loss(dataset, cfg.lambda_reg, cfg.tol_unconstrained,
                      cfg.max_inner_iter, stats=stats)
    return abs(margin_covariance(x, dataset, attribute))


def solve_constrained(dataset: Dataset, attribute: str, epsilon: float,
                      cfg: EpsSweepConfig | None = None, x0=None,
                      stats: SweepStats | None = None) -> LinearModel:
    """KKT-approximate solution of min loss s.t. |covariance| <= epsilon.

    Augmented-Lagrangian outer loop over the two linear constraints
    cov - eps <= 0 and -cov - eps <= 0, with L-BFGS inner solves. Succeeds
    when |cov| <= epsilon + tol_feasibility and the Lagrangian gradient norm
    is at most tol_stationarity; stagnation raises with both residuals.
    """
    return LinearModel.from_vector(
        _solve_constrained_vector(dataset, attribute, epsilon, cfg, x0, stats))


def _solve_constrained_vector(dataset: Dataset, attribute: str, epsilon: float,
                              cfg: EpsSweepConfig | None = None, x0=None,
                              stats: SweepStats | None = None) -> np.ndarray:
    if epsilon < 0:
        raise ValueError("threshold must be nonnegative")
    cfg = cfg or EpsSweepConfig()
    n = len(dataset)
    w = _covariance_vector(dataset, attribute)
    x = np.zeros(dataset.feature_dim + 1) if x0 is None else np.asarray(x0, float)
    mu = np.zeros(2)
    rho = cfg.penalty_init
    prev_infeas = np.inf

    for _ in range(cfg.max_outer):
        def augmented(xv, mu=mu, rho=rho):
            if stats is not None:
                stats.grad_samples += n
            cov = float(w @ xv)
            cons = np.array([cov - epsilon, -cov - epsilon])
            shifted = np.maximum(0.0, mu + rho * cons)
            value = (logistic_loss(xv, dataset, lambda_reg=cfg.lambda_reg)
                     + float(shifted @ shifted - mu @ mu) / (2 * rho))
            grad = (logistic_loss_grad(xv, dataset, lambda_reg=cfg.lambda_reg)
                    + (shifted[0] - shifted[1]) * w)
            return value, grad

        res = minimize(augmented, x, jac=True, method="L-BFGS-B",
                       options={"maxiter": cfg.max_inner_iter,
                                "gtol": cfg.tol_stationarity / 20, "ftol": 1e-16})
        x = res.x
        cov = float(w @ x)
        cons = np.array([cov - epsilon, -cov - epsilon])
        mu = np.maximum(0.0, mu + rho * cons)
        infeasibility = max(0.0, cons[0], cons[1])
        stationarity = float(np.linalg.norm(
            logistic_loss_grad(x, dataset, lambda_reg=cfg.lambda_reg)
            + (mu[0] - mu[1]) * w
        ))
        if infeasibility <= cfg.tol_feasibility and stationarity <= cfg.tol_stationarity:
            return x
        if infeasibility > 0.25 * prev_infeas:
            rho *= cfg.penalty_growth
        prev_infeas = max(infeasibility, 1e-300)
    raise SolverError(
        f"constrained solve stagnated at threshold {epsilon:.3e}: "
        f"infeasibility {infeasibility:.3e}, stationarity {stationarity:.3e}"
    )


def sweep_front(dataset: Dataset, attribute: str,
                cfg: EpsSweepConfig | None = None,
                workers: int = 1) -> tuple[list[FrontPoint], SweepStats]:
    """Solve evenly spaced thresholds in [0, upper bound] and keep the
    nondominated (loss, squared-covariance) points.

    Sequential sweeps walk the thresholds downward, warm-starting each solve
    from the previous solution; with multiple workers each threshold starts
    independently from the unconstrained minimizer. Failed thresholds are
    skipped and reported; if every threshold fails the sweep errors.
    """
    cfg = cfg or EpsSweepConfig()
    stats = SweepStats()
    x_free = minimize_loss(dataset, cfg.lambda_reg, cfg.tol_unconstrained,
                           cfg.max_inner_iter, stats=stats)
    upper = abs(margin_covariance(x_free, dataset, attribute))
    thresholds = np.linspace(0.0, upper, cfg.n_thresholds)

    def solve_one(eps, x0):
        try:
            return _solve_constrained_vector(dataset, attribute, eps, cfg, x0=x0,
                                             stats=stats)
        except SolverError as err:
            logger.warning("threshold %.4e failed: %s", eps, err)
            stats.failures.append((float(eps), str(err)))
            return None

    solutions: list[tuple[float, np.ndarray]] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda e: solve_one(e, x_free), thresholds))
        solutions = [(float(e), x) for e, x in zip(thresholds, results)
                     if x is not None]
    else:
        x_start = x_free
        for eps in thresholds[::-1]:
            x_sol = solve_one(eps, x_start)
            if x_sol is not None:
                solutions.append((float(eps), x_sol))
                x_start = x_sol
        solutions.reverse()
    if not solutions:
        raise SolverError("every threshold of the sweep failed")
    points = [
        FrontPoint(
            x=x_sol,
            f=np.array([logistic_loss(x_sol, dataset, lambda_reg=cfg.lambda_reg),
                        di_binary(x_sol, dataset, attribute)]),
            uid=i,
        )
        for i, (_, x_sol) in enumerate(solutions)
    ]
    front = filter_nondominated(points)
    front.sort(key=lambda p: tuple(p.f))
    return front, stats
