"""Stochastic multi-gradient descent steps.

One step draws a batch per objective, computes the stochastic gradients,
finds the convex combination of minimum norm over the simplex and moves
against it. With a single objective this reduces to plain stochastic
gradient descent; with deterministic gradients the negated combination is a
common descent direction whenever its norm is nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fairpareto.data import BatchSchedule, draw_batch
from fairpareto.errors import SolverError

KKT_TOL = 1e-8
_MAX_FW_ITER = 10_000


@dataclass(frozen=True)
class StepSchedule:
    """Piecewise-constant decay: alpha0 * decay_factor ** (k // decay_period)."""

    alpha0: float
    decay_factor: float = 1.0
    decay_period: int = 1

    def __post_init__(self):
        if self.alpha0 <= 0:
            raise ValueError("initial step size must be positive")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay factor must lie in (0, 1]")
        if self.decay_period < 1:
            raise ValueError("decay period must be >= 1")

    def at(self, k: int) -> float:
        return self.alpha0 * self.decay_factor ** (k // self.decay_period)


def solve_minnorm(gradients) -> np.ndarray:
    """Simplex weights minimizing ||sum_i w_i g_i||^2.

    Two gradients are solved in closed form; more use Frank-Wolfe with away
    steps on the Gram matrix until the KKT residual drops below 1e-8.
    Fully degenerate inputs (all gradients identical or zero) get uniform
    weights.
    """
    G = np.atleast_2d(np.asarray(gradients, dtype=float))
    m = G.shape[0]
    if m == 0:
        raise ValueError("need at least one gradient")
    if m == 1:
        return np.ones(1)
    if not np.any(G):
        return np.full(m, 1.0 / m)
    if m == 2:
        diff = G[0] - G[1]
        denom = float(diff @ diff)
        if denom == 0.0:
            return np.array([0.5, 0.5])
        lam = float((G[1] - G[0]) @ G[1]) / denom
        lam = min(max(lam, 0.0), 1.0)
        return np.array([lam, 1.0 - lam])
    if np.all(G == G[0]):
        return np.full(m, 1.0 / m)
    return _minnorm_frank_wolfe(G @ G.T)


def _kkt_residual(gram: np.ndarray, w: np.ndarray) -> float:
    v = gram @ w
    norm_sq = float(w @ v)
    lower = float(np.max(norm_sq - v))
    upper = float(np.max(v[w > 0] - norm_sq)) if np.any(w > 0) else 0.0
    return max(0.0, lower, upper)


def _polish_on_support(gram: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Exact equality-constrained solve on the support found by Frank-Wolfe.

    Fixing the active set turns the problem into a linear KKT system; the
    solution replaces the iterate when it is feasible and at least as good.
    """
    support = np.flatnonzero(w > 1e-12)
    k = support.size
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = 2.0 * gram[np.ix_(support, support)]
    system[:k, k] = 1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    candidate = np.zeros_like(w)
    candidate[support] = solution[:k]
    if np.any(candidate < -1e-12):
        return w
    candidate = np.clip(candidate, 0.0, None)
    candidate /= candidate.sum()
    if candidate @ gram @ candidate <= w @ gram @ w + 1e-15:
        return candidate
    return w


def _minnorm_frank_wolfe(gram: np.ndarray) -> np.ndarray:
    m = gram.shape[0]
    w = np.zeros(m)
    w[int(np.argmin(np.diag(gram)))] = 1.0
    # Stop once the residual clears both the absolute tolerance and the
    # vertex-relative one (scaled by ||combination|| * min ||gradient||).
    min_norm_sq = float(np.min(np.diag(gram)))
    for _ in range(_MAX_FW_ITER):
        w = _polish_on_support(gram, w)
        v = gram @ w
        scale = math.sqrt(max(float(w @ v), 0.0) * min_norm_sq)
        if _kkt_residual(gram, w) <= max(1e-15, KKT_TOL * min(1.0, scale)):
            break
        toward = int(np.argmin(v))
        support = np.flatnonzero(w > 0)
        away = int(support[np.argmax(v[support])])
        fw_gap = float(w @ v - v[toward])
        away_gap = float(v[away] - w @ v)
        if fw_gap >= away_gap:
            direction = -w.copy()
            direction[toward] += 1.0
            gamma_max = 1.0
        else:
            direction = w.copy()
            direction[away] -= 1.0
            gamma_max = w[away] / (1.0 - w[away]) if w[away] < 1.0 else 1.0
        curvature = float(direction @ gram @ direction)
        slope = float(2.0 * v @ direction)
        if curvature <= 0.0:
            gamma = gamma_max
        else:
            gamma = min(max(-slope / (2.0 * curvature), 0.0), gamma_max)
        if gamma == 0.0:
            break
        w = w + gamma * direction
        w = np.clip(w, 0.0, None)
        w /= w.sum()
    w = np.clip(w, 0.0, None)
    return w / w.sum()


@dataclass(frozen=True)
class StepResult:
    x: np.ndarray
    weights: np.ndarray
    direction_norm: float
    grad_samples: int


def smg_step(x, objectives, step_schedule: StepSchedule, batch_schedules,
             k: int, rng) -> StepResult:
    """One multi-gradient update x - alpha_k * sum_i w_i g_i.

    Batches are drawn independently per objective from its own schedule;
    deterministic objectives (``n_samples`` unset or 0) are evaluated in
    full. Returns the new point, the simplex weights and the norm of the
    combined gradient.
    """
    x = np.asarray(x, dtype=float)
    grads = np.empty((len(objectives), x.size))
    samples = 0
    for i, obj in enumerate(objectives):
        n = getattr(obj, "n_samples", 0) or 0
        if n:
            idx = draw_batch(n, batch_schedules[i], k, rng)
            grads[i] = obj.grad(x, idx)
            samples += idx.size
        else:
            grads[i] = obj.grad(x)
            samples += 1
    weights = solve_minnorm(grads)
    direction = weights @ grads
    x_new = x - step_schedule.at(k) * direction
    return StepResult(x_new, weights, float(np.linalg.norm(direction)), samples)


@dataclass(frozen=True)
class RunResult:
    x: np.ndarray
    iterations: int
    grad_samples: int


def smg_run(x0, objectives, step_schedule: StepSchedule, batch_schedules,
            iterations: int, rng, start_iterate: int = 0) -> RunResult:
    """Apply ``iterations`` sequential multi-gradient steps.

    ``start_iterate`` offsets the step/batch schedules so a trajectory that
    already accumulated SMG iterations keeps decaying from where it left off.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    x = np.asarray(x0, dtype=float)
    samples = 0
    for t in range(iterations):
        result = smg_step(x, objectives, step_schedule, batch_schedules,
                          start_iterate + t, rng)
        x = result.x
        samples += result.grad_samples
        if not np.all(np.isfinite(x)):
            raise SolverError(
                f"iterate diverged to non-finite values at SMG iteration "
                f"{start_iterate + t} (step size {step_schedule.at(start_iterate + t)})"
            )
    return RunResult(x, iterations, samples)
