"""Pareto-front search by perturbation, multi-gradient runs and filtering.

The search keeps a list of mutually nondominated points. Each round copies
the list, adds random perturbations of every point, applies several short
SMG runs to every point (appending each run's final iterate), removes
dominated points and optionally thins over-dense objective-space regions.
It stops once the list outgrows the point budget or any point's lineage
exceeds the iterate budget.

Every trajectory draws from a private RNG stream derived from the run seed,
the point id and the repetition index, so results do not depend on the
execution order of parallel workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from fairpareto.errors import PfsmgAborted, SolverError
from fairpareto.objectives import evaluate_all
from fairpareto.smg import BatchSchedule, StepSchedule, smg_run

logger = logging.getLogger(__name__)

_TAG_INIT, _TAG_PERTURB, _TAG_TRAJECTORY = 0, 1, 2


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, *key)))


def dominates(u, v) -> bool:
    """True when u is at most v everywhere and strictly below somewhere."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"objective vectors differ in length: {u.shape} vs {v.shape}")
    return bool(np.all(u <= v) and np.any(u < v))


def nondominated_mask(values: np.ndarray) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row.

    Exact duplicates never dominate each other, so duplicate rows all stay
    in the mask; callers that need unique objective vectors dedupe after.
    """
    F = np.asarray(values, dtype=float)
    n = F.shape[0]
    alive = np.ones(n, dtype=bool)
    for j in range(n):
        if not alive[j]:
            # Anything j dominates is also dominated by whatever killed j.
            continue
        dominated = np.all(F[j] <= F, axis=1) & np.any(F[j] < F, axis=1)
        alive &= ~dominated
    return alive


def _first_occurrence_mask(values: np.ndarray) -> np.ndarray:
    _, first = np.unique(values, axis=0, return_index=True)
    mask = np.zeros(values.shape[0], dtype=bool)
    mask[first] = True
    return mask


@dataclass
class FrontPoint:
    """A decision vector with its full-batch objective values."""

    x: np.ndarray
    f: np.ndarray
    iterate_count: int = 0
    uid: int = 0


def filter_nondominated(points: list[FrontPoint]) -> list[FrontPoint]:
    """Keep exactly the mutually nondominated points; among exact-duplicate
    objective vectors only the first occurrence survives."""
    if not points:
        return []
    F = np.array([p.f for p in points])
    keep = nondominated_mask(F) & _first_occurrence_mask(F)
    return [p for p, k in zip(points, keep) if k]


def perturb(x, count: int, radius: float, rng) -> list[np.ndarray]:
    """``count`` copies of x with i.i.d. uniform noise in [-radius, radius]."""
    if radius <= 0:
        raise ValueError("perturbation radius must be positive")
    x = np.asarray(x, dtype=float)
    return [x + rng.uniform(-radius, radius, size=x.size) for _ in range(count)]


def density_thin(points: list[FrontPoint], cell_fraction: float) -> list[FrontPoint]:
    """Keep at most one point per objective-space grid cell.

    The grid covers the bounding box of the front with cell edges equal to
    ``cell_fraction`` of each coordinate's range; the survivor of a cell is
    its point of lowest first objective. Per-objective minimizers are always
    retained.
    """
    if not points:
        raise ValueError("cannot thin an empty front")
    if not 0 < cell_fraction <= 1:
        raise ValueError("cell fraction must lie in (0, 1]")
    F = np.array([p.f for p in points])
    lows = F.min(axis=0)
    edges = (F.max(axis=0) - lows) * cell_fraction
    cells = np.zeros_like(F, dtype=int)
    positive = edges > 0
    cells[:, positive] = np.floor((F[:, positive] - lows[positive]) / edges[positive])
    winners: dict[tuple, int] = {}
    for i, key in enumerate(map(tuple, cells)):
        if key not in winners or F[i, 0] < F[winners[key], 0]:
            winners[key] = i
    keep = set(winners.values())
    keep.update(int(np.argmin(F[:, j])) for j in range(F.shape[1]))
    return [p for i, p in enumerate(points) if i in keep]


@dataclass(frozen=True)
class PfsmgConfig:
    """Front-search parameters.

    ``runs_per_point`` is the number of SMG runs launched from every list
    point per round and ``iters_per_run`` the length of each run; the budgets
    stop the search once the front holds more than ``point_budget`` points or
    any lineage accumulates more than ``iterate_budget`` SMG iterations.
    """

    initial_points: int = 5
    perturbations_per_point: int = 2
    runs_per_point: int = 3
    iters_per_run: int = 2
    point_budget: int = 1500
    iterate_budget: int = 1000
    perturbation_radius: float = 0.1
    thinning_cell_fraction: float = 1.0 / 200.0
    thinning: bool = True
    max_rounds: int = 10_000

    def __post_init__(self):
        counts = (self.initial_points, self.perturbations_per_point,
                  self.runs_per_point, self.iters_per_run, self.point_budget,
                  self.iterate_budget, self.max_rounds)
        if any(c < 1 for c in counts):
            raise ValueError("all front-search counts must be >= 1")
        if self.perturbation_radius <= 0:
            raise ValueError("perturbation radius must be positive")


@dataclass(frozen=True)
class SmgSchedules:
    step: StepSchedule
    batches: tuple[BatchSchedule, ...]


@dataclass
class RunStats:
    rounds: int = 0
    grad_samples: int = 0
    hypervolume_log: list = field(default_factory=list)


def _sorted_front(points: list[FrontPoint]) -> list[FrontPoint]:
    order = sorted(range(len(points)), key=lambda i: tuple(points[i].f))
    return [points[i] for i in order]


def _log_hypervolume(points: list[FrontPoint], reference) -> float:
    # Lenient variant for progress logging: ignores points beyond the reference.
    from fairpareto.metrics import hypervolume

    F = np.array([p.f for p in points])
    inside = np.all(F <= reference, axis=1)
    if not inside.any():
        return 0.0
    return hypervolume(F[inside], reference)


def pfsmg_run(objectives, schedules: SmgSchedules, config: PfsmgConfig, seed: int,
              initial_points=None, workers: int = 1,
              callback=None) -> tuple[list[FrontPoint], RunStats]:
    """Run the front search and return (front sorted by objectives, stats).

    ``initial_points`` may carry warm-start decision vectors; otherwise
    ``config.initial_points`` standard-normal vectors start the list. An
    optional ``callback(round_index, points)`` observes every round. If an
    SMG trajectory diverges the partial front travels on the raised error.
    """
    if len(schedules.batches) != len(objectives):
        raise ValueError("need one batch schedule per objective")
    dim = objectives[0].dim
    stats = RunStats()
    next_uid = 0

    def make_point(x, iterate_count):
        nonlocal next_uid
        point = FrontPoint(x=np.asarray(x, dtype=float),
                           f=evaluate_all(objectives, x),
                           iterate_count=iterate_count, uid=next_uid)
        next_uid += 1
        return point

    if initial_points is None:
        init_rng = _rng(seed, _TAG_INIT)
        initial_points = [init_rng.standard_normal(dim)
                          for _ in range(config.initial_points)]
    points = [make_point(x, 0) for x in initial_points]
    points = filter_nondominated(points)
    reference = None

    def run_trajectory(point: FrontPoint, rep: int) -> tuple[np.ndarray, int, int]:
        rng = _rng(seed, _TAG_TRAJECTORY, point.uid, rep)
        result = smg_run(point.x, objectives, schedules.step, schedules.batches,
                         config.iters_per_run, rng,
                         start_iterate=point.iterate_count)
        return result.x, point.iterate_count + result.iterations, result.grad_samples

    for round_index in range(config.max_rounds):
        # Perturb every current point.
        for point in list(points):
            rng = _rng(seed, _TAG_PERTURB, round_index, point.uid)
            for x_new in perturb(point.x, config.perturbations_per_point,
                                 config.perturbation_radius, rng):
                points.append(make_point(x_new, point.iterate_count))
        # Several short SMG runs from every point, including the fresh ones.
        tasks = [(point, rep) for point in points
                 for rep in range(config.runs_per_point)]
        try:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    outcomes = list(pool.map(lambda t: run_trajectory(*t), tasks))
            else:
                outcomes = [run_trajectory(*t) for t in tasks]
        except SolverError as err:
            raise PfsmgAborted(str(err), partial_front=_sorted_front(points)) from err
        for x_new, count, samples in outcomes:
            stats.grad_samples += samples
            points.append(make_point(x_new, count))
        points = filter_nondominated(points)
        if config.thinning:
            points = density_thin(points, config.thinning_cell_fraction)
        stats.rounds = round_index + 1
        if reference is None:
            F = np.array([p.f for p in points])
            spread = F.max(axis=0) - F.min(axis=0)
            reference = F.max(axis=0) + 0.1 * np.where(spread > 0, spread, 1.0)
        hv = _log_hypervolume(points, reference)
        stats.hypervolume_log.append(hv)
        logger.info("round %d: %d nondominated points, hypervolume %.6g",
                    round_index + 1, len(points), hv)
        if callback is not None:
            callback(round_index, points)
        if len(points) > config.point_budget:
            break
        if max(p.iterate_count for p in points) > config.iterate_budget:
            break
    return _sorted_front(points), stats
