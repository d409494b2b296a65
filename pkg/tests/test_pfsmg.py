import numpy as np
import pytest
from conftest import Quadratic

from fairpareto.data import BatchSchedule
from fairpareto.metrics import hypervolume
from fairpareto.pfsmg import (
    FrontPoint,
    PfsmgConfig,
    SmgSchedules,
    density_thin,
    dominates,
    filter_nondominated,
    nondominated_mask,
    perturb,
    pfsmg_run,
)
from fairpareto.smg import StepSchedule


def brute_force_mask(F):
    """Independent O(n^2) dominance oracle, point against point."""
    n = len(F)
    alive = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if np.all(F[j] <= F[i]) and np.any(F[j] < F[i]):
                alive[i] = False
                break
    return alive


def _points(F):
    return [FrontPoint(x=np.zeros(1), f=np.asarray(f, float), uid=i)
            for i, f in enumerate(F)]


# --- dominance -----------------------------------------------------------------

def test_dominates_examples():
    assert dominates([1, 2], [2, 2])
    assert not dominates([1, 2], [2, 1])
    assert not dominates([1, 2], [1, 2])


def test_dominates_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        dominates([1, 2], [1, 2, 3])


def test_filter_simple_cases():
    kept = filter_nondominated(_points([[1, 2], [2, 1], [3, 3]]))
    assert sorted(tuple(p.f) for p in kept) == [(1, 2), (2, 1)]
    kept = filter_nondominated(_points([[1, 1], [1, 2]]))
    assert [tuple(p.f) for p in kept] == [(1, 1)]


def test_filter_duplicates_keep_first():
    kept = filter_nondominated(_points([[1, 2], [1, 2], [0.5, 3]]))
    assert len(kept) == 2
    survivors = {p.uid for p in kept}
    assert 0 in survivors and 1 not in survivors


def test_filter_matches_brute_force_oracle():
    rng = np.random.default_rng(0)
    for trial in range(60):
        m = 2 if trial % 2 == 0 else 3
        n = int(rng.integers(1, 120))
        # integer grids provoke ties and duplicates
        F = rng.integers(0, 8, size=(n, m)).astype(float)
        mask = nondominated_mask(F)
        assert np.array_equal(mask, brute_force_mask(F))


def test_filter_idempotent_and_order_insensitive():
    rng = np.random.default_rng(1)
    F = rng.normal(size=(80, 2))
    once = filter_nondominated(_points(F))
    twice = filter_nondominated(once)
    assert [p.uid for p in once] == [p.uid for p in twice]
    perm = rng.permutation(80)
    shuffled = filter_nondominated(_points(F[perm]))
    assert sorted(map(tuple, (p.f for p in once))) == sorted(
        map(tuple, (p.f for p in shuffled)))


# --- perturbation ----------------------------------------------------------------

def test_perturb_count_and_radius():
    rng = np.random.default_rng(2)
    x = np.array([1.0, -2.0, 0.5])
    outputs = perturb(x, 1000, 0.3, rng)
    assert len(outputs) == 1000
    gaps = np.abs(np.array(outputs) - x)
    assert gaps.max() <= 0.3
    assert gaps.max() > 0.25  # the noise actually fills the cube


def test_perturb_zero_count_and_tiny_radius():
    rng = np.random.default_rng(3)
    assert perturb(np.ones(2), 0, 0.1, rng) == []
    nearly = perturb(np.ones(2), 5, 1e-12, rng)
    assert all(np.allclose(p, np.ones(2), atol=1e-11) for p in nearly)


def test_perturb_requires_positive_radius():
    with pytest.raises(ValueError):
        perturb(np.ones(2), 1, 0.0, np.random.default_rng(0))


# --- density thinning -------------------------------------------------------------

def test_thin_distinct_cells_unchanged():
    pts = _points([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    assert len(density_thin(pts, 0.25)) == 3


def test_thin_identical_vectors_collapse():
    pts = _points([[0.5, 0.5], [0.5, 0.5], [0.0, 1.0], [1.0, 0.0]])
    kept = density_thin(pts, 0.1)
    assert sum(tuple(p.f) == (0.5, 0.5) for p in kept) == 1


def test_thin_keeps_extremes():
    rng = np.random.default_rng(4)
    for _ in range(20):
        F = rng.normal(size=(60, 2))
        pts = _points(F)
        kept = density_thin(pts, 0.5)  # huge cells: aggressive thinning
        kept_f = {tuple(p.f) for p in kept}
        for j in range(2):
            assert tuple(F[np.argmin(F[:, j])]) in kept_f


def test_thin_empty_errors():
    with pytest.raises(ValueError, match="empty"):
        density_thin([], 0.1)


# --- full front search --------------------------------------------------------------

def _toy_setup():
    objectives = [Quadratic([1.0, 0.0]), Quadratic([-1.0, 0.0])]
    schedules = SmgSchedules(step=StepSchedule(alpha0=0.25),
                             batches=(BatchSchedule(1), BatchSchedule(1)))
    return objectives, schedules


def test_toy_run_recovers_segment():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(initial_points=5, perturbations_per_point=2,
                         runs_per_point=2, iters_per_run=8, point_budget=300,
                         iterate_budget=160, perturbation_radius=0.05,
                         thinning_cell_fraction=0.02, max_rounds=20)
    front, stats = pfsmg_run(objectives, schedules, config, seed=11)
    X = np.array([p.x for p in front])
    distance = np.sqrt(np.maximum(0, np.abs(X[:, 0]) - 1) ** 2 + X[:, 1] ** 2)
    assert len(front) >= 30
    assert distance.max() < 1e-2
    assert stats.rounds == 20


def test_run_output_nondominated_and_sorted():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=40, max_rounds=5,
                         perturbation_radius=0.05, thinning_cell_fraction=0.02)
    front, _ = pfsmg_run(objectives, schedules, config, seed=0)
    F = np.array([p.f for p in front])
    assert nondominated_mask(F).all()
    assert np.array_equal(F[:, 0], np.sort(F[:, 0]))


def test_run_hypervolume_monotone_without_thinning():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=60, max_rounds=8, thinning=False,
                         point_budget=5000, perturbation_radius=0.05)
    reference = np.array([50.0, 50.0])
    history = []

    def watch(_round, points):
        F = np.array([p.f for p in points])
        inside = np.all(F <= reference, axis=1)
        history.append(hypervolume(F[inside], reference))

    pfsmg_run(objectives, schedules, config, seed=2, callback=watch)
    assert len(history) >= 2
    assert all(b >= a - 1e-9 for a, b in zip(history, history[1:]))


def test_run_seed_reproducible():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=40, max_rounds=5,
                         perturbation_radius=0.05)
    a, _ = pfsmg_run(objectives, schedules, config, seed=3)
    b, _ = pfsmg_run(objectives, schedules, config, seed=3)
    assert len(a) == len(b)
    assert all(np.array_equal(p.x, q.x) and np.array_equal(p.f, q.f)
               for p, q in zip(a, b))


def test_run_parallel_matches_sequential():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=40, max_rounds=4,
                         perturbation_radius=0.05)
    seq, _ = pfsmg_run(objectives, schedules, config, seed=4, workers=1)
    par, _ = pfsmg_run(objectives, schedules, config, seed=4, workers=4)
    assert [tuple(p.f) for p in seq] == [tuple(p.f) for p in par]


def test_run_respects_point_budget():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(point_budget=20, iterate_budget=10_000, thinning=False,
                         max_rounds=50, perturbation_radius=0.05)
    front, stats = pfsmg_run(objectives, schedules, config, seed=5)
    assert len(front) > 20  # stopped by the point budget, after the round
    assert stats.rounds < 50


def test_run_warm_start_points_used():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=16, max_rounds=2,
                         perturbation_radius=0.01)
    warm = [np.array([0.5, 0.0]), np.array([-0.5, 0.0])]
    front, _ = pfsmg_run(objectives, schedules, config, seed=6,
                         initial_points=warm)
    X = np.array([p.x for p in front])
    assert np.abs(X[:, 1]).max() < 0.05  # stayed near the warm region


def test_run_inherits_iterate_counts():
    objectives, schedules = _toy_setup()
    config = PfsmgConfig(iterate_budget=100, iters_per_run=7, max_rounds=3,
                         perturbation_radius=0.05)
    front, _ = pfsmg_run(objectives, schedules, config, seed=7)
    counts = {p.iterate_count for p in front}
    assert counts <= {0, 7, 14, 21}


def test_aborted_run_carries_partial_front(toy_objectives):
    # a step this large overflows within a single two-iteration run
    schedules = SmgSchedules(step=StepSchedule(alpha0=1e200),
                             batches=(BatchSchedule(1), BatchSchedule(1)))
    config = PfsmgConfig(max_rounds=3, perturbation_radius=0.05)
    from fairpareto.errors import PfsmgAborted

    with pytest.raises(PfsmgAborted) as err:
        pfsmg_run(toy_objectives, schedules, config, seed=8)
    assert len(err.value.partial_front) >= 1
