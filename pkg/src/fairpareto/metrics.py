"""Front-quality measures: purity, spread, hypervolume, profiles.

All functions accept plain (n, m) arrays of objective vectors; helpers on
FrontPoint lists live with the front search itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairpareto.pfsmg import nondominated_mask


def _values(front) -> np.ndarray:
    F = np.asarray(front, dtype=float)
    if F.ndim == 1:
        F = F[None, :]
    return F


@dataclass(frozen=True)
class FrontComparison:
    """Quality measures of one algorithm's front on one problem."""

    algorithm: str
    problem: str
    purity: float
    gamma: float
    delta: float
    hypervolume: float
    cpu_seconds: float
    grad_evals: int
    front_size: int


def purity(fronts: dict[str, np.ndarray], tolerance: float = 0.0) -> dict[str, float]:
    """Fraction of each front surviving in the nondominated union of all fronts.

    The reference front is the nondominated subset of the pooled objective
    vectors; membership is exact vector equality unless a tolerance (max-norm)
    is given to absorb cross-solver float drift.
    """
    if len(fronts) < 2:
        raise ValueError("purity compares at least two fronts")
    arrays = {name: _values(front) for name, front in fronts.items()}
    for name, F in arrays.items():
        if F.size == 0:
            raise ValueError(f"front {name!r} is empty")
    union = np.unique(np.vstack(list(arrays.values())), axis=0)
    reference = union[nondominated_mask(union)]
    out = {}
    for name, F in arrays.items():
        if tolerance == 0.0:
            ref_set = {tuple(row) for row in reference}
            hits = sum(tuple(row) in ref_set for row in F)
        else:
            gaps = np.abs(F[:, None, :] - reference[None, :, :]).max(axis=2)
            hits = int((gaps.min(axis=1) <= tolerance).sum())
        out[name] = hits / F.shape[0]
    return out


def extreme_points(front) -> tuple[np.ndarray, np.ndarray]:
    """The (argmin, argmax) pair of the objective with the widest range.

    Range ties break toward the lowest objective index; argmin/argmax ties
    toward the earliest point.
    """
    F = _values(front)
    if F.shape[0] < 2:
        raise ValueError("extreme points need a front of at least 2 points")
    ranges = F.max(axis=0) - F.min(axis=0)
    k = int(np.argmax(ranges))
    return F[np.argmin(F[:, k])].copy(), F[np.argmax(F[:, k])].copy()


def _sorted_gaps(front: np.ndarray, extremes) -> np.ndarray:
    lo, hi = extremes
    stacked = np.vstack([front, _values(lo), _values(hi)])
    return np.diff(np.sort(stacked, axis=0), axis=0)


def spread_gamma(front, extremes=None) -> float:
    """Largest hole: max consecutive gap of any sorted objective coordinate,
    the pair of extreme points included."""
    F = _values(front)
    if F.shape[0] < 1:
        raise ValueError("spread needs a nonempty front")
    if extremes is None:
        extremes = extreme_points(F)
    return float(_sorted_gaps(F, extremes).max())


def spread_delta(front, extremes=None) -> float:
    """Gap-uniformity score: 0 for perfectly even spacing with extremes at the
    ends, growing with holes and clusters. Returns 0 for a front collapsed to
    a point in every coordinate."""
    F = _values(front)
    M = F.shape[0]
    if M < 2:
        raise ValueError("spread delta needs at least 2 interior points")
    if extremes is None:
        extremes = extreme_points(F)
    gaps = _sorted_gaps(F, extremes)  # (M+1, m): gaps 0..M per coordinate
    interior = gaps[1:-1]
    mean_interior = interior.mean(axis=0)
    best = 0.0
    degenerate = True
    for i in range(gaps.shape[1]):
        denom = gaps[0, i] + gaps[-1, i] + (M - 1) * mean_interior[i]
        if denom == 0.0:
            continue
        degenerate = False
        numer = (gaps[0, i] + gaps[-1, i]
                 + np.abs(interior[:, i] - mean_interior[i]).sum())
        best = max(best, float(numer / denom))
    return 0.0 if degenerate else best


def hypervolume(front, reference) -> float:
    """Objective-space volume dominated by the front up to the reference point.

    Exact sweep for two objectives, slicing over the third for three; every
    point must be component-wise at most the reference.
    """
    F = _values(front)
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (F.shape[1],):
        raise ValueError("reference point has the wrong length")
    if np.any(F > ref):
        raise ValueError("a front point exceeds the reference point")
    m = F.shape[1]
    if m == 1:
        return float(ref[0] - F[:, 0].min())
    if m == 2:
        return _hypervolume_2d(F, ref)
    if m == 3:
        return _hypervolume_3d(F, ref)
    raise ValueError("hypervolume supports at most 3 objectives")


def _hypervolume_2d(F: np.ndarray, ref: np.ndarray) -> float:
    F = np.unique(F, axis=0)
    F = F[nondominated_mask(F)]
    F = F[np.argsort(F[:, 0], kind="stable")]
    edges = np.append(F[1:, 0], ref[0])
    return float(np.sum((edges - F[:, 0]) * (ref[1] - F[:, 1])))


def _hypervolume_3d(F: np.ndarray, ref: np.ndarray) -> float:
    F = np.unique(F, axis=0)
    F = F[nondominated_mask(F)]
    F = F[np.argsort(F[:, 2], kind="stable")]
    levels = np.unique(F[:, 2])
    heights = np.append(levels[1:], ref[2]) - levels
    volume = 0.0
    for level, height in zip(levels, heights):
        active = F[F[:, 2] <= level, :2]
        volume += _hypervolume_2d(active, ref[:2]) * height
    return float(volume)


def reference_point(fronts, pad: float = 0.1) -> np.ndarray:
    """Component-wise max over the pooled fronts plus ``pad`` of each range
    (ranges collapsing to zero pad by 1 instead)."""
    union = np.vstack([_values(f) for f in fronts])
    spread = union.max(axis=0) - union.min(axis=0)
    return union.max(axis=0) + pad * np.where(spread > 0, spread, 1.0)


def downsample_indices(front, count: int) -> np.ndarray:
    """Indices of ``count`` kept points: both extremes of the first objective
    plus evenly spaced ranks of the order sorted by it."""
    F = _values(front)
    n = F.shape[0]
    if count < 2:
        raise ValueError("downsample keeps at least the two extremes")
    if count > n:
        raise ValueError(f"cannot keep {count} of {n} points")
    order = np.lexsort(F.T[::-1])  # by f1, ties by later objectives
    ranks = np.round(np.linspace(0, n - 1, count)).astype(int)
    return order[ranks]


def downsample(front, count: int) -> np.ndarray:
    """Keep ``count`` points spanning the first objective's range evenly."""
    F = _values(front)
    return F[downsample_indices(F, count)]


def performance_profile(table: dict[str, np.ndarray],
                        higher_is_better: bool = False) -> dict[str, np.ndarray]:
    """Dolan-More profiles: per algorithm the step curve of the fraction of
    problems whose ratio to the problem's best value is at most tau.

    ``table`` maps algorithm name to per-problem positive values in one shared
    problem order. Metrics where higher is better are inverted first. Each
    curve is an array of (tau, fraction) breakpoints starting at tau = 1.
    """
    if not table:
        raise ValueError("need at least one algorithm")
    values = np.array([np.asarray(v, dtype=float) for v in table.values()])
    if values.ndim != 2 or values.shape[1] < 1:
        raise ValueError("need at least one problem with aligned values")
    if np.any(values <= 0):
        raise ValueError("profile metric values must be positive")
    if higher_is_better:
        values = 1.0 / values
    ratios = values / values.min(axis=0, keepdims=True)
    taus = np.unique(np.append(ratios.ravel(), 1.0))
    out = {}
    for name, row in zip(table.keys(), ratios):
        fractions = (row[None, :] <= taus[:, None]).mean(axis=1)
        out[name] = np.column_stack([taus, fractions])
    return out
