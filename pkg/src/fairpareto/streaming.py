"""Front maintenance under arriving data batches.

Each update appends the new batch to the cumulative dataset, re-evaluates
the current front under the grown data, warm-starts the front search from a
spread-out selection of surviving points and merges the result back into the
front. The hypervolume reference is frozen after the first update so the
recorded history is comparable across updates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from fairpareto import data as datamod
from fairpareto.data import CsvSchema, Dataset, Encoder, SyntheticParams
from fairpareto.errors import SchemaError
from fairpareto.metrics import downsample_indices, hypervolume, reference_point
from fairpareto.objectives import build_objectives, evaluate_all
from fairpareto.pfsmg import (
    FrontPoint,
    PfsmgConfig,
    SmgSchedules,
    density_thin,
    filter_nondominated,
    pfsmg_run,
)

logger = logging.getLogger(__name__)


@dataclass
class StreamState:
    dataset: Dataset
    front: list[FrontPoint]
    hypervolume_history: list[float] = field(default_factory=list)
    reference: np.ndarray | None = None
    updates: int = 0
    grad_samples: int = 0


def _search(objectives, schedules, config, seed, initial=None, workers=1):
    front, stats = pfsmg_run(objectives, schedules, config, seed,
                             initial_points=initial, workers=workers)
    return front, stats.grad_samples


def _record(state: StreamState) -> None:
    if state.reference is None:
        state.reference = reference_point([np.array([p.f for p in state.front])])
    F = np.array([p.f for p in state.front])
    inside = np.all(F <= state.reference, axis=1)
    hv = hypervolume(F[inside], state.reference) if inside.any() else 0.0
    state.hypervolume_history.append(hv)


def stream_start(first_batch: Dataset, objective_specs, schedules: SmgSchedules,
                 config: PfsmgConfig, seed: int, workers: int = 1) -> StreamState:
    """Cold front search on the first batch."""
    objectives = build_objectives(objective_specs, first_batch)
    front, samples = _search(objectives, schedules, config, seed, workers=workers)
    state = StreamState(dataset=first_batch, front=front, updates=1,
                        grad_samples=samples)
    _record(state)
    return state


def stream_update(state: StreamState, new_batch: Dataset, objective_specs,
                  schedules: SmgSchedules, config: PfsmgConfig, seed: int,
                  start_count: int = 5, workers: int = 1) -> StreamState:
    """Grow the data by one batch and refresh the front.

    The previous front is re-evaluated on the cumulative data, a spread
    selection of ``start_count`` points seeds a fresh search, and the final
    front is the nondominated merge of the re-evaluated old points with the
    search output (so an update can never lose dominated-volume it already
    had, up to thinning).
    """
    if len(new_batch):
        cumulative = datamod.concat([state.dataset, new_batch])
    else:
        cumulative = state.dataset
    objectives = build_objectives(objective_specs, cumulative)
    reevaluated = [
        FrontPoint(x=p.x, f=evaluate_all(objectives, p.x), uid=p.uid)
        for p in state.front
    ]
    reevaluated = filter_nondominated(reevaluated)
    F = np.array([p.f for p in reevaluated])
    count = min(start_count, len(reevaluated))
    if count >= 2:
        warm = [reevaluated[i].x for i in downsample_indices(F, count)]
    else:
        warm = [p.x for p in reevaluated]
    new_front, samples = _search(objectives, schedules, config,
                                 seed + state.updates, initial=warm,
                                 workers=workers)
    merged = filter_nondominated(reevaluated + new_front)
    if config.thinning:
        merged = density_thin(merged, config.thinning_cell_fraction)
    merged.sort(key=lambda p: tuple(p.f))
    new_state = StreamState(
        dataset=cumulative,
        front=merged,
        hypervolume_history=list(state.hypervolume_history),
        reference=state.reference,
        updates=state.updates + 1,
        grad_samples=state.grad_samples + samples,
    )
    _record(new_state)
    logger.info("update %d: %d samples, %d front points, hypervolume %.6g",
                new_state.updates, len(cumulative), len(merged),
                new_state.hypervolume_history[-1])
    return new_state


def stream_run(batches, objective_specs, schedules: SmgSchedules,
               config: PfsmgConfig, seed: int, start_count: int = 5,
               workers: int = 1,
               snapshot_hook=None) -> list[StreamState]:
    """Consume an iterable of dataset batches; returns one state per update."""
    states: list[StreamState] = []
    for batch in batches:
        if not states:
            state = stream_start(batch, objective_specs, schedules, config,
                                 seed, workers=workers)
        else:
            state = stream_update(states[-1], batch, objective_specs, schedules,
                                  config, seed, start_count=start_count,
                                  workers=workers)
        states.append(state)
        if snapshot_hook is not None:
            snapshot_hook(state)
    if not states:
        raise ValueError("the batch source yielded no batches")
    return states


# ---------------------------------------------------------------------------
# Batch sources
# ---------------------------------------------------------------------------


def synthetic_batches(n_batches: int, batch_size: int, seed: int,
                      params: SyntheticParams | None = None):
    """Independent synthetic chunks drawn from one seeded stream."""
    full = datamod.generate_synthetic(n_batches * batch_size, seed, params)
    for u in range(n_batches):
        yield full.subset(np.arange(u * batch_size, (u + 1) * batch_size))


def csv_shard_batches(directory, schema: CsvSchema):
    """Yield re-encoded cumulative-minus-previous batches from CSV shards.

    Shards are consumed in lexicographic order; the encoder (categories and
    normalization statistics) is refitted on the cumulative raw rows at every
    shard, so each yielded batch is encoded consistently with all data seen
    so far. Because normalization drifts as data accumulates, shard streams
    re-encode the whole history: the yielded value is the full cumulative
    dataset and stream callers should replace rather than concatenate.
    """
    directory = Path(directory)
    shards = sorted(directory.glob("*.csv"))
    if not shards:
        raise SchemaError(f"no CSV shards found in {directory}")
    frames: list[pd.DataFrame] = []
    for shard in shards:
        frames.append(datamod.load_raw(shard, schema))
        combined = pd.concat(frames, ignore_index=True)
        yield Encoder(schema).fit(combined).transform(combined)


def stream_run_reencoded(cumulative_batches, objective_specs,
                         schedules: SmgSchedules, config: PfsmgConfig, seed: int,
                         start_count: int = 5, workers: int = 1,
                         snapshot_hook=None) -> list[StreamState]:
    """Stream over cumulative re-encoded datasets (CSV-shard mode).

    Each element of ``cumulative_batches`` is the full dataset so far, with
    normalization refreshed; the previous front is re-evaluated against it
    directly instead of concatenating.
    """
    states: list[StreamState] = []
    for cumulative in cumulative_batches:
        if not states:
            state = stream_start(cumulative, objective_specs, schedules, config,
                                 seed, workers=workers)
        else:
            prev = states[-1]
            carried = StreamState(
                dataset=cumulative,
                front=prev.front,
                hypervolume_history=prev.hypervolume_history,
                reference=prev.reference,
                updates=prev.updates,
                grad_samples=prev.grad_samples,
            )
            empty = cumulative.subset(np.arange(0))
            state = stream_update(carried, empty, objective_specs, schedules,
                                  config, seed, start_count=start_count,
                                  workers=workers)
        states.append(state)
        if snapshot_hook is not None:
            snapshot_hook(state)
    if not states:
        raise ValueError("the batch source yielded no batches")
    return states
