"""Render publication-style figures from emitted front files and reports.

Plot kinds:

* ``front2d``      — objective-space scatter of one or more 2-D fronts.
* ``front3d``      — 3-D front scatter plus the f2-f3 projection colored by
                     the first objective in three fixed bins.
* ``rates``        — per-group positive-outcome rates (and false-negative
                     rates when present) against a fairness objective.
* ``cv``           — fairness objective vs CV score and accuracy vs CV score.
* ``profiles``     — performance-profile step curves, one panel per CSV.
* ``stream-grid``  — one front panel per streaming snapshot in a grid.

Output is vector SVG rendered with a pinned style and hash salt, so the same
inputs always produce byte-identical files. Inputs are never modified.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("front2d", "front3d", "rates", "cv", "profiles", "stream-grid")

_STYLE = {
    "figure.dpi": 100,
    "font.size": 9,
    "svg.hashsalt": "fairpareto-plots",
    "svg.fonttype": "none",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.framealpha": 0.9,
}
_SERIES_COLORS = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e",
                  "#8c564b", "#e377c2", "#7f7f7f")
_BIN_COLORS = ("#2c7bb6", "#fdae61", "#d7191c")


class PlotError(Exception):
    """Unusable plot spec or inputs (missing files, columns, keys)."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure: what to draw, from which files, to which path."""

    kind: str
    inputs: tuple[str, ...]
    out: str
    labels: tuple[str, ...] = ()
    axis_labels: tuple[str, ...] = ()
    title: str = ""
    manifest: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown plot kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise PlotError("a plot spec needs at least one input file")

    @staticmethod
    def from_json(path) -> "PlotSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise PlotError(f"cannot read plot spec {path}: {err}") from err
        known = {"kind", "inputs", "out", "labels", "axis_labels", "title",
                 "manifest"}
        unknown = set(raw) - known
        if unknown:
            raise PlotError(f"unknown plot-spec keys: {sorted(unknown)}")
        for key in ("kind", "inputs", "out"):
            if key not in raw:
                raise PlotError(f"plot spec is missing the {key!r} key")
        return PlotSpec(
            kind=raw["kind"],
            inputs=tuple(raw["inputs"]),
            out=raw["out"],
            labels=tuple(raw.get("labels", ())),
            axis_labels=tuple(raw.get("axis_labels", ())),
            title=raw.get("title", ""),
            manifest=raw.get("manifest"),
        )


def _load_csv(path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise PlotError(f"input file not found: {path}")
    return pd.read_csv(path)


def _require(frame: pd.DataFrame, columns, path) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise PlotError(f"{path} is missing required columns: {missing}")


def _label(spec: PlotSpec, index: int) -> str:
    if index < len(spec.labels):
        return spec.labels[index]
    return Path(spec.inputs[index]).parent.name or Path(spec.inputs[index]).stem


def _axis(spec: PlotSpec, index: int, default: str) -> str:
    return spec.axis_labels[index] if index < len(spec.axis_labels) else default


def _save(fig, spec: PlotSpec) -> Path:
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.title:
        fig.suptitle(spec.title)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


# ---------------------------------------------------------------------------
# Kind-specific renderers
# ---------------------------------------------------------------------------


def _render_front2d(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    for i, path in enumerate(spec.inputs):
        frame = _load_csv(path)
        _require(frame, ("f_1", "f_2"), path)
        order = np.argsort(frame["f_1"].to_numpy())
        ax.scatter(frame["f_1"].to_numpy()[order], frame["f_2"].to_numpy()[order],
                   s=14, color=_SERIES_COLORS[i % len(_SERIES_COLORS)],
                   label=_label(spec, i), alpha=0.85)
    ax.set_xlabel(_axis(spec, 0, "f_1"))
    ax.set_ylabel(_axis(spec, 1, "f_2"))
    if len(spec.inputs) > 1 or spec.labels:
        ax.legend()
    return fig


def _render_front3d(spec: PlotSpec):
    fig = plt.figure(figsize=(8.4, 3.6))
    ax3 = fig.add_subplot(1, 2, 1, projection="3d")
    axp = fig.add_subplot(1, 2, 2)
    frame = _load_csv(spec.inputs[0])
    _require(frame, ("f_1", "f_2", "f_3"), spec.inputs[0])
    f1 = frame["f_1"].to_numpy()
    f2 = frame["f_2"].to_numpy()
    f3 = frame["f_3"].to_numpy()
    ax3.scatter(f1, f2, f3, s=12, color=_SERIES_COLORS[0])
    ax3.set_xlabel(_axis(spec, 0, "f_1"))
    ax3.set_ylabel(_axis(spec, 1, "f_2"))
    ax3.set_zlabel(_axis(spec, 2, "f_3"))
    # f2-f3 projection colored by the first objective in three fixed bins
    edges = np.quantile(f1, [0.0, 1 / 3, 2 / 3, 1.0])
    for b in range(3):
        low, high = edges[b], edges[b + 1]
        mask = (f1 >= low) & (f1 <= high if b == 2 else f1 < high)
        axp.scatter(f2[mask], f3[mask], s=14, color=_BIN_COLORS[b],
                    label=f"{_axis(spec, 0, 'f_1')} in [{low:.3g}, {high:.3g}]")
    axp.set_xlabel(_axis(spec, 1, "f_2"))
    axp.set_ylabel(_axis(spec, 2, "f_3"))
    axp.legend(fontsize=7)
    return fig


def _group_columns(frame: pd.DataFrame, prefix: str) -> list[str]:
    return sorted(c for c in frame.columns if c.startswith(prefix))


def _render_rates(spec: PlotSpec):
    frame = _load_csv(spec.inputs[0])
    _require(frame, ("f_2",), spec.inputs[0])
    rate_cols = _group_columns(frame, "pos_rate_")
    if not rate_cols:
        raise PlotError(f"{spec.inputs[0]} is missing required columns: "
                        "['pos_rate_*']")
    fnr_cols = _group_columns(frame, "fnr_")
    panels = 2 if fnr_cols else 1
    fig, axes = plt.subplots(1, panels, figsize=(4.2 * panels, 3.4),
                             squeeze=False)
    order = np.argsort(frame["f_2"].to_numpy())
    x = frame["f_2"].to_numpy()[order]
    for ax, cols, ylabel in zip(
            axes[0], (rate_cols, fnr_cols)[:panels],
            ("positive-outcome rate", "false-negative rate")):
        for i, col in enumerate(cols):
            ax.plot(x, frame[col].to_numpy()[order], marker=".", ms=4, lw=1,
                    color=_SERIES_COLORS[i % len(_SERIES_COLORS)],
                    label=col.split("_", 2)[-1])
        ax.set_xlabel(_axis(spec, 0, "f_2"))
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=7)
    return fig


def _render_cv(spec: PlotSpec):
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.4))
    for i, path in enumerate(spec.inputs):
        frame = _load_csv(path)
        _require(frame, ("f_2", "cv_score", "accuracy"), path)
        color = _SERIES_COLORS[i % len(_SERIES_COLORS)]
        axes[0].scatter(frame["f_2"], frame["cv_score"], s=14, color=color,
                        label=_label(spec, i), alpha=0.85)
        axes[1].scatter(frame["accuracy"], frame["cv_score"], s=14, color=color,
                        label=_label(spec, i), alpha=0.85)
    axes[0].set_xlabel(_axis(spec, 0, "f_2"))
    axes[0].set_ylabel("CV score")
    axes[1].set_xlabel("accuracy")
    axes[1].set_ylabel("CV score")
    if len(spec.inputs) > 1 or spec.labels:
        for ax in axes:
            ax.legend(fontsize=7)
    return fig


def _render_profiles(spec: PlotSpec):
    n = len(spec.inputs)
    ncols = min(n, 3)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.6 * ncols, 3.0 * nrows),
                             squeeze=False)
    for i, path in enumerate(spec.inputs):
        ax = axes[i // ncols][i % ncols]
        frame = _load_csv(path)
        _require(frame, ("algorithm", "tau", "fraction"), path)
        for j, (name, rows) in enumerate(frame.groupby("algorithm", sort=True)):
            rows = rows.sort_values("tau")
            ax.step(rows["tau"], rows["fraction"], where="post",
                    color=_SERIES_COLORS[j % len(_SERIES_COLORS)], label=name)
        ax.set_xlabel("tau")
        ax.set_ylabel("fraction of problems")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title(Path(path).stem.replace("profile_", ""), fontsize=8)
        ax.legend(fontsize=7)
    for i in range(n, nrows * ncols):
        axes[i // ncols][i % ncols].axis("off")
    return fig


def _render_stream_grid(spec: PlotSpec):
    n = len(spec.inputs)
    ncols = min(n, 3)
    nrows = (n + ncols - 1) // ncols
    titles = [f"update {i + 1}" for i in range(n)]
    if spec.manifest:
        manifest = json.loads(Path(spec.manifest).read_text())
        snapshots = manifest.get("snapshots", [])
        for i, snap in enumerate(snapshots[:n]):
            titles[i] = f"{snap['samples']:,} samples"
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.3 * ncols, 2.8 * nrows),
                             squeeze=False)
    frames = []
    for path in spec.inputs:
        frame = _load_csv(path)
        _require(frame, ("f_1", "f_2"), path)
        frames.append(frame)
    xlim = (min(f["f_1"].min() for f in frames),
            max(f["f_1"].max() for f in frames))
    ylim = (min(f["f_2"].min() for f in frames),
            max(f["f_2"].max() for f in frames))
    for i, frame in enumerate(frames):
        ax = axes[i // ncols][i % ncols]
        ax.scatter(frame["f_1"], frame["f_2"], s=10, color=_SERIES_COLORS[0])
        ax.set_title(titles[i], fontsize=8)
        ax.set_xlim(*xlim)
        ax.set_ylim(*ylim)
        ax.set_xlabel(_axis(spec, 0, "f_1"))
        ax.set_ylabel(_axis(spec, 1, "f_2"))
    for i in range(n, nrows * ncols):
        axes[i // ncols][i % ncols].axis("off")
    return fig


_RENDERERS = {
    "front2d": _render_front2d,
    "front3d": _render_front3d,
    "rates": _render_rates,
    "cv": _render_cv,
    "profiles": _render_profiles,
    "stream-grid": _render_stream_grid,
}


def render(spec: PlotSpec) -> Path:
    """Draw the figure described by ``spec`` and return the output path."""
    with plt.rc_context(_STYLE):
        fig = _RENDERERS[spec.kind](spec)
        return _save(fig, spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fairpareto-plots",
        description="Render figures from fairpareto front files and reports")
    parser.add_argument("--spec", required=True, type=Path,
                        help="JSON plot specification")
    args = parser.parse_args(argv)
    try:
        out = render(PlotSpec.from_json(args.spec))
    except PlotError as err:
        print(f"plot error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
