"""Front-file reading and writing.

A front file is a CSV whose header carries the model coordinates
(c_0..c_{d-1}, b), the objective columns (f_1..f_m) and diagnostic columns
(accuracy, cv_score, cv_fnr and per-group rates where applicable). Floats
are written with shortest round-trip repr so identical fronts produce
byte-identical files. A companion JSON manifest records the resolved
configuration, seed, timings and gradient-evaluation counts.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from fairpareto.errors import SchemaError
from fairpareto.pfsmg import FrontPoint


def _fmt(value: float) -> str:
    return repr(float(value))


def write_front_csv(path, points: list[FrontPoint],
                    diagnostics: list[dict] | None = None) -> None:
    """Write one row per front point: model coordinates, objectives,
    then any diagnostic columns (shared keys, in first-row order)."""
    path = Path(path)
    if not points:
        raise ValueError("refusing to write an empty front")
    dim = points[0].x.size - 1
    m = points[0].f.size
    header = [f"c_{i}" for i in range(dim)] + ["b"]
    header += [f"f_{i + 1}" for i in range(m)]
    diag_keys: list[str] = []
    if diagnostics:
        if len(diagnostics) != len(points):
            raise ValueError("diagnostics length must match the front size")
        diag_keys = list(diagnostics[0].keys())
        header += diag_keys
    lines = [",".join(header)]
    for i, p in enumerate(points):
        if not (np.all(np.isfinite(p.x)) and np.all(np.isfinite(p.f))):
            raise ValueError("front rows must be finite")
        row = [_fmt(v) for v in p.x[:-1]] + [_fmt(p.x[-1])]
        row += [_fmt(v) for v in p.f]
        if diag_keys:
            row += ["" if diagnostics[i][k] is None else _fmt(diagnostics[i][k])
                    for k in diag_keys]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def read_front_csv(path) -> tuple[list[FrontPoint], pd.DataFrame]:
    """Load a front file; returns the points and the full diagnostic frame."""
    df = pd.read_csv(path, float_precision="round_trip")
    coord_cols = sorted(
        (c for c in df.columns if c.startswith("c_")),
        key=lambda c: int(c.split("_")[1]),
    )
    f_cols = sorted(
        (c for c in df.columns if c.startswith("f_")),
        key=lambda c: int(c.split("_")[1]),
    )
    if not f_cols or "b" not in df.columns:
        raise SchemaError(f"{path} is not a front file (missing b/f_* columns)")
    points = []
    for i in range(len(df)):
        x = np.append(df.loc[i, coord_cols].to_numpy(dtype=float),
                      float(df.loc[i, "b"]))
        f = df.loc[i, f_cols].to_numpy(dtype=float)
        points.append(FrontPoint(x=x, f=f, uid=i))
    return points, df


def write_manifest(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
