import json

import pytest

from fairplots.render import PlotError, PlotSpec, main, render


def _spec(kind, inputs, out, **extra):
    return PlotSpec(kind=kind, inputs=tuple(str(i) for i in inputs),
                    out=str(out), **extra)


def _tiny_front(path, rows=((0.1, 0.9), (0.5, 0.5), (0.9, 0.1))):
    lines = ["c_0,b,f_1,f_2"]
    lines += [f"0.0,0.0,{a},{b}" for a, b in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


# --- spec parsing ------------------------------------------------------------

def test_spec_rejects_unknown_kind():
    with pytest.raises(PlotError, match="kind"):
        PlotSpec(kind="pie", inputs=("x.csv",), out="x.svg")


def test_spec_from_json_validates(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"kind": "front2d", "inputs": ["f.csv"]}))
    with pytest.raises(PlotError, match="out"):
        PlotSpec.from_json(path)
    path.write_text(json.dumps({"kind": "front2d", "inputs": ["f.csv"],
                                "out": "x.svg", "colour": "red"}))
    with pytest.raises(PlotError, match="colour"):
        PlotSpec.from_json(path)


# --- front2d -----------------------------------------------------------------

def test_front2d_marker_per_point(tmp_path):
    import re

    front = _tiny_front(tmp_path / "front.csv")
    out = render(_spec("front2d", [front], tmp_path / "front.svg"))
    svg = out.read_text()
    scatter = re.search(r'<g id="PathCollection_1">(.*?)</g>', svg, re.S)
    assert scatter is not None
    assert scatter.group(1).count("<use") == 3  # one marker per front point
    assert "f_1" in svg and "f_2" in svg  # axis labels present


def test_front2d_overlays_multiple_fronts(artifacts, tmp_path):
    out = render(_spec("front2d",
                       [artifacts / "search" / "front.csv",
                        artifacts / "baseline" / "front.csv"],
                       tmp_path / "overlay.svg",
                       labels=("search", "baseline")))
    svg = out.read_text()
    assert "search" in svg and "baseline" in svg


def test_front2d_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("c_0,b,f_1\n0.0,0.0,0.5\n")
    with pytest.raises(PlotError, match="f_2"):
        render(_spec("front2d", [bad], tmp_path / "x.svg"))


def test_byte_stable_rerenders(tmp_path):
    front = _tiny_front(tmp_path / "front.csv")
    a = render(_spec("front2d", [front], tmp_path / "a.svg"))
    b = render(_spec("front2d", [front], tmp_path / "b.svg"))
    assert a.read_bytes() == b.read_bytes()
    assert front.read_text().startswith("c_0,b,f_1,f_2")  # inputs untouched


# --- front3d -----------------------------------------------------------------

def test_front3d_renders_with_binned_projection(artifacts, tmp_path):
    out = render(_spec("front3d", [artifacts / "tri" / "front.csv"],
                       tmp_path / "tri.svg"))
    svg = out.read_text()
    assert svg.count("f_1 in [") == 3  # fixed three-bin legend


def test_front3d_missing_third_objective(tmp_path):
    front = _tiny_front(tmp_path / "front.csv")
    with pytest.raises(PlotError, match="f_3"):
        render(_spec("front3d", [front], tmp_path / "x.svg"))


# --- rates and cv ----------------------------------------------------------------

def test_rates_renders_groups(artifacts, tmp_path):
    out = render(_spec("rates", [artifacts / "search" / "front.csv"],
                       tmp_path / "rates.svg"))
    svg = out.read_text()
    assert "positive-outcome rate" in svg
    assert "group_0" in svg and "group_1" in svg


def test_rates_missing_rate_columns(tmp_path):
    front = _tiny_front(tmp_path / "front.csv")
    with pytest.raises(PlotError, match="pos_rate"):
        render(_spec("rates", [front], tmp_path / "x.svg"))


def test_cv_two_panels(artifacts, tmp_path):
    out = render(_spec("cv", [artifacts / "search" / "front.csv"],
                       tmp_path / "cv.svg"))
    svg = out.read_text()
    assert svg.count('id="axes_') == 2
    assert "CV score" in svg and "accuracy" in svg


def test_cv_missing_columns(tmp_path):
    front = _tiny_front(tmp_path / "front.csv")
    with pytest.raises(PlotError, match="cv_score"):
        render(_spec("cv", [front], tmp_path / "x.svg"))


# --- profiles ------------------------------------------------------------------

def test_profiles_step_curves_start_at_one(artifacts, tmp_path):
    profiles = sorted((artifacts / "versus").glob("profile_*.csv"))
    assert len(profiles) == 6
    import pandas as pd

    for path in profiles:
        assert pd.read_csv(path)["tau"].min() == 1.0
    out = render(_spec("profiles", profiles[:2], tmp_path / "profiles.svg"))
    svg = out.read_text()
    assert "pfsmg" in svg and "epsfair" in svg  # one curve per algorithm
    assert svg.count('id="axes_') == 2


def test_profiles_missing_columns(tmp_path):
    bad = tmp_path / "profile_x.csv"
    bad.write_text("algorithm,tau\npfsmg,1.0\n")
    with pytest.raises(PlotError, match="fraction"):
        render(_spec("profiles", [bad], tmp_path / "x.svg"))


# --- stream grid ------------------------------------------------------------------

def test_stream_grid_panel_layout(artifacts, tmp_path):
    snapshots = sorted((artifacts / "flow").glob("front_update_*.csv"))
    assert len(snapshots) == 6
    out = render(_spec("stream-grid", snapshots, tmp_path / "grid.svg",
                       manifest=str(artifacts / "flow" / "manifest.json")))
    svg = out.read_text()
    assert svg.count('id="axes_') == 6  # 2x3 grid, one panel per snapshot
    assert "80 samples" in svg and "480 samples" in svg


# --- command line -------------------------------------------------------------------

def test_cli_renders_and_reports_errors(tmp_path, capsys):
    front = _tiny_front(tmp_path / "front.csv")
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"kind": "front2d", "inputs": [str(front)],
                                "out": str(tmp_path / "out.svg")}))
    assert main(["--spec", str(spec)]) == 0
    assert (tmp_path / "out.svg").exists()

    bad = tmp_path / "bad.csv"
    bad.write_text("c_0,b,f_1\n0.0,0.0,0.5\n")
    spec.write_text(json.dumps({"kind": "front2d", "inputs": [str(bad)],
                                "out": str(tmp_path / "out2.svg")}))
    assert main(["--spec", str(spec)]) == 2
    assert "f_2" in capsys.readouterr().err
