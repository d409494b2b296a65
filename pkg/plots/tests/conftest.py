import json
import subprocess
import sys

import pytest

RUN_CONFIG = {
    "seed": 4,
    "dataset": {"kind": "synthetic", "n": 300},
    "smg": {"step": {"alpha0": 1.0, "decay_factor": 0.5, "decay_period": 20},
            "batches": [{"base": 40, "growth": 1.01}]},
    "pfsmg": {"iterate_budget": 30, "max_rounds": 6,
              "thinning_cell_fraction": 0.0125},
    "epsfair": {"n_thresholds": 8},
}


def run_cli(*argv):
    """Drive the front tool through its command line, its public interface."""
    proc = subprocess.run([sys.executable, "-m", "fairpareto.cli", *argv,
                           "--log-level", "WARNING"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Real artifacts produced by the front tool: fronts, a comparison
    report with profiles, and streaming snapshots."""
    root = tmp_path_factory.mktemp("artifacts")
    config = root / "run.json"
    config.write_text(json.dumps(RUN_CONFIG))
    run_cli("front", "--config", str(config), "--out", str(root / "search"),
            "--workers", "1")
    run_cli("epsfair", "--config", str(config), "--out", str(root / "baseline"),
            "--workers", "1")

    tri = dict(RUN_CONFIG, objectives=[
        {"kind": "logistic_loss"},
        {"kind": "di_binary", "attribute": "group"},
        {"kind": "di_multi", "attribute": "group", "beta": 8.0}])
    tri_config = root / "tri.json"
    tri_config.write_text(json.dumps(tri))
    run_cli("front", "--config", str(tri_config), "--out", str(root / "tri"),
            "--workers", "1")

    compare_config = root / "compare.json"
    compare_config.write_text(json.dumps({"problems": [RUN_CONFIG]}))
    run_cli("compare", "--config", str(compare_config),
            "--out", str(root / "versus"), "--workers", "1")

    stream = dict(RUN_CONFIG, stream={"source": "synthetic", "n_batches": 6,
                                      "batch_size": 80, "start_count": 4})
    stream_config = root / "stream.json"
    stream_config.write_text(json.dumps(stream))
    run_cli("stream", "--config", str(stream_config), "--out", str(root / "flow"),
            "--workers", "1")
    return root
