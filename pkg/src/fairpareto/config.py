"""Run-configuration parsing: one JSON document drives a whole run.

Unknown keys are rejected; every omitted key is filled with its default so
the resolved document written back into the run manifest is complete and
re-runnable.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from fairpareto.data import (
    CsvSchema,
    Dataset,
    DEFAULT_MISSING,
    SplitSpec,
    SyntheticParams,
    generate_synthetic,
    load_canonical,
    load_compas,
    load_csv,
    preprocess_adult,
)
from fairpareto.epsfair import EpsSweepConfig
from fairpareto.errors import ConfigError
from fairpareto.objectives import ObjectiveSpec
from fairpareto.pfsmg import PfsmgConfig, SmgSchedules
from fairpareto.smg import BatchSchedule, StepSchedule

_SPLIT_DEFAULT = {"train": 0.6, "valid": 0.1, "test": 0.3, "seed": None}

_DATASET_DEFAULTS = {
    "kind": "synthetic",
    "n": 2000,
    "path": None,
    "raw_dir": None,
    "seed": None,
    "schema": None,
    "synthetic": {
        "mean_pos": [2.0, 2.0],
        "cov_pos": [[5.0, 1.0], [1.0, 5.0]],
        "mean_neg": [-2.0, -2.0],
        "cov_neg": [[10.0, 1.0], [1.0, 3.0]],
        "rotation": math.pi / 4,
        "attribute": "group",
    },
}

_SCHEMA_DEFAULTS = {
    "label": None,
    "positive_label": None,
    "sensitive": [],
    "continuous": [],
    "categorical": [],
    "missing_values": list(DEFAULT_MISSING),
}

_OBJECTIVE_DEFAULTS = {"kind": None, "attribute": None, "beta": 8.0,
                       "lambda_reg": 0.0}

_SMG_DEFAULTS = {
    "step": {"alpha0": 2.1, "decay_factor": 1.0 / 3.0, "decay_period": 500},
    "batches": [{"base": 80, "growth": 1.018}],
}

_PFSMG_DEFAULTS = {
    "initial_points": 5,
    "perturbations_per_point": 2,
    "runs_per_point": 3,
    "iters_per_run": 2,
    "point_budget": 1500,
    "iterate_budget": 1000,
    "perturbation_radius": 0.1,
    "thinning_cell_fraction": 1.0 / 200.0,
    "thinning": True,
    "max_rounds": 10000,
}

_EPSFAIR_DEFAULTS = {
    "n_thresholds": 50,
    "tol_feasibility": 1e-6,
    "tol_stationarity": 1e-5,
    "tol_unconstrained": 1e-6,
    "max_outer": 50,
    "penalty_init": 10.0,
    "penalty_growth": 10.0,
    "max_inner_iter": 5000,
}

_STREAM_DEFAULTS = {
    "source": "synthetic",
    "n_batches": 6,
    "batch_size": 2000,
    "start_count": 5,
    "shard_dir": None,
}

_TOP_DEFAULTS = {
    "seed": 0,
    "out": None,
    "algorithm": "pfsmg",
    "diagnostics_split": "test",
    "dataset": _DATASET_DEFAULTS,
    "split": _SPLIT_DEFAULT,
    "objectives": [
        {"kind": "logistic_loss", "attribute": None, "beta": 8.0, "lambda_reg": 0.0},
        {"kind": "di_binary", "attribute": "group", "beta": 8.0, "lambda_reg": 0.0},
    ],
    "smg": _SMG_DEFAULTS,
    "pfsmg": _PFSMG_DEFAULTS,
    "epsfair": _EPSFAIR_DEFAULTS,
    "stream": _STREAM_DEFAULTS,
    # compare-only keys
    "problems": None,
    "purity_tolerance": 0.0,
    "reference_pad": 0.1,
    # metrics-only keys
    "fronts": None,
    "names": None,
}


def _merge(user, defaults, path: str):
    """Fill defaults into a user mapping, rejecting unknown keys."""
    if user is None:
        return copy.deepcopy(defaults)
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys at {path or 'top level'}: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        dotted = f"{path}.{key}" if path else key
        if key not in user or user[key] is None:
            out[key] = copy.deepcopy(default)
        elif isinstance(default, dict):
            out[key] = _merge(user[key], default, dotted)
        else:
            out[key] = copy.deepcopy(user[key])
    return out


def resolve_config(raw: dict | None) -> dict:
    """Validate a raw config document and fill in every default."""
    cfg = _merge(raw or {}, _TOP_DEFAULTS, "")
    if cfg["algorithm"] not in ("pfsmg", "epsfair"):
        raise ConfigError(f"unknown algorithm {cfg['algorithm']!r}")
    if cfg["diagnostics_split"] not in ("test", "train"):
        raise ConfigError("diagnostics_split must be 'test' or 'train'")
    kind = cfg["dataset"]["kind"]
    if kind not in ("synthetic", "csv", "canonical", "adult", "compas"):
        raise ConfigError(f"unknown dataset kind {kind!r}")
    if kind == "csv":
        if cfg["dataset"]["schema"] is None:
            raise ConfigError("csv datasets need a dataset.schema section")
        cfg["dataset"]["schema"] = _merge(cfg["dataset"]["schema"],
                                          _SCHEMA_DEFAULTS, "dataset.schema")
        for key in ("label", "positive_label"):
            if not cfg["dataset"]["schema"][key]:
                raise ConfigError(f"dataset.schema.{key} is required")
    if kind in ("csv", "canonical", "compas") and not cfg["dataset"]["path"]:
        raise ConfigError(f"dataset kind {kind!r} needs dataset.path")
    if kind == "adult" and not cfg["dataset"]["raw_dir"]:
        raise ConfigError("dataset kind 'adult' needs dataset.raw_dir")
    objectives = cfg["objectives"]
    if not isinstance(objectives, list) or not objectives:
        raise ConfigError("objectives must be a nonempty list")
    cfg["objectives"] = [
        _merge(o, _OBJECTIVE_DEFAULTS, f"objectives[{i}]")
        for i, o in enumerate(objectives)
    ]
    batches = cfg["smg"]["batches"]
    if isinstance(batches, dict):
        batches = [batches]
    if not isinstance(batches, list) or not batches:
        raise ConfigError("smg.batches must be a schedule or list of schedules")
    batches = [_merge(b, {"base": 80, "growth": 1.018}, f"smg.batches[{i}]")
               for i, b in enumerate(batches)]
    if len(batches) == 1:
        batches = batches * len(cfg["objectives"])
    if len(batches) != len(cfg["objectives"]):
        raise ConfigError("smg.batches must match the number of objectives")
    cfg["smg"]["batches"] = batches
    if cfg["dataset"]["seed"] is None:
        cfg["dataset"]["seed"] = cfg["seed"]
    if cfg["split"] and cfg["split"].get("seed") is None:
        cfg["split"]["seed"] = cfg["seed"] + 1
    if cfg["stream"]["source"] not in ("synthetic", "shards"):
        raise ConfigError("stream.source must be 'synthetic' or 'shards'")
    return cfg


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return resolve_config(raw)


# ---------------------------------------------------------------------------
# Builders from a resolved config
# ---------------------------------------------------------------------------


def make_schema(section: dict) -> CsvSchema:
    return CsvSchema(
        label=section["label"],
        positive_label=section["positive_label"],
        sensitive=tuple(section["sensitive"]),
        continuous=tuple(section["continuous"]),
        categorical=tuple(section["categorical"]),
        missing_values=tuple(section["missing_values"]),
    )


def make_synthetic_params(section: dict) -> SyntheticParams:
    return SyntheticParams(
        mean_pos=tuple(section["mean_pos"]),
        cov_pos=tuple(map(tuple, section["cov_pos"])),
        mean_neg=tuple(section["mean_neg"]),
        cov_neg=tuple(map(tuple, section["cov_neg"])),
        rotation=section["rotation"],
        attribute=section["attribute"],
    )


def make_dataset(cfg: dict) -> Dataset:
    section = cfg["dataset"]
    kind = section["kind"]
    if kind == "synthetic":
        return generate_synthetic(section["n"], section["seed"],
                                  make_synthetic_params(section["synthetic"]))
    if kind == "csv":
        return load_csv(section["path"], make_schema(section["schema"]))
    if kind == "canonical":
        return load_canonical(section["path"])
    if kind == "adult":
        return preprocess_adult(section["raw_dir"])
    return load_compas(section["path"])


def make_split_spec(cfg: dict) -> SplitSpec | None:
    section = cfg["split"]
    if not section:
        return None
    return SplitSpec(train=section["train"], valid=section["valid"],
                     test=section["test"], seed=section["seed"])


def make_objective_specs(cfg: dict) -> list[ObjectiveSpec]:
    try:
        return [
            ObjectiveSpec(kind=o["kind"], attribute=o["attribute"],
                          beta=o["beta"], lambda_reg=o["lambda_reg"])
            for o in cfg["objectives"]
        ]
    except Exception as err:
        raise ConfigError(str(err)) from err


def make_schedules(cfg: dict) -> SmgSchedules:
    step = cfg["smg"]["step"]
    try:
        return SmgSchedules(
            step=StepSchedule(alpha0=step["alpha0"],
                              decay_factor=step["decay_factor"],
                              decay_period=step["decay_period"]),
            batches=tuple(BatchSchedule(base=b["base"], growth=b["growth"])
                          for b in cfg["smg"]["batches"]),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def make_pfsmg_config(cfg: dict) -> PfsmgConfig:
    try:
        return PfsmgConfig(**cfg["pfsmg"])
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err


def make_eps_config(cfg: dict) -> EpsSweepConfig:
    loss_specs = [o for o in cfg["objectives"] if o["kind"] == "logistic_loss"]
    lambda_reg = loss_specs[0]["lambda_reg"] if loss_specs else 0.0
    try:
        return EpsSweepConfig(lambda_reg=lambda_reg, **cfg["epsfair"])
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err


def epsfair_attribute(cfg: dict) -> str:
    """The sensitive attribute of the baseline's covariance constraint."""
    kinds = [o["kind"] for o in cfg["objectives"]]
    if kinds != ["logistic_loss", "di_binary"]:
        raise ConfigError(
            "the epsilon-constraint baseline needs exactly the objectives "
            "[logistic_loss, di_binary]; got " + str(kinds)
        )
    return cfg["objectives"][1]["attribute"]
