"""Command-line entry point for reproducible runs.

Subcommands: front, epsfair, compare, stream, synth, preprocess-adult,
preprocess-compas, metrics. Every run reads one JSON config (defaults fill
in anything omitted), writes its outputs under --out and records the fully
resolved config plus seed and tool version in a manifest, so a run can be
reproduced bit for bit. Exit codes: 0 success, 2 config error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

import fairpareto
from fairpareto import config as cfgmod
from fairpareto import data as datamod
from fairpareto import metrics as metricsmod
from fairpareto.epsfair import sweep_front
from fairpareto.errors import ConfigError, FairparetoError, PfsmgAborted
from fairpareto.frontio import read_front_csv, write_front_csv, write_manifest
from fairpareto.model import LinearModel, accuracy
from fairpareto.objectives import (
    build_objectives,
    fairness_report,
    has_positives_per_group,
)
from fairpareto.pfsmg import pfsmg_run
from fairpareto.streaming import (
    csv_shard_batches,
    stream_run,
    stream_run_reencoded,
    synthetic_batches,
)

logger = logging.getLogger(__name__)


def _prepare_data(cfg):
    """Dataset plus (train, valid, test) split; no split means train = test."""
    dataset = cfgmod.make_dataset(cfg)
    spec = cfgmod.make_split_spec(cfg)
    if spec is None:
        return dataset, (dataset, None, dataset)
    return dataset, datamod.split(dataset, spec)


def _diagnostics(points, cfg, diag_dataset):
    """Per-point diagnostic columns evaluated on the diagnostics split."""
    fairness_attrs = []
    for o in cfg["objectives"]:
        if o["attribute"] and o["attribute"] not in fairness_attrs:
            fairness_attrs.append(o["attribute"])
    multi = len(fairness_attrs) > 1
    rows = []
    for point in points:
        model = LinearModel.from_vector(point.x)
        row = {"accuracy": accuracy(model, diag_dataset)}
        for attr in fairness_attrs:
            with_fnr = has_positives_per_group(diag_dataset, attr)
            report = fairness_report(model, diag_dataset, attr, with_fnr=with_fnr)
            suffix = f"_{attr}" if multi else ""
            row[f"cv_score{suffix}"] = report.cv_score
            if report.cv_fnr is not None:
                row[f"cv_fnr{suffix}"] = report.cv_fnr
            for g, rate in enumerate(report.positive_rates):
                row[f"pos_rate_{attr}_{g}"] = rate
            if report.fnr is not None:
                for g, rate in enumerate(report.fnr):
                    row[f"fnr_{attr}_{g}"] = rate
        rows.append(row)
    return rows


def _run_algorithm(cfg, train, workers):
    specs = cfgmod.make_objective_specs(cfg)
    started = time.process_time()
    if cfg["algorithm"] == "epsfair":
        attribute = cfgmod.epsfair_attribute(cfg)
        front, stats = sweep_front(train, attribute, cfgmod.make_eps_config(cfg),
                                   workers=workers)
        grad_evals = stats.grad_samples
        extra = {"skipped_thresholds": stats.failures}
    else:
        objectives = build_objectives(specs, train)
        front, stats = pfsmg_run(objectives, cfgmod.make_schedules(cfg),
                                 cfgmod.make_pfsmg_config(cfg), cfg["seed"],
                                 workers=workers)
        grad_evals = stats.grad_samples
        extra = {"rounds": stats.rounds}
    return front, grad_evals, time.process_time() - started, extra


def _base_manifest(cfg, command):
    return {
        "command": command,
        "tool_version": fairpareto.__version__,
        "seed": cfg["seed"],
        "config": cfg,
    }


def cmd_front(cfg, out_dir: Path, workers: int, force_algorithm=None) -> int:
    if force_algorithm:
        cfg = dict(cfg, algorithm=force_algorithm)
    started = time.process_time()
    dataset, (train, valid, test) = _prepare_data(cfg)
    diag = test if cfg["diagnostics_split"] == "test" else train
    manifest = _base_manifest(cfg, "front")
    manifest["split_sizes"] = {
        "train": len(train),
        "valid": 0 if valid is None else len(valid),
        "test": len(test),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        front, grad_evals, algo_seconds, extra = _run_algorithm(cfg, train, workers)
    except PfsmgAborted as err:
        if err.partial_front:
            write_front_csv(out_dir / "front.csv", err.partial_front,
                            _diagnostics(err.partial_front, cfg, diag))
        manifest.update({"error": str(err),
                         "front_size": len(err.partial_front)})
        write_manifest(out_dir / "manifest.json", manifest)
        raise
    diagnostics = _diagnostics(front, cfg, diag)
    write_front_csv(out_dir / "front.csv", front, diagnostics)
    manifest.update({
        "front_file": "front.csv",
        "front_size": len(front),
        "n_objectives": len(cfg["objectives"]),
        "feature_dim": train.feature_dim,
        "attributes": {a.name: a.cardinality for a in train.attributes},
        "grad_evals": grad_evals,
        "timings": {"algorithm_s": algo_seconds,
                    "total_s": time.process_time() - started},
        **extra,
    })
    write_manifest(out_dir / "manifest.json", manifest)
    logger.info("wrote %d-point front to %s", len(front), out_dir / "front.csv")
    return 0


def _comparison_metrics(fronts_cmp, reference, purity_tolerance):
    values = {name: np.array([p.f for p in pts]) for name, pts in fronts_cmp.items()}
    pure = metricsmod.purity(values, tolerance=purity_tolerance)
    out = {}
    for name, F in values.items():
        out[name] = {
            "purity": pure[name],
            "gamma": metricsmod.spread_gamma(F),
            "delta": metricsmod.spread_delta(F) if F.shape[0] >= 2 else 0.0,
            "hypervolume": metricsmod.hypervolume(F, reference),
            "front_size": int(F.shape[0]),
        }
    return out


def cmd_compare(cfg, out_dir: Path, workers: int) -> int:
    problems = cfg.get("problems")
    if not problems:
        raise ConfigError("compare needs a 'problems' list in the config")
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved_problems = [cfgmod.resolve_config(p) for p in problems]
    report = {"problems": {}, "purity_floor": 1e-12}
    metric_tables: dict[str, dict[str, list[float]]] = {}
    for index, pcfg in enumerate(resolved_problems):
        name = f"problem_{index}"
        _, (train, _, _) = _prepare_data(pcfg)
        fronts, seconds, evals = {}, {}, {}
        for algorithm in ("pfsmg", "epsfair"):
            run_cfg = dict(pcfg, algorithm=algorithm)
            front, grad_evals, algo_seconds, _ = _run_algorithm(run_cfg, train,
                                                                workers)
            fronts[algorithm] = front
            seconds[algorithm] = algo_seconds
            evals[algorithm] = grad_evals
        # Match front sizes before quality metrics: the searched front is
        # down-sampled to the baseline's size when it is larger.
        size = len(fronts["epsfair"])
        cmp_fronts = dict(fronts)
        if len(fronts["pfsmg"]) > size >= 2:
            F = np.array([p.f for p in fronts["pfsmg"]])
            keep = metricsmod.downsample_indices(F, size)
            cmp_fronts["pfsmg"] = [fronts["pfsmg"][i] for i in sorted(keep)]
        reference = metricsmod.reference_point(
            [np.array([p.f for p in pts]) for pts in cmp_fronts.values()],
            pad=cfg["reference_pad"],
        )
        quality = _comparison_metrics(cmp_fronts, reference,
                                      cfg["purity_tolerance"])
        problem_report = {"hv_reference": reference.tolist()}
        for algorithm in ("pfsmg", "epsfair"):
            row = quality[algorithm]
            n_points = max(row["front_size"], 1)
            row.update({
                "cpu_seconds": seconds[algorithm],
                "grad_evals": evals[algorithm],
                "cpu_seconds_per_point": seconds[algorithm] / n_points,
                "grad_evals_per_point": evals[algorithm] / n_points,
            })
            problem_report[algorithm] = row
            for metric in ("purity", "gamma", "delta", "hypervolume",
                           "cpu_seconds_per_point", "grad_evals_per_point"):
                metric_tables.setdefault(metric, {}).setdefault(
                    algorithm, []).append(row[metric])
        report["problems"][name] = problem_report
    higher_better = {"purity": True, "hypervolume": True}
    floor = report["purity_floor"]
    report["profile_files"] = []
    for metric, table in metric_tables.items():
        clipped = {a: np.maximum(v, floor) for a, v in table.items()}
        curves = metricsmod.performance_profile(
            clipped, higher_is_better=higher_better.get(metric, False))
        path = out_dir / f"profile_{metric}.csv"
        lines = ["algorithm,tau,fraction"]
        for algorithm, curve in curves.items():
            for tau, fraction in curve:
                lines.append(f"{algorithm},{float(tau)!r},{float(fraction)!r}")
        path.write_text("\n".join(lines) + "\n")
        report["profile_files"].append(path.name)
    manifest = _base_manifest(cfg, "compare")
    manifest["report"] = report
    write_manifest(out_dir / "report.json", manifest)
    logger.info("compared %d problems into %s", len(resolved_problems), out_dir)
    return 0


def cmd_stream(cfg, out_dir: Path, workers: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = cfgmod.make_objective_specs(cfg)
    schedules = cfgmod.make_schedules(cfg)
    pf_config = cfgmod.make_pfsmg_config(cfg)
    stream_cfg = cfg["stream"]
    snapshots = []

    def snapshot_hook(state):
        index = len(snapshots) + 1
        name = f"front_update_{index:02d}.csv"
        diagnostics = _diagnostics(state.front, cfg, state.dataset)
        write_front_csv(out_dir / name, state.front, diagnostics)
        snapshots.append({
            "file": name,
            "samples": len(state.dataset),
            "front_size": len(state.front),
            "hypervolume": state.hypervolume_history[-1],
        })

    if stream_cfg["source"] == "synthetic":
        batches = synthetic_batches(
            stream_cfg["n_batches"], stream_cfg["batch_size"],
            cfg["dataset"]["seed"],
            cfgmod.make_synthetic_params(cfg["dataset"]["synthetic"]),
        )
        states = stream_run(batches, specs, schedules, pf_config, cfg["seed"],
                            start_count=stream_cfg["start_count"],
                            workers=workers, snapshot_hook=snapshot_hook)
    else:
        if not stream_cfg["shard_dir"]:
            raise ConfigError("stream.source 'shards' needs stream.shard_dir")
        if cfg["dataset"]["schema"] is None:
            raise ConfigError("shard streaming needs dataset.schema")
        schema = cfgmod.make_schema(cfg["dataset"]["schema"])
        batches = csv_shard_batches(stream_cfg["shard_dir"], schema)
        states = stream_run_reencoded(batches, specs, schedules, pf_config,
                                      cfg["seed"],
                                      start_count=stream_cfg["start_count"],
                                      workers=workers,
                                      snapshot_hook=snapshot_hook)
    manifest = _base_manifest(cfg, "stream")
    manifest.update({
        "snapshots": snapshots,
        "hypervolume_history": states[-1].hypervolume_history,
        "hv_reference": states[-1].reference.tolist(),
        "grad_evals": states[-1].grad_samples,
    })
    write_manifest(out_dir / "manifest.json", manifest)
    logger.info("wrote %d stream snapshots to %s", len(snapshots), out_dir)
    return 0


def cmd_synth(cfg, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    section = cfg["dataset"]
    dataset = datamod.generate_synthetic(
        section["n"], section["seed"],
        cfgmod.make_synthetic_params(section["synthetic"]))
    datamod.save_canonical(dataset, out_dir / "data.csv")
    manifest = _base_manifest(cfg, "synth")
    manifest.update({"rows": len(dataset), "files": ["data.csv", "data.json"]})
    write_manifest(out_dir / "manifest.json", manifest)
    logger.info("wrote %d synthetic rows to %s", len(dataset), out_dir)
    return 0


def _write_preprocessed(dataset, cfg, out_dir: Path, command: str) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    datamod.save_canonical(dataset, out_dir / "data.csv")
    manifest = _base_manifest(cfg, command)
    demographics = {}
    for attr in dataset.attributes:
        codes = dataset.sensitive[attr.name]
        demographics[attr.name] = {
            (attr.categories[g] if attr.categories else str(g)):
                int(np.sum(codes == g))
            for g in range(attr.cardinality)
        }
    manifest.update({
        "rows": len(dataset),
        "positive_labels": int(np.sum(dataset.labels == 1)),
        "demographics": demographics,
        "files": ["data.csv", "data.json"],
    })
    write_manifest(out_dir / "manifest.json", manifest)
    logger.info("wrote %d rows to %s", len(dataset), out_dir)
    return 0


def cmd_metrics(cfg, out_dir: Path) -> int:
    paths = cfg.get("fronts")
    if not paths:
        raise ConfigError("metrics needs a 'fronts' list of front CSV paths")
    names = cfg.get("names") or [Path(p).stem for p in paths]
    if len(names) != len(paths):
        raise ConfigError("names must match fronts")
    out_dir.mkdir(parents=True, exist_ok=True)
    fronts = {}
    for name, path in zip(names, paths):
        points, _ = read_front_csv(path)
        fronts[name] = np.array([p.f for p in points])
    reference = metricsmod.reference_point(list(fronts.values()),
                                           pad=cfg["reference_pad"])
    report = {"hv_reference": reference.tolist(), "fronts": {}}
    pure = (metricsmod.purity(fronts, tolerance=cfg["purity_tolerance"])
            if len(fronts) >= 2 else {})
    for name, F in fronts.items():
        report["fronts"][name] = {
            "size": int(F.shape[0]),
            "gamma": metricsmod.spread_gamma(F),
            "delta": metricsmod.spread_delta(F) if F.shape[0] >= 2 else 0.0,
            "hypervolume": metricsmod.hypervolume(F, reference),
            **({"purity": pure[name]} if pure else {}),
        }
    write_manifest(out_dir / "metrics.json", report)
    logger.info("wrote metrics for %d fronts to %s", len(fronts), out_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairpareto",
        description="Accuracy-fairness Pareto fronts for linear classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, info in (
        ("front", "run the configured front algorithm"),
        ("epsfair", "run the epsilon-constraint baseline"),
        ("compare", "run both algorithms over a problem list and report metrics"),
        ("stream", "maintain a front over arriving data batches"),
        ("synth", "generate and save a synthetic dataset"),
        ("preprocess-adult", "encode the Adult census files"),
        ("preprocess-compas", "encode the ProPublica recidivism file"),
        ("metrics", "score existing front files"),
    ):
        p = sub.add_parser(name, help=info)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: available cores; "
                            "use 1 for bit-reproducible runs)")
        p.add_argument("--log-level", default="INFO")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = (cfgmod.load_config(args.config) if args.config
               else cfgmod.resolve_config({}))
        if args.seed is not None:
            cfg = cfgmod.resolve_config({**cfg, "seed": args.seed,
                                         "dataset": {**cfg["dataset"], "seed": None},
                                         "split": {**cfg["split"], "seed": None}
                                         if cfg["split"] else None})
        out_dir = args.out or Path(cfg["out"] or f"runs/{args.command}")
        workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    try:
        if args.command == "front":
            return cmd_front(cfg, out_dir, workers)
        if args.command == "epsfair":
            return cmd_front(cfg, out_dir, workers, force_algorithm="epsfair")
        if args.command == "compare":
            return cmd_compare(cfg, out_dir, workers)
        if args.command == "stream":
            return cmd_stream(cfg, out_dir, workers)
        if args.command == "synth":
            return cmd_synth(cfg, out_dir)
        if args.command == "preprocess-adult":
            dataset = datamod.preprocess_adult(cfg["dataset"]["raw_dir"])
            return _write_preprocessed(dataset, cfg, out_dir, "preprocess-adult")
        if args.command == "preprocess-compas":
            dataset = datamod.load_compas(cfg["dataset"]["path"])
            return _write_preprocessed(dataset, cfg, out_dir, "preprocess-compas")
        if args.command == "metrics":
            return cmd_metrics(cfg, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (FairparetoError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
