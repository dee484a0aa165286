"""Experiment grid orchestration and deterministic report writing.

A report's authoritative form is JSON; a CSV table mirrors it with one row
per grid cell.  Reports are written atomically.  Wall-clock timings and the
creation timestamp are inherently volatile, so determinism is defined over
`canonical_report_bytes`, which strips them.
"""

from __future__ import annotations

import copy
import hashlib
import io
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .classifiers import CLASSIFIERS, evaluate_classifier, make_classifier
from .data import Dataset, SplitPair, downsample, ingest, preprocess, scale_split, split
from .evo import EvoConfig
from .exceptions import ConfigurationError, DataError, EvoSelectError, UsageError
from .selection import (
    DEFAULT_INNER_RATIO,
    DEFAULT_INNER_SEED,
    CostWeights,
    select_features,
)

__all__ = [
    "ExperimentConfig",
    "DatasetSource",
    "run_experiment",
    "write_report",
    "canonical_report_bytes",
    "report_to_csv",
    "atomic_write_text",
]

REPORT_FORMAT = "evoselect.report"
REPORT_VERSION = 1
CONFIG_VERSION = 1


@dataclass(frozen=True)
class DatasetSource:
    name: str
    kind: str
    paths: tuple[str, ...]
    label_column: str | None = None


@dataclass
class ExperimentConfig:
    """Validated description of one experiment grid."""

    datasets: list[DatasetSource]
    classifiers: list[tuple[str, dict]]
    weights: CostWeights = CostWeights()
    evo: EvoConfig = EvoConfig(n_particles=20, max_fes=600)
    fs_grid: tuple[bool, ...] = (False, True)
    split_ratio: float = 0.8
    split_seed: int = 0
    n_per_label: int | None = None
    do_downsample: bool = True
    downsample_seed: int = 0
    impute: str = "median"
    inner_seed: int = DEFAULT_INNER_SEED
    inner_ratio: float = DEFAULT_INNER_RATIO
    folds: int | None = None
    train_seed: int = 0
    strict_scaling: bool = False
    metrics_average: str = "macro"
    raw: dict = field(default_factory=dict, repr=False)

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()
        ).hexdigest()[:16]


def _expect(condition: bool, path: str, message: str):
    if not condition:
        raise ConfigurationError(f"{path}: {message}")


def _get(obj: dict, key: str, default):
    value = obj.get(key, default)
    return default if value is None else value


def parse_experiment_config(document: dict) -> ExperimentConfig:
    """Validate a config document; failures name the offending field."""
    _expect(isinstance(document, dict), "$", "config must be a JSON object")
    version = document.get("schema_version", CONFIG_VERSION)
    _expect(
        version == CONFIG_VERSION,
        "schema_version",
        f"unsupported value {version!r} (expected {CONFIG_VERSION})",
    )

    raw_datasets = document.get("datasets")
    _expect(
        isinstance(raw_datasets, list) and raw_datasets,
        "datasets",
        "must be a non-empty list",
    )
    datasets = []
    for i, entry in enumerate(raw_datasets):
        path = f"datasets[{i}]"
        _expect(isinstance(entry, dict), path, "must be an object")
        kind = entry.get("kind", "generic")
        _expect(isinstance(kind, str), f"{path}.kind", "must be a string")
        paths = entry.get("paths")
        _expect(
            isinstance(paths, list) and paths and all(isinstance(p, str) for p in paths),
            f"{path}.paths",
            "must be a non-empty list of file paths",
        )
        datasets.append(
            DatasetSource(
                name=str(entry.get("name", f"{kind}-{i}")),
                kind=kind,
                paths=tuple(paths),
                label_column=entry.get("label_column"),
            )
        )

    raw_classifiers = document.get("classifiers", ["dtree"])
    _expect(
        isinstance(raw_classifiers, list) and raw_classifiers,
        "classifiers",
        "must be a non-empty list",
    )
    classifiers = []
    for i, entry in enumerate(raw_classifiers):
        path = f"classifiers[{i}]"
        if isinstance(entry, str):
            name, params = entry, {}
        else:
            _expect(isinstance(entry, dict), path, "must be a name or an object")
            name = entry.get("name")
            params = entry.get("params", {}) or {}
            _expect(isinstance(params, dict), f"{path}.params", "must be an object")
        _expect(
            name in CLASSIFIERS,
            f"{path}.name",
            f"unknown classifier {name!r} (choose from {sorted(CLASSIFIERS)})",
        )
        classifiers.append((name, dict(params)))

    weights_doc = _get(document, "weights", {})
    _expect(isinstance(weights_doc, dict), "weights", "must be an object")
    try:
        weights = CostWeights(
            accuracy_w=float(_get(weights_doc, "accuracy_w", 1.0)),
            fpr_w=float(_get(weights_doc, "fpr_w", 0.0)),
            fnr_w=float(_get(weights_doc, "fnr_w", 0.0)),
            ratio_w=float(_get(weights_doc, "ratio_w", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"weights: {exc}")

    evo_doc = _get(document, "evo", {})
    _expect(isinstance(evo_doc, dict), "evo", "must be an object")
    try:
        evo = EvoConfig(
            n_particles=int(_get(evo_doc, "n_particles", 20)),
            max_fes=int(_get(evo_doc, "max_fes", 600)),
            k_neighbors=evo_doc.get("k_neighbors"),
            seed=int(_get(evo_doc, "seed", 0)),
            stable_step_scale=float(_get(evo_doc, "stable_step_scale", 0.1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"evo: {exc}")

    grid_doc = _get(document, "grid", {})
    _expect(isinstance(grid_doc, dict), "grid", "must be an object")
    fs_grid = tuple(bool(v) for v in _get(grid_doc, "fs", [False, True]))
    _expect(bool(fs_grid), "grid.fs", "must list at least one of true/false")

    split_doc = _get(document, "split", {})
    _expect(isinstance(split_doc, dict), "split", "must be an object")
    ratio = float(_get(split_doc, "ratio", 0.8))
    _expect(0.0 < ratio < 1.0, "split.ratio", "must lie in (0, 1)")

    prep_doc = _get(document, "prep", {})
    _expect(isinstance(prep_doc, dict), "prep", "must be an object")
    n_per_label = prep_doc.get("n_per_label")
    if n_per_label is not None:
        n_per_label = int(n_per_label)
        _expect(n_per_label >= 1, "prep.n_per_label", "must be at least 1")
    impute = _get(prep_doc, "impute", "median")
    _expect(impute in ("median", "knn"), "prep.impute", "must be 'median' or 'knn'")

    inner_doc = _get(document, "inner", {})
    _expect(isinstance(inner_doc, dict), "inner", "must be an object")
    inner_ratio = float(_get(inner_doc, "ratio", DEFAULT_INNER_RATIO))
    _expect(0.0 < inner_ratio < 1.0, "inner.ratio", "must lie in (0, 1)")
    folds = inner_doc.get("folds")
    if folds is not None:
        folds = int(folds)
        _expect(folds >= 2, "inner.folds", "must be at least 2")

    average = _get(document, "metrics_average", "macro")
    _expect(
        average in ("macro", "weighted"),
        "metrics_average",
        "must be 'macro' or 'weighted'",
    )

    return ExperimentConfig(
        datasets=datasets,
        classifiers=classifiers,
        weights=weights,
        evo=evo,
        fs_grid=fs_grid,
        split_ratio=ratio,
        split_seed=int(_get(split_doc, "seed", 0)),
        n_per_label=n_per_label,
        do_downsample=bool(_get(prep_doc, "downsample", True)),
        downsample_seed=int(_get(prep_doc, "seed", 0)),
        impute=impute,
        inner_seed=int(_get(inner_doc, "seed", DEFAULT_INNER_SEED)),
        inner_ratio=inner_ratio,
        folds=folds,
        train_seed=int(_get(document, "train_seed", 0)),
        strict_scaling=bool(_get(document, "strict_scaling", False)),
        metrics_average=average,
        raw=copy.deepcopy(document),
    )


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})")
    return parse_experiment_config(document)


def prepare_dataset(source: DatasetSource, config: ExperimentConfig) -> SplitPair:
    """ingest -> preprocess -> downsample -> split, shared by all grid cells."""
    raw = ingest(list(source.paths), source.kind, label_column=source.label_column)
    ds = preprocess(
        raw,
        source.kind,
        impute=config.impute,
        scale=not config.strict_scaling,
        label_column=source.label_column,
    )
    if config.do_downsample:
        ds = downsample(ds, config.n_per_label, seed=config.downsample_seed)
    pair = split(ds, config.split_ratio, seed=config.split_seed)
    if config.strict_scaling:
        train, test, _ = scale_split(pair.train, pair.test)
        pair = SplitPair(train=train, test=test, ratio=pair.ratio, seed=pair.seed)
    return pair


def _run_cell(
    source_name: str,
    pair: SplitPair,
    model_name: str,
    params: dict,
    fs_applied: bool,
    config: ExperimentConfig,
) -> dict:
    train, test = pair.train, pair.test
    record = {
        "dataset": source_name,
        "model": model_name,
        "params": params,
        "fs_applied": fs_applied,
        "n_features_total": train.n_features,
        "seed": {
            "train": config.train_seed,
            "split": config.split_seed,
            "evo": config.evo.seed,
            "inner": config.inner_seed,
        },
        "error": None,
    }
    try:
        if fs_applied:
            fs_result = select_features(
                train,
                make_classifier(model_name, params, random_state=config.train_seed),
                config.weights,
                config.evo,
                inner_seed=config.inner_seed,
                inner_ratio=config.inner_ratio,
                folds=config.folds,
                seed=config.train_seed,
            )
            record["selected_feature_count"] = fs_result.n_selected
            record["selected_features"] = fs_result.selected_names
            record["fs_cost"] = fs_result.cost
            record["fs_evaluations"] = fs_result.opt.evaluations_used
            train = train.select_features(fs_result.mask)
            test = test.select_features(fs_result.mask)
        else:
            record["selected_feature_count"] = train.n_features
            record["selected_features"] = list(train.feature_names)

        model = make_classifier(model_name, params, random_state=config.train_seed)
        model.fit(train.X, train.y)
        metrics = evaluate_classifier(
            model, test.X, test.y, pair.train.n_classes, average=config.metrics_average
        )
        payload = metrics.to_dict()
        record["timing"] = {
            "train_time": payload.pop("train_time"),
            "test_time": payload.pop("test_time"),
        }
        record["metrics"] = payload
    except EvoSelectError as exc:
        record["error"] = {"type": type(exc).__name__, "message": str(exc)}
    return record


def run_experiment(config: ExperimentConfig, threads: int = 1) -> dict:
    """Execute the (dataset x classifier x fs) grid and assemble the report.

    Per-dataset preparation failures abort that dataset's cells (recorded as
    structured errors); other cells proceed.  Cells may run in parallel, the
    record order is fixed afterwards.
    """
    prepared: dict[str, SplitPair | Exception] = {}
    for source in config.datasets:
        try:
            prepared[source.name] = prepare_dataset(source, config)
        except EvoSelectError as exc:
            prepared[source.name] = exc

    cells = []
    for source in config.datasets:
        for model_name, params in config.classifiers:
            for fs_applied in config.fs_grid:
                cells.append((source.name, model_name, params, fs_applied))

    def run(cell):
        source_name, model_name, params, fs_applied = cell
        pair = prepared[source_name]
        if isinstance(pair, Exception):
            return {
                "dataset": source_name,
                "model": model_name,
                "params": params,
                "fs_applied": fs_applied,
                "error": {"type": type(pair).__name__, "message": str(pair)},
            }
        return _run_cell(source_name, pair, model_name, params, fs_applied, config)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run, cells))
    else:
        records = [run(cell) for cell in cells]

    records.sort(key=lambda r: (r["dataset"], r["model"], r["fs_applied"]))
    return {
        "format": REPORT_FORMAT,
        "schema_version": REPORT_VERSION,
        "meta": {
            "tool_version": __version__,
            "created": datetime.now(timezone.utc).isoformat(),
            "config_digest": config.digest(),
        },
        "records": records,
    }


def canonical_report_bytes(report: dict) -> bytes:
    """Report bytes with volatile content (timestamp, wall-clock timings)
    removed; two runs of the same config compare equal on this form."""
    clean = copy.deepcopy(report)
    clean.get("meta", {}).pop("created", None)
    for record in clean.get("records", []):
        record.pop("timing", None)
    return json.dumps(clean, sort_keys=True, indent=2).encode()


def report_to_csv(report: dict) -> str:
    """One row per grid cell, mirroring the classification result tables."""
    out = io.StringIO()
    out.write(
        "Dataset,Model,FS,Selected Features,Accuracy,Precision,Recall,"
        "F1-score,Training Time (s),Testing Time (s)\n"
    )
    for record in report.get("records", []):
        if record.get("error"):
            out.write(
                f"{record['dataset']},{record['model']},"
                f"{'yes' if record['fs_applied'] else 'no'},,,,,,,\n"
            )
            continue
        metrics = record["metrics"]
        timing = record["timing"]
        out.write(
            ",".join(
                [
                    record["dataset"],
                    record["model"],
                    "yes" if record["fs_applied"] else "no",
                    str(record["selected_feature_count"]),
                    f"{metrics['accuracy']:.6f}",
                    f"{metrics['precision']:.6f}",
                    f"{metrics['recall']:.6f}",
                    f"{metrics['f1']:.6f}",
                    f"{timing['train_time']:.6f}",
                    f"{timing['test_time']:.6f}",
                ]
            )
            + "\n"
        )
    return out.getvalue()


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: dict, out_dir: str) -> tuple[str, str]:
    """Write report.json and report.csv atomically; returns their paths."""
    json_path = os.path.join(out_dir, "report.json")
    csv_path = os.path.join(out_dir, "report.csv")
    atomic_write_text(json_path, json.dumps(report, sort_keys=True, indent=2) + "\n")
    atomic_write_text(csv_path, report_to_csv(report))
    return json_path, csv_path
