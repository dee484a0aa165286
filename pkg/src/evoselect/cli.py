"""Command-line interface.

Subcommands: prep, describe, select, eval, experiment, bench.
Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .benchmarks import benchmark_bounds
from .classifiers import CLASSIFIERS, evaluate_classifier, make_classifier, save_model
from .data import downsample, get_kind, ingest, load_dataset, preprocess, save_dataset, split
from .evo import Bounds, EvoConfig, optimize
from .exceptions import ConfigurationError, DataError, UsageError
from .experiment import (
    atomic_write_text,
    canonical_report_bytes,
    load_experiment_config,
    run_experiment,
    write_report,
)
from .metrics import confusion_to_csv
from .selection import (
    DEFAULT_INNER_RATIO,
    DEFAULT_INNER_SEED,
    CostWeights,
    select_features,
)


def _dump_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _model_params(arg: str | None) -> dict:
    if not arg:
        return {}
    try:
        params = json.loads(arg)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--model-params is not valid JSON: {exc}")
    if not isinstance(params, dict):
        raise UsageError("--model-params must be a JSON object")
    return params


def _evo_config(args) -> EvoConfig:
    return EvoConfig(
        n_particles=args.n_particles,
        max_fes=args.max_fes,
        k_neighbors=args.k_neighbors,
        seed=args.seed,
        stable_step_scale=args.stable_step_scale,
    )


def cmd_prep(args) -> int:
    raw = ingest(args.inputs, args.kind, label_column=args.label_column)
    ds = preprocess(
        raw, args.kind, impute=args.impute, label_column=args.label_column
    )
    if not args.no_downsample:
        ds = downsample(ds, args.n_per_label, seed=args.seed)
    path = save_dataset(ds, args.out or "prepared.npz")
    counts = {
        name: int(c) for name, c in zip(ds.class_names, ds.class_counts())
    }
    print(f"wrote {path} ({ds.n_samples} rows, {ds.n_features} features, classes {counts})")
    return 0


def _describe_raw(args) -> dict:
    raw = ingest(args.inputs, args.kind, label_column=args.label_column)
    kind = get_kind(args.kind)
    label_col = args.label_column or kind.label_column
    label_idx = raw.columns.index(label_col)
    labels: dict[str, int] = {}
    for row in raw.rows:
        key = row[label_idx].strip()
        labels[key] = labels.get(key, 0) + 1
    columns = {}
    for j, name in enumerate(raw.columns):
        if j == label_idx:
            continue
        observed = []
        missing = 0
        for row in raw.rows:
            try:
                value = float(row[j])
            except ValueError:
                missing += 1
                continue
            if math.isfinite(value):
                observed.append(value)
            else:
                missing += 1
        stats = {"missing": missing}
        if observed:
            arr = np.asarray(observed)
            stats.update(
                min=float(arr.min()), max=float(arr.max()), mean=float(arr.mean())
            )
        columns[name] = stats
    return {
        "sources": raw.sources,
        "rows": raw.n_rows,
        "class_counts": labels,
        "columns": columns,
    }


def _describe_cache(args) -> dict:
    ds = load_dataset(args.data)
    return {
        "rows": ds.n_samples,
        "features": ds.n_features,
        "class_counts": {
            name: int(c) for name, c in zip(ds.class_names, ds.class_counts())
        },
        "columns": {
            name: {
                "min": float(ds.X[:, j].min()),
                "max": float(ds.X[:, j].max()),
                "mean": float(ds.X[:, j].mean()),
            }
            for j, name in enumerate(ds.feature_names)
        },
        "provenance": ds.provenance,
    }


def cmd_describe(args) -> int:
    if bool(args.inputs) == bool(args.data):
        raise UsageError("describe needs either --inputs or --data (not both)")
    payload = _describe_raw(args) if args.inputs else _describe_cache(args)
    _dump_json(payload, args.out)
    return 0


def cmd_select(args) -> int:
    ds = load_dataset(args.data)
    estimator = make_classifier(
        args.model, _model_params(args.model_params), random_state=args.train_seed
    )
    weights = CostWeights(*args.weights)
    result = select_features(
        ds,
        estimator,
        weights,
        _evo_config(args),
        inner_seed=args.inner_seed,
        inner_ratio=args.inner_ratio,
        folds=args.folds,
        seed=args.train_seed,
    )
    _dump_json(result.to_dict(), args.out)
    if args.out:
        print(
            f"selected {result.n_selected}/{ds.n_features} features "
            f"(cost {result.cost:.6f}) -> {args.out}"
        )
    return 0


def cmd_eval(args) -> int:
    ds = load_dataset(args.data)
    mask_info = None
    if args.mask:
        with open(args.mask, "r", encoding="utf-8") as fh:
            mask_doc = json.load(fh)
        mask = np.asarray(mask_doc["mask"], dtype=bool)
        ds = ds.select_features(mask)
        mask_info = {"path": args.mask, "selected": int(mask.sum())}
    pair = split(ds, args.ratio, seed=args.split_seed)
    model = make_classifier(
        args.model, _model_params(args.model_params), random_state=args.seed
    )
    model.fit(pair.train.X, pair.train.y)
    metrics = evaluate_classifier(
        model, pair.test.X, pair.test.y, ds.n_classes, average=args.average
    )
    if args.save_model:
        save_model(model, args.save_model)
    payload = {
        "model": args.model,
        "params": _model_params(args.model_params),
        "split": {"ratio": args.ratio, "seed": args.split_seed},
        "train_rows": pair.train.n_samples,
        "test_rows": pair.test.n_samples,
        "mask": mask_info,
        "metrics": metrics.to_dict(),
    }
    _dump_json(payload, args.out)
    if args.out:
        grid = confusion_to_csv(metrics.confusion, ds.class_names)
        atomic_write_text(os.path.splitext(args.out)[0] + ".confusion.csv", grid)
    return 0


def cmd_experiment(args) -> int:
    if not args.config:
        raise UsageError("experiment requires --config <file>")
    config = load_experiment_config(args.config)
    if args.strict_scaling:
        config.strict_scaling = True
    report = run_experiment(config, threads=args.threads)
    out_dir = args.out or "."
    json_path, csv_path = write_report(report, out_dir)
    atomic_write_text(
        os.path.join(out_dir, "report.canonical.json"),
        canonical_report_bytes(report).decode() + "\n",
    )
    errors = sum(1 for r in report["records"] if r.get("error"))
    print(
        f"wrote {json_path} and {csv_path}: {len(report['records'])} records, "
        f"{errors} errors"
    )
    return 0


def cmd_bench(args) -> int:
    function, lo, hi = benchmark_bounds(args.function)
    seeds = args.seeds if args.seeds is not None else [args.seed]
    history_rows = ["seed,iteration,best_fitness"]
    finals = []
    for seed in seeds:
        config = EvoConfig(
            n_particles=args.n_particles,
            max_fes=args.max_fes,
            k_neighbors=args.k_neighbors,
            seed=seed,
            stable_step_scale=args.stable_step_scale,
        )
        result = optimize(function, Bounds(lo, hi, dims=args.dims), config)
        finals.append(result.best_fitness)
        for i, value in enumerate(result.history):
            history_rows.append(f"{seed},{i},{value!r}")
    prefix = args.out or "bench"
    atomic_write_text(prefix + "_history.csv", "\n".join(history_rows) + "\n")
    summary = {
        "function": args.function,
        "dims": args.dims,
        "n_particles": args.n_particles,
        "max_fes": args.max_fes,
        "seeds": list(seeds),
        "final_best": finals,
        "median_final_best": float(np.median(finals)),
    }
    atomic_write_text(prefix + "_summary.json", json.dumps(summary, indent=2) + "\n")
    print(
        f"{args.function} d={args.dims}: median best {summary['median_final_best']:.3e} "
        f"over {len(seeds)} seed(s) -> {prefix}_summary.json"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for this command")
    common.add_argument("--out", help="output path (or directory for experiment)")
    common.add_argument("--config", help="JSON config file (experiment)")
    common.add_argument("--threads", type=int, default=1, help="parallel grid cells")
    common.add_argument(
        "--strict-scaling",
        action="store_true",
        help="fit min-max scaling on the training split only (experiment)",
    )

    evo_flags = argparse.ArgumentParser(add_help=False)
    evo_flags.add_argument("--n-particles", type=int, default=30)
    evo_flags.add_argument("--max-fes", type=int, default=5000)
    evo_flags.add_argument("--k-neighbors", type=int, default=None)
    evo_flags.add_argument("--stable-step-scale", type=float, default=0.1)

    parser = argparse.ArgumentParser(
        prog="evoselect",
        description="Energy-valley feature selection and classifier benchmarking",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", parents=[common], help="ingest, clean and balance CSVs")
    p.add_argument("--kind", default="generic", help="dataset kind (ddos2019, ids2018, generic)")
    p.add_argument("--inputs", nargs="+", required=True, help="CSV files")
    p.add_argument("--label-column", default=None)
    p.add_argument("--n-per-label", type=int, default=None, help="cap per class (default: minority count)")
    p.add_argument("--no-downsample", action="store_true")
    p.add_argument("--impute", choices=["median", "knn"], default="median")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("describe", parents=[common], help="summarize a CSV set or a prepared cache")
    p.add_argument("--kind", default="generic")
    p.add_argument("--inputs", nargs="*", default=None)
    p.add_argument("--label-column", default=None)
    p.add_argument("--data", help="prepared .npz cache")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser(
        "select", parents=[common, evo_flags], help="run feature selection on a prepared cache"
    )
    p.add_argument("--data", required=True, help="prepared .npz cache")
    p.add_argument("--model", required=True, choices=sorted(CLASSIFIERS))
    p.add_argument("--model-params", default=None, help="JSON object of hyperparameters")
    p.add_argument(
        "--weights",
        type=float,
        nargs=4,
        default=[1.0, 0.0, 0.0, 0.0],
        metavar=("ACC", "FPR", "FNR", "RATIO"),
    )
    p.add_argument("--inner-seed", type=int, default=DEFAULT_INNER_SEED)
    p.add_argument("--inner-ratio", type=float, default=DEFAULT_INNER_RATIO)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--train-seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", parents=[common], help="train and score one classifier")
    p.add_argument("--data", required=True, help="prepared .npz cache")
    p.add_argument("--model", required=True, choices=sorted(CLASSIFIERS))
    p.add_argument("--model-params", default=None)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--mask", help="feature-selection result JSON to apply")
    p.add_argument("--average", choices=["macro", "weighted"], default="macro")
    p.add_argument("--save-model", help="write the trained model JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", parents=[common], help="run the full before/after grid")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", parents=[common, evo_flags], help="optimizer convergence benchmark")
    p.add_argument("--function", required=True, choices=["sphere", "rastrigin", "rosenbrock"])
    p.add_argument("--dims", type=int, required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
