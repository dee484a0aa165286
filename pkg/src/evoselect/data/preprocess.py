"""Cleaning pipeline: drop identifiers, parse, impute, dedup, encode, scale."""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import DataError, SchemaError, UsageError
from .dataset import Dataset
from .ingest import RawTable
from .schema import get_kind

__all__ = ["preprocess", "fit_minmax", "apply_minmax", "scale_split"]


def _parse_column(cells: list[str]) -> np.ndarray:
    """Parse one text column to float64; unparseable or non-finite -> NaN."""
    arr = np.asarray(cells)
    try:
        values = arr.astype(float)
    except ValueError:
        values = np.empty(len(cells))
        for i, cell in enumerate(cells):
            try:
                values[i] = float(cell)
            except ValueError:
                values[i] = math.nan
    values[~np.isfinite(values)] = math.nan
    return values


def _normalize_label(raw: str) -> str:
    return raw.strip()


def _impute_median(X: np.ndarray, feature_names: list[str]) -> dict[str, int]:
    counts = {}
    for j, name in enumerate(feature_names):
        col = X[:, j]
        missing = np.isnan(col)
        if missing.all():
            raise SchemaError(
                f"column {name!r} has no numeric values; drop it or fix the data"
            )
        if missing.any():
            col[missing] = np.median(col[~missing])
            counts[name] = int(missing.sum())
    return counts


def _impute_knn(X: np.ndarray, feature_names: list[str], k: int) -> dict[str, int]:
    """Fill gaps with the mean of the k nearest rows (mean squared difference
    over columns observed in both rows); falls back to the column median."""
    observed = ~np.isnan(X)
    for j, name in enumerate(feature_names):
        if not observed[:, j].any():
            raise SchemaError(
                f"column {name!r} has no numeric values; drop it or fix the data"
            )
    medians = np.array(
        [np.median(X[observed[:, j], j]) for j in range(X.shape[1])]
    )
    counts: dict[str, int] = {}
    rows_with_gaps = np.nonzero(~observed.all(axis=1))[0]
    filled = X.copy()
    zeroed = np.where(observed, X, 0.0)
    for r in rows_with_gaps:
        diff = zeroed - zeroed[r]
        shared = observed & observed[r]
        n_shared = shared.sum(axis=1)
        sq = np.where(shared, diff * diff, 0.0).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = np.where(n_shared > 0, sq / np.maximum(n_shared, 1), np.inf)
        dist[r] = np.inf
        order = np.argsort(dist, kind="stable")
        for j in np.nonzero(~observed[r])[0]:
            donors = [i for i in order if observed[i, j] and np.isfinite(dist[i])][:k]
            filled[r, j] = X[donors, j].mean() if donors else medians[j]
            name = feature_names[j]
            counts[name] = counts.get(name, 0) + 1
    X[:] = filled
    return counts


def fit_minmax(X: np.ndarray) -> np.ndarray:
    """Per-column (min, max) parameters, shape (2, n_features)."""
    return np.stack([X.min(axis=0), X.max(axis=0)])


def apply_minmax(X: np.ndarray, params: np.ndarray, clip: bool = True) -> np.ndarray:
    """Map columns into [0, 1]; constant columns map to all zeros."""
    lo, hi = params
    span = hi - lo
    scaled = np.where(span > 0, (X - lo) / np.where(span > 0, span, 1.0), 0.0)
    if clip:
        scaled = np.clip(scaled, 0.0, 1.0)
    return scaled


def scale_split(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset, np.ndarray]:
    """Train-only scaler fit (leakage-free mode); test values are clipped."""
    params = fit_minmax(train.X)
    scaled_train = train.take(np.arange(train.n_samples), action="minmax scale (train fit)")
    scaled_train.X = apply_minmax(train.X, params)
    scaled_test = test.take(np.arange(test.n_samples), action="minmax scale (train fit)")
    scaled_test.X = apply_minmax(test.X, params)
    for ds in (scaled_train, scaled_test):
        ds.provenance.setdefault("scaling", {})
        ds.provenance["scaling"] = {
            "mode": "minmax-train-fit",
            "params": _params_dict(params, train.feature_names),
        }
    return scaled_train, scaled_test, params


def _params_dict(params: np.ndarray, names: list[str]) -> dict:
    return {
        name: {"min": float(params[0, j]), "max": float(params[1, j])}
        for j, name in enumerate(names)
    }


def preprocess(
    raw: RawTable,
    kind="generic",
    *,
    impute: str = "median",
    scale: bool = True,
    label_column: str | None = None,
    knn_neighbors: int = 5,
) -> Dataset:
    """Turn a raw text table into a clean numeric dataset.

    Steps, in order: drop the kind's identifier columns (where present),
    parse features to float ("Infinity"/"NaN"/empty become missing), impute
    missing values (per-column median, or k-nearest-row with
    `impute="knn"`), drop exact duplicate rows (label included, first
    occurrence kept), encode labels by first appearance with
    case/whitespace-insensitive matching, and min-max scale every column to
    [0, 1] (constant columns become zeros).  Every action lands in the
    returned dataset's provenance.
    """
    kind = get_kind(kind)
    if impute not in ("median", "knn"):
        raise UsageError(f"impute must be 'median' or 'knn', got {impute!r}")
    label_col = label_column or kind.label_column
    if label_col not in raw.columns:
        raise SchemaError(f"required column {label_col!r} not found")

    dropped = [c for c in kind.drop_columns if c in raw.columns and c != label_col]
    feature_names = [c for c in raw.columns if c not in dropped and c != label_col]
    if not feature_names:
        raise DataError("no feature columns remain after dropping identifiers")

    actions = [f"dropped columns: {dropped}" if dropped else "dropped columns: none"]

    n = raw.n_rows
    if n == 0:
        raise DataError("no data rows")
    col_index = {c: i for i, c in enumerate(raw.columns)}
    X = np.empty((n, len(feature_names)))
    for j, name in enumerate(feature_names):
        idx = col_index[name]
        X[:, j] = _parse_column([row[idx] for row in raw.rows])
    actions.append("parsed features (Infinity/NaN/empty -> missing)")

    if impute == "median":
        imputed_counts = _impute_median(X, feature_names)
    else:
        imputed_counts = _impute_knn(X, feature_names, knn_neighbors)
    actions.append(f"imputed missing values ({impute}): {sum(imputed_counts.values())} cells")

    # labels: first-appearance ids over a case/whitespace-normalized key
    label_idx = col_index[label_col]
    key_to_id: dict[str, int] = {}
    class_names: list[str] = []
    y = np.empty(n, dtype=np.int64)
    for i, row in enumerate(raw.rows):
        display = _normalize_label(row[label_idx])
        key = display.casefold()
        if key not in key_to_id:
            key_to_id[key] = len(class_names)
            class_names.append(display)
        y[i] = key_to_id[key]
    actions.append(f"encoded {len(class_names)} labels by first appearance")

    combined = np.column_stack([X, y.astype(float)])
    _, first_indices = np.unique(combined, axis=0, return_index=True)
    keep = np.sort(first_indices)
    duplicates = n - keep.size
    X, y = X[keep], y[keep]
    actions.append(f"dropped {duplicates} duplicate rows")
    if X.shape[0] == 0:
        raise DataError("no rows survived cleaning")

    params = fit_minmax(X)
    if scale:
        X = apply_minmax(X, params, clip=False)
        scaling = {"mode": "minmax", "params": _params_dict(params, feature_names)}
        actions.append("min-max scaled all columns to [0, 1]")
    else:
        scaling = {"mode": "deferred"}
        actions.append("scaling deferred (strict mode)")

    provenance = {
        "source_files": list(raw.sources),
        "kind": kind.name,
        "label_column": label_col,
        "dropped_columns": dropped,
        "imputation": {"mode": impute, "counts": imputed_counts},
        "scaling": scaling,
        "label_map": {name: i for i, name in enumerate(class_names)},
        "row_counts": {"raw": n, "deduplicated": int(X.shape[0]), "final": int(X.shape[0])},
        "actions": actions,
    }
    return Dataset(
        X=X,
        y=y,
        feature_names=feature_names,
        class_names=class_names,
        provenance=provenance,
    )
