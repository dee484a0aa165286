"""Columnar dataset cache (.npz) with a JSON provenance sidecar."""

from __future__ import annotations

import json
import os

import numpy as np

from ..exceptions import DataError
from .dataset import Dataset

CACHE_FORMAT = "evoselect.dataset"
CACHE_VERSION = 1


def provenance_path(path: str) -> str:
    stem = path[:-4] if path.endswith(".npz") else path
    return stem + ".provenance.json"


def save_dataset(ds: Dataset, path: str) -> str:
    """Write `ds` to an .npz cache plus a provenance sidecar; returns path."""
    if not path.endswith(".npz"):
        path = path + ".npz"
    np.savez(
        path,
        format=np.array(CACHE_FORMAT),
        version=np.array(CACHE_VERSION),
        X=ds.X,
        y=ds.y,
        feature_names=np.array(ds.feature_names, dtype=str),
        class_names=np.array(ds.class_names, dtype=str),
    )
    with open(provenance_path(path), "w", encoding="utf-8") as fh:
        json.dump(ds.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_dataset(path: str) -> Dataset:
    """Load a cache written by `save_dataset` (sidecar optional)."""
    if not os.path.exists(path) and os.path.exists(path + ".npz"):
        path = path + ".npz"
    try:
        with np.load(path, allow_pickle=False) as archive:
            if str(archive["format"]) != CACHE_FORMAT:
                raise DataError(f"{path}: not an {CACHE_FORMAT} file")
            if int(archive["version"]) != CACHE_VERSION:
                raise DataError(
                    f"{path}: unsupported cache version {archive['version']}"
                )
            X = archive["X"]
            y = archive["y"]
            feature_names = [str(v) for v in archive["feature_names"]]
            class_names = [str(v) for v in archive["class_names"]]
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{path}: cannot read dataset cache ({exc})")

    provenance = {}
    sidecar = provenance_path(path)
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            provenance = json.load(fh)
    return Dataset(
        X=X,
        y=y,
        feature_names=feature_names,
        class_names=class_names,
        provenance=provenance,
    )
