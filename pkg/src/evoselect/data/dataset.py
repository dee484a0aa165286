"""Core dataset container shared across the pipeline."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import UsageError


@dataclass
class Dataset:
    """Numeric feature matrix with dense integer labels.

    `y[i]` indexes into `class_names`; `X` columns align with
    `feature_names`.  `provenance` carries the preprocessing log.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    class_names: list[str]
    provenance: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise UsageError(f"X must be 2-d, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise UsageError("y must hold one label per row")
        if self.X.shape[1] != len(self.feature_names):
            raise UsageError(
                f"{len(self.feature_names)} feature names for {self.X.shape[1]} columns"
            )
        if self.y.size and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise UsageError("labels must index into class_names")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def take(self, indices, action: str | None = None) -> "Dataset":
        """Row subset with a copied provenance log."""
        provenance = copy.deepcopy(self.provenance)
        if action:
            provenance.setdefault("actions", []).append(action)
        return Dataset(
            X=self.X[indices].copy(),
            y=self.y[indices].copy(),
            feature_names=list(self.feature_names),
            class_names=list(self.class_names),
            provenance=provenance,
        )

    def select_features(self, mask) -> "Dataset":
        """Column subset given a boolean mask over features."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n_features,):
            raise UsageError(
                f"mask length {mask.size} does not match {self.n_features} features"
            )
        if not mask.any():
            raise UsageError("feature mask selects no columns")
        names = [n for n, keep in zip(self.feature_names, mask) if keep]
        return Dataset(
            X=self.X[:, mask].copy(),
            y=self.y.copy(),
            feature_names=names,
            class_names=list(self.class_names),
            provenance=copy.deepcopy(self.provenance),
        )


@dataclass
class SplitPair:
    """Stratified train/test partition of one dataset."""

    train: Dataset
    test: Dataset
    ratio: float
    seed: int
