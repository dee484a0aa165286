"""Shared plumbing for the from-scratch classifiers."""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..exceptions import UsageError


def validate_training_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise UsageError(f"X must be 2-d, got shape {X.shape}")
    if X.shape[0] == 0:
        raise UsageError("training data is empty")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise UsageError(
            f"y must be 1-d with one label per row ({X.shape[0]}), got shape {y.shape}"
        )
    if not np.isfinite(X).all():
        raise UsageError("training features must be finite")
    return X, y


def validate_features(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise UsageError(f"X must be 2-d, got shape {X.shape}")
    if X.shape[1] != n_features:
        raise UsageError(
            f"model was trained on {n_features} features, got {X.shape[1]}"
        )
    return X


class TimedClassifier(BaseEstimator, ClassifierMixin):
    """fit/predict base that encodes labels and records wall-clock train time.

    Subclasses implement `_fit(X, y_encoded)` and `_predict_encoded(X)`;
    labels are dense indices into `classes_` internally, with all vote and
    argmax ties resolving to the lowest index.
    """

    def fit(self, X, y):
        X, y = validate_training_data(X, y)
        start = time.perf_counter()
        self.classes_, y_encoded = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        self._fit(X, y_encoded.astype(np.int64))
        self.train_time_ = time.perf_counter() - start
        return self

    def predict(self, X):
        if not hasattr(self, "classes_"):
            raise UsageError(f"{type(self).__name__} is not fitted")
        X = validate_features(X, self.n_features_in_)
        return self.classes_[self._predict_encoded(X)]

    def _fit(self, X, y_encoded):  # pragma: no cover - abstract
        raise NotImplementedError

    def _predict_encoded(self, X):  # pragma: no cover - abstract
        raise NotImplementedError
