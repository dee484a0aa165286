"""k-nearest-neighbour classifier."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigurationError
from .base import TimedClassifier

_BLOCK = 256  # query rows per distance block, keeps the (block, n) matrix small


class KNeighborsClassifier(TimedClassifier):
    """Majority vote over the k nearest training rows by Euclidean distance.

    Distance ties resolve to the lower training index; vote ties resolve to
    the lowest class id.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def _fit(self, X, y_encoded):
        if self.n_neighbors < 1:
            raise ConfigurationError("n_neighbors must be positive")
        if self.n_neighbors > X.shape[0]:
            raise ConfigurationError(
                f"n_neighbors ({self.n_neighbors}) exceeds the training size "
                f"({X.shape[0]})"
            )
        self._X = X.copy()
        self._y = y_encoded
        self._sq_norms = np.einsum("ij,ij->i", self._X, self._X)

    def _predict_encoded(self, X):
        n_classes = len(self.classes_)
        k = self.n_neighbors
        out = np.empty(X.shape[0], dtype=np.int64)
        for start in range(0, X.shape[0], _BLOCK):
            block = X[start : start + _BLOCK]
            sq = np.einsum("ij,ij->i", block, block)
            dist = sq[:, None] + self._sq_norms[None, :] - 2.0 * (block @ self._X.T)
            nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
            votes = self._y[nearest]
            counts = np.zeros((block.shape[0], n_classes), dtype=np.int64)
            np.add.at(
                counts,
                (np.repeat(np.arange(block.shape[0]), k), votes.ravel()),
                1,
            )
            out[start : start + _BLOCK] = counts.argmax(axis=1)
        return out
