"""Random forest: bagged CART trees with per-split feature subsampling."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigurationError
from .base import TimedClassifier
from .tree import _validate_tree_params, build_tree, predict_tree, resolve_max_features


class RandomForestClassifier(TimedClassifier):
    """Majority vote over `n_estimators` CART trees.

    Each tree draws a bootstrap resample (when `bootstrap` is set) and its
    own random stream derived from (random_state, tree index).  Vote ties
    resolve to the lowest class id.  With one tree, no bootstrap and all
    features, predictions coincide with `DecisionTreeClassifier`.
    """

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth=None,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        max_features="sqrt",
        bootstrap: bool = True,
        random_state: int = 0,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _fit(self, X, y_encoded):
        if self.n_estimators < 1:
            raise ConfigurationError("n_estimators must be positive")
        _validate_tree_params(self.max_depth, self.min_samples_split, self.min_samples_leaf)
        resolved = resolve_max_features(self.max_features, X.shape[1])
        n = X.shape[0]
        self.trees_ = []
        for t in range(self.n_estimators):
            rng = np.random.default_rng(
                np.random.SeedSequence(self.random_state, spawn_key=(t,))
            )
            if self.bootstrap:
                sample = rng.integers(0, n, size=n)
                Xt, yt = X[sample], y_encoded[sample]
            else:
                Xt, yt = X, y_encoded
            self.trees_.append(
                build_tree(
                    Xt,
                    yt,
                    len(self.classes_),
                    max_depth=self.max_depth,
                    min_samples_split=self.min_samples_split,
                    min_samples_leaf=self.min_samples_leaf,
                    max_features=resolved,
                    rng=rng,
                )
            )

    def _predict_encoded(self, X):
        counts = np.zeros((X.shape[0], len(self.classes_)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            counts[rows, predict_tree(tree, X)] += 1
        return counts.argmax(axis=1)
