"""CART decision tree: greedy binary splits minimizing weighted Gini impurity."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigurationError
from .base import TimedClassifier

__all__ = ["DecisionTreeClassifier", "TreeNode", "build_tree", "resolve_max_features"]


class TreeNode:
    """A tree node; `feature == -1` marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "prediction", "impurity", "n_samples")

    def __init__(self, prediction: int, impurity: float, n_samples: int):
        self.feature = -1
        self.threshold = 0.0
        self.left: TreeNode | None = None
        self.right: TreeNode | None = None
        self.prediction = prediction
        self.impurity = impurity
        self.n_samples = n_samples

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _gini(counts: np.ndarray, n: int) -> float:
    p = counts / n
    return 1.0 - float(p @ p)


def _best_split(X, y, indices, n_classes, feature_ids, min_samples_leaf):
    """Lowest weighted-Gini split over the given features, or None.

    Ties resolve by (weighted impurity, feature index, threshold), so the
    result does not depend on the scan order of `feature_ids`.
    """
    n = indices.size
    labels = y[indices]
    best = None
    for f in feature_ids:
        values = X[indices, f]
        order = np.argsort(values, kind="stable")
        v = values[order]
        boundaries = np.nonzero(v[:-1] < v[1:])[0]
        if boundaries.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), labels[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        total = cum[-1]

        n_left = boundaries + 1
        n_right = n - n_left
        valid = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not valid.any():
            continue
        boundaries = boundaries[valid]
        n_left = n_left[valid]
        n_right = n_right[valid]

        left = cum[boundaries]
        right = total - left
        gini_left = 1.0 - np.einsum("ij,ij->i", left, left) / (n_left * n_left)
        gini_right = 1.0 - np.einsum("ij,ij->i", right, right) / (n_right * n_right)
        weighted = (n_left * gini_left + n_right * gini_right) / n

        pick = int(np.argmin(weighted))  # first minimum -> lowest threshold
        threshold = 0.5 * (v[boundaries[pick]] + v[boundaries[pick] + 1])
        key = (float(weighted[pick]), int(f), float(threshold))
        if best is None or key < best:
            best = key
    return best


def build_tree(
    X,
    y,
    n_classes,
    *,
    max_depth=None,
    min_samples_split=2,
    min_samples_leaf=1,
    max_features=None,
    rng=None,
):
    """Grow a CART tree on encoded labels; splits send `x <= threshold` left.

    `max_features`, when smaller than the feature count, samples that many
    candidate features per split from `rng` (required in that case).
    """
    n_features = X.shape[1]
    subsample = max_features is not None and max_features < n_features
    root_holder: list[TreeNode] = []
    # stack entries: (row indices, depth, parent, is_left_child)
    stack = [(np.arange(X.shape[0]), 0, None, False)]
    while stack:
        indices, depth, parent, is_left = stack.pop()
        counts = np.bincount(y[indices], minlength=n_classes)
        node = TreeNode(
            prediction=int(counts.argmax()),
            impurity=_gini(counts, indices.size),
            n_samples=int(indices.size),
        )
        if parent is None:
            root_holder.append(node)
        elif is_left:
            parent.left = node
        else:
            parent.right = node

        if (
            node.impurity == 0.0
            or indices.size < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        if subsample:
            feature_ids = rng.choice(n_features, size=max_features, replace=False)
        else:
            feature_ids = range(n_features)
        best = _best_split(X, y, indices, n_classes, feature_ids, min_samples_leaf)
        if best is None or best[0] >= node.impurity:
            continue
        _, node.feature, node.threshold = best
        mask = X[indices, node.feature] <= node.threshold
        stack.append((indices[~mask], depth + 1, node, False))
        stack.append((indices[mask], depth + 1, node, True))
    return root_holder[0]


def predict_tree(root: TreeNode, X) -> np.ndarray:
    """Route every row of X to a leaf and collect the leaf predictions."""
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.prediction
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def resolve_max_features(max_features, n_features: int) -> int:
    """Translate a max_features setting into a concrete feature count."""
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return min(n_features, int(np.ceil(np.sqrt(n_features))))
    value = int(max_features)
    if value < 1:
        raise ConfigurationError("max_features must be at least 1")
    return min(value, n_features)


def _validate_tree_params(max_depth, min_samples_split, min_samples_leaf):
    if max_depth is not None and max_depth < 0:
        raise ConfigurationError("max_depth must be None or >= 0")
    if min_samples_split < 2:
        raise ConfigurationError("min_samples_split must be at least 2")
    if min_samples_leaf < 1:
        raise ConfigurationError("min_samples_leaf must be at least 1")


class DecisionTreeClassifier(TimedClassifier):
    """Single CART tree.

    Leaf labels are the majority class (ties to the lowest class id);
    thresholds sit at midpoints between consecutive distinct values.
    `random_state` only matters when `max_features` restricts the per-split
    candidate features.
    """

    def __init__(
        self,
        max_depth=None,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        max_features=None,
        random_state: int = 0,
    ):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def _fit(self, X, y_encoded):
        _validate_tree_params(self.max_depth, self.min_samples_split, self.min_samples_leaf)
        resolved = resolve_max_features(self.max_features, X.shape[1])
        rng = np.random.default_rng(self.random_state)
        self.tree_ = build_tree(
            X,
            y_encoded,
            len(self.classes_),
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            max_features=resolved,
            rng=rng,
        )

    def _predict_encoded(self, X):
        return predict_tree(self.tree_, X)
