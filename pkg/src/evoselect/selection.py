"""Wrapper feature selection driven by the energy valley optimizer.

Feature masks are encoded as points in [0, 1]^d and thresholded at 0.5; a
candidate mask is scored by training a classifier on a stratified inner
split of the training data and combining accuracy, false-positive rate,
false-negative rate and (optionally) the selected-feature ratio into a
single weighted cost.  Mask costs are memoized, since many optimizer
positions threshold to the same mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone

from .classifiers import evaluate_classifier
from .data import Dataset
from .data.split import split as stratified_split
from .evo import Bounds, EvoConfig, OptResult, optimize
from .exceptions import ConfigurationError, StratificationError, UsageError
from .metrics import Metrics, confusion_matrix, scores

__all__ = [
    "CostWeights",
    "FsResult",
    "binarize",
    "fs_cost",
    "cost_from_metrics",
    "select_features",
    "EvoFeatureSelector",
]

DEFAULT_INNER_SEED = 1009
DEFAULT_INNER_RATIO = 0.75


@dataclass(frozen=True)
class CostWeights:
    """Weights of the selection cost terms.

    cost = accuracy_w * (1 - accuracy) + fpr_w * FPR + fnr_w * FNR
         + ratio_w * (selected / total features)

    The ratio term is an optional parsimony pressure, off by default.
    """

    accuracy_w: float = 1.0
    fpr_w: float = 0.0
    fnr_w: float = 0.0
    ratio_w: float = 0.0

    def __post_init__(self):
        values = (self.accuracy_w, self.fpr_w, self.fnr_w, self.ratio_w)
        if any(w < 0 for w in values):
            raise ConfigurationError("cost weights must be non-negative")
        if self.accuracy_w + self.fpr_w + self.fnr_w <= 0:
            raise ConfigurationError(
                "at least one of the accuracy/FPR/FNR weights must be positive"
            )

    def to_dict(self) -> dict:
        return {
            "accuracy_w": self.accuracy_w,
            "fpr_w": self.fpr_w,
            "fnr_w": self.fnr_w,
            "ratio_w": self.ratio_w,
        }


def binarize(position: np.ndarray) -> np.ndarray:
    """Threshold a point in [0, 1]^d at 0.5 into a non-empty boolean mask.

    An all-below-threshold position keeps the single coordinate with the
    largest value (ties to the lowest index), so masks are never empty.
    """
    position = np.asarray(position, dtype=float)
    if position.ndim != 1:
        raise UsageError("position must be a vector")
    if position.size == 0:
        raise UsageError("position must have at least one coordinate")
    if position.min() < 0.0 or position.max() > 1.0:
        raise UsageError("position coordinates must lie in [0, 1]")
    mask = position >= 0.5
    if not mask.any():
        mask[int(np.argmax(position))] = True
    return mask


def cost_from_metrics(
    metrics: Metrics, weights: CostWeights, n_selected: int, n_features: int
) -> float:
    """Recombine stored metrics into the weighted selection cost."""
    return (
        weights.accuracy_w * (1.0 - metrics.accuracy)
        + weights.fpr_w * metrics.fpr
        + weights.fnr_w * metrics.fnr
        + weights.ratio_w * (n_selected / n_features)
    )


def _inner_folds(ds: Dataset, folds: int, seed: int):
    """Stratified k-fold assignments: per-class shuffle, round-robin folds."""
    counts = ds.class_counts()
    thin = [ds.class_names[c] for c in range(ds.n_classes) if 0 < counts[c] < folds]
    if thin:
        raise StratificationError(
            f"classes with fewer rows than folds ({folds}): {thin}"
        )
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n_samples, dtype=np.int64)
    for c in range(ds.n_classes):
        members = np.nonzero(ds.y == c)[0]
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        assignment[members] = np.arange(members.size) % folds
    return assignment


def fs_cost(
    mask: np.ndarray,
    train: Dataset,
    estimator,
    weights: CostWeights,
    inner_seed: int = DEFAULT_INNER_SEED,
    *,
    inner_ratio: float = DEFAULT_INNER_RATIO,
    folds: int | None = None,
    seed: int = 0,
) -> tuple[float, Metrics]:
    """Score one feature mask by inner-holdout (default) or k-fold evaluation.

    The inner split is stratified and driven by `inner_seed`, independent of
    the optimizer seed, so a mask always maps to the same cost within a run.
    With `folds`, per-fold confusion matrices are pooled before scoring.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (train.n_features,):
        raise UsageError(
            f"mask length {mask.size} does not match {train.n_features} features"
        )
    if not mask.any():
        raise UsageError("feature mask selects no columns")
    if np.count_nonzero(train.class_counts() > 0) < 2:
        raise UsageError("feature selection needs at least two classes")

    masked = train.select_features(mask)
    if folds is None:
        pair = stratified_split(masked, inner_ratio, inner_seed)
        model = clone(estimator)
        if "random_state" in model.get_params():
            model.set_params(random_state=seed)
        model.fit(pair.train.X, pair.train.y)
        metrics = evaluate_classifier(
            model, pair.test.X, pair.test.y, train.n_classes
        )
    else:
        if folds < 2:
            raise ConfigurationError("folds must be at least 2")
        assignment = _inner_folds(masked, folds, inner_seed)
        pooled = np.zeros((train.n_classes, train.n_classes), dtype=np.int64)
        train_time = 0.0
        test_time = 0.0
        for f in range(folds):
            hold = assignment == f
            model = clone(estimator)
            if "random_state" in model.get_params():
                model.set_params(random_state=seed)
            model.fit(masked.X[~hold], masked.y[~hold])
            fold_metrics = evaluate_classifier(
                model, masked.X[hold], masked.y[hold], train.n_classes
            )
            pooled += fold_metrics.confusion
            train_time += fold_metrics.train_time
            test_time += fold_metrics.test_time
        metrics = scores(pooled, train_time=train_time, test_time=test_time)

    cost = cost_from_metrics(
        metrics, weights, int(mask.sum()), train.n_features
    )
    return cost, metrics


@dataclass
class FsResult:
    """Best mask found by a selection run, with its score and diagnostics."""

    mask: np.ndarray
    cost: float
    inner_metrics: Metrics
    opt: OptResult
    selected_names: list[str]
    weights: CostWeights
    inner_seed: int

    @property
    def n_selected(self) -> int:
        return int(self.mask.sum())

    def to_dict(self) -> dict:
        return {
            "mask": [int(b) for b in self.mask],
            "selected_names": list(self.selected_names),
            "cost": self.cost,
            "weights": self.weights.to_dict(),
            "seed": self.opt.config.seed if self.opt.config else None,
            "inner_seed": self.inner_seed,
            "evaluations_used": self.opt.evaluations_used,
            "inner_metrics": self.inner_metrics.to_dict(),
        }


class _MaskObjective:
    """Position -> cost bridge with a mask-level memo cache.

    Values are deterministic per mask, so concurrent last-writer-wins
    insertion is harmless.
    """

    def __init__(self, train, estimator, weights, inner_seed, inner_ratio, folds, seed):
        self.train = train
        self.estimator = estimator
        self.weights = weights
        self.inner_seed = inner_seed
        self.inner_ratio = inner_ratio
        self.folds = folds
        self.seed = seed
        self.cache: dict[bytes, tuple[float, Metrics]] = {}

    def lookup(self, mask: np.ndarray) -> tuple[float, Metrics]:
        key = np.packbits(mask).tobytes()
        hit = self.cache.get(key)
        if hit is None:
            hit = fs_cost(
                mask,
                self.train,
                self.estimator,
                self.weights,
                self.inner_seed,
                inner_ratio=self.inner_ratio,
                folds=self.folds,
                seed=self.seed,
            )
            self.cache[key] = hit
        return hit

    def __call__(self, position: np.ndarray) -> float:
        return self.lookup(binarize(position))[0]


def select_features(
    train: Dataset,
    estimator,
    weights: CostWeights = CostWeights(),
    config: EvoConfig = EvoConfig(),
    *,
    inner_seed: int = DEFAULT_INNER_SEED,
    inner_ratio: float = DEFAULT_INNER_RATIO,
    folds: int | None = None,
    seed: int = 0,
) -> FsResult:
    """Search mask space with the optimizer and return the best mask found.

    `estimator` is an unfitted classifier used (cloned) for every candidate
    evaluation; `seed` is the classifier training seed, `config.seed` drives
    the optimizer and `inner_seed` the scoring split.
    """
    objective = _MaskObjective(
        train, estimator, weights, inner_seed, inner_ratio, folds, seed
    )
    bounds = Bounds(0.0, 1.0, dims=train.n_features)
    opt = optimize(objective, bounds, config)
    mask = binarize(opt.best_position)
    cost, metrics = objective.lookup(mask)
    return FsResult(
        mask=mask,
        cost=cost,
        inner_metrics=metrics,
        opt=opt,
        selected_names=[
            name for name, keep in zip(train.feature_names, mask) if keep
        ],
        weights=weights,
        inner_seed=inner_seed,
    )


class EvoFeatureSelector(BaseEstimator, TransformerMixin):
    """sklearn-style transformer wrapping `select_features`.

    Parameters mirror the functional API; `fit(X, y)` stores the selected
    mask in `support_` and `transform` drops the unselected columns.
    """

    def __init__(
        self,
        estimator=None,
        weights: CostWeights = CostWeights(),
        n_particles: int = 20,
        max_fes: int = 1000,
        k_neighbors: int | None = None,
        seed: int = 0,
        stable_step_scale: float = 0.1,
        inner_seed: int = DEFAULT_INNER_SEED,
        inner_ratio: float = DEFAULT_INNER_RATIO,
        folds: int | None = None,
        train_seed: int = 0,
    ):
        self.estimator = estimator
        self.weights = weights
        self.n_particles = n_particles
        self.max_fes = max_fes
        self.k_neighbors = k_neighbors
        self.seed = seed
        self.stable_step_scale = stable_step_scale
        self.inner_seed = inner_seed
        self.inner_ratio = inner_ratio
        self.folds = folds
        self.train_seed = train_seed

    def fit(self, X, y):
        from .classifiers import KNeighborsClassifier

        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        classes, y_encoded = np.unique(y, return_inverse=True)
        ds = Dataset(
            X=X,
            y=y_encoded,
            feature_names=[f"f{j}" for j in range(X.shape[1])],
            class_names=[str(c) for c in classes],
        )
        estimator = self.estimator if self.estimator is not None else KNeighborsClassifier()
        config = EvoConfig(
            n_particles=self.n_particles,
            max_fes=self.max_fes,
            k_neighbors=self.k_neighbors,
            seed=self.seed,
            stable_step_scale=self.stable_step_scale,
        )
        self.result_ = select_features(
            ds,
            estimator,
            self.weights,
            config,
            inner_seed=self.inner_seed,
            inner_ratio=self.inner_ratio,
            folds=self.folds,
            seed=self.train_seed,
        )
        self.support_ = self.result_.mask
        self.cost_ = self.result_.cost
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "support_"):
            raise UsageError("EvoFeatureSelector is not fitted")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise UsageError(
                f"expected {self.n_features_in_} features, got shape {X.shape}"
            )
        return X[:, self.support_]

    def get_support(self) -> np.ndarray:
        if not hasattr(self, "support_"):
            raise UsageError("EvoFeatureSelector is not fitted")
        return self.support_.copy()
