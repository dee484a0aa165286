"""Reference classifiers behind a uniform fit/predict contract."""

from __future__ import annotations

import time

from ..exceptions import UsageError
from ..metrics import Metrics, confusion_matrix, scores
from .forest import RandomForestClassifier
from .knn import KNeighborsClassifier
from .persistence import load_model, save_model
from .svm import SMOConvergenceWarning, SVMClassifier
from .tree import DecisionTreeClassifier

__all__ = [
    "KNeighborsClassifier",
    "DecisionTreeClassifier",
    "RandomForestClassifier",
    "SVMClassifier",
    "SMOConvergenceWarning",
    "CLASSIFIERS",
    "make_classifier",
    "evaluate_classifier",
    "save_model",
    "load_model",
]

# CLI/config algorithm names.
CLASSIFIERS = {
    "knn": KNeighborsClassifier,
    "dtree": DecisionTreeClassifier,
    "rf": RandomForestClassifier,
    "svm": SVMClassifier,
}


def make_classifier(name: str, params: dict | None = None, random_state=None):
    """Instantiate a classifier by registry name."""
    try:
        cls = CLASSIFIERS[name]
    except KeyError:
        known = ", ".join(sorted(CLASSIFIERS))
        raise UsageError(f"unknown classifier {name!r}; choose from {known}")
    kwargs = dict(params or {})
    if random_state is not None and "random_state" in cls().get_params():
        kwargs.setdefault("random_state", random_state)
    return cls(**kwargs)


def evaluate_classifier(model, X, y, n_classes: int, average: str = "macro") -> Metrics:
    """Predict on (X, y) and score, recording prediction wall-clock time."""
    start = time.perf_counter()
    y_pred = model.predict(X)
    test_time = time.perf_counter() - start
    cm = confusion_matrix(y, y_pred, n_classes)
    return scores(
        cm,
        average=average,
        train_time=float(getattr(model, "train_time_", 0.0)),
        test_time=test_time,
    )
