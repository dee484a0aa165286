"""Confusion-matrix construction and classification scores.

Multiclass aggregates are unweighted (macro) one-vs-rest means by default;
a weighted mode is available.  All 0/0 ratios are defined as 0 so every
score is a total function.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UsageError

__all__ = ["ClassScores", "Metrics", "confusion_matrix", "scores", "confusion_to_csv"]


@dataclass(frozen=True)
class ClassScores:
    """One-vs-rest counts and ratios for a single class."""

    tp: int
    tn: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    fpr: float
    fnr: float

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "tn": self.tn,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "fpr": self.fpr,
            "fnr": self.fnr,
        }


@dataclass
class Metrics:
    """Aggregate scores plus the confusion matrix they derive from."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    fpr: float
    fnr: float
    per_class: list[ClassScores]
    confusion: np.ndarray = field(repr=False)
    train_time: float = 0.0
    test_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "per_class": [c.to_dict() for c in self.per_class],
            "confusion": self.confusion.tolist(),
            "train_time": self.train_time,
            "test_time": self.test_time,
        }


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Count matrix with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.int64).ravel()
    if y_true.shape != y_pred.shape:
        raise UsageError(
            f"label vectors differ in length: {y_true.size} vs {y_pred.size}"
        )
    if n_classes < 1:
        raise UsageError("n_classes must be at least 1")
    if y_true.size:
        lo = min(y_true.min(), y_pred.min())
        hi = max(y_true.max(), y_pred.max())
        if lo < 0 or hi >= n_classes:
            raise UsageError(
                f"labels must lie in [0, {n_classes}), found range [{lo}, {hi}]"
            )
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return counts


def _safe_ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def scores(
    cm: np.ndarray,
    *,
    average: str = "macro",
    train_time: float = 0.0,
    test_time: float = 0.0,
) -> Metrics:
    """Derive accuracy and one-vs-rest precision/recall/F1/FPR/FNR from a matrix.

    `average` picks how per-class values aggregate: "macro" (unweighted mean)
    or "weighted" (by true-class support).
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise UsageError(f"confusion matrix must be square, got shape {cm.shape}")
    if average not in ("macro", "weighted"):
        raise UsageError(f"average must be 'macro' or 'weighted', got {average!r}")
    total = int(cm.sum())
    if total == 0:
        raise UsageError("cannot score an empty confusion matrix")

    n_classes = cm.shape[0]
    diag = np.diag(cm)
    row_sums = cm.sum(axis=1)
    col_sums = cm.sum(axis=0)

    per_class = []
    for c in range(n_classes):
        tp = int(diag[c])
        fp = int(col_sums[c] - diag[c])
        fn = int(row_sums[c] - diag[c])
        tn = total - tp - fp - fn
        precision = _safe_ratio(tp, tp + fp)
        recall = _safe_ratio(tp, tp + fn)
        f1 = _safe_ratio(2.0 * precision * recall, precision + recall)
        per_class.append(
            ClassScores(
                tp=tp,
                tn=tn,
                fp=fp,
                fn=fn,
                precision=precision,
                recall=recall,
                f1=f1,
                fpr=_safe_ratio(fp, fp + tn),
                fnr=_safe_ratio(fn, fn + tp),
            )
        )

    if average == "macro":
        weights = np.full(n_classes, 1.0 / n_classes)
    else:
        weights = row_sums / total

    def agg(attr: str) -> float:
        return float(sum(w * getattr(c, attr) for w, c in zip(weights, per_class)))

    return Metrics(
        accuracy=float(diag.sum()) / total,
        precision=agg("precision"),
        recall=agg("recall"),
        f1=agg("f1"),
        fpr=agg("fpr"),
        fnr=agg("fnr"),
        per_class=per_class,
        confusion=cm.astype(np.int64),
        train_time=train_time,
        test_time=test_time,
    )


def confusion_to_csv(cm: np.ndarray, class_names: list[str] | None = None) -> str:
    """Render a confusion matrix as a CSV grid (rows = true class)."""
    cm = np.asarray(cm)
    n = cm.shape[0]
    if class_names is None:
        class_names = [str(i) for i in range(n)]
    if len(class_names) != n:
        raise UsageError(
            f"need {n} class names, got {len(class_names)}"
        )
    out = io.StringIO()
    out.write("true\\predicted," + ",".join(class_names) + "\n")
    for name, row in zip(class_names, cm):
        out.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
    return out.getvalue()
