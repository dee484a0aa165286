"""Versioned JSON serialization for trained models.

Format: a single JSON object with "format", "version", "algorithm",
"params" (constructor arguments) and "state" (fitted arrays).  Floats are
written with Python's shortest round-trip repr, so a loaded model predicts
exactly like the saved one.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from ..exceptions import UsageError
from .forest import RandomForestClassifier
from .knn import KNeighborsClassifier
from .svm import SVMClassifier
from .tree import DecisionTreeClassifier, TreeNode

MODEL_FORMAT = "evoselect.model"
MODEL_VERSION = 1

_ALGORITHMS = {
    "knn": KNeighborsClassifier,
    "dtree": DecisionTreeClassifier,
    "rf": RandomForestClassifier,
    "svm": SVMClassifier,
}
_NAME_BY_TYPE = {cls: name for name, cls in _ALGORITHMS.items()}


def _encode_tree(root: TreeNode) -> dict:
    data = {"feature": [], "threshold": [], "left": [], "right": [], "prediction": []}
    stack = [(root, -1, "")]
    while stack:
        node, parent_id, side = stack.pop()
        node_id = len(data["feature"])
        data["feature"].append(int(node.feature))
        data["threshold"].append(float(node.threshold))
        data["left"].append(-1)
        data["right"].append(-1)
        data["prediction"].append(int(node.prediction))
        if parent_id >= 0:
            data[side][parent_id] = node_id
        if not node.is_leaf:
            stack.append((node.right, node_id, "right"))
            stack.append((node.left, node_id, "left"))
    return data


def _decode_tree(data: dict) -> TreeNode:
    nodes = [
        TreeNode(prediction=int(p), impurity=0.0, n_samples=0)
        for p in data["prediction"]
    ]
    for i, f in enumerate(data["feature"]):
        if f >= 0:
            nodes[i].feature = int(f)
            nodes[i].threshold = float(data["threshold"][i])
            nodes[i].left = nodes[data["left"][i]]
            nodes[i].right = nodes[data["right"][i]]
    return nodes[0]


def _model_state(name: str, model) -> dict:
    state = {
        "classes": np.asarray(model.classes_).tolist(),
        "n_features": int(model.n_features_in_),
        "train_time": float(getattr(model, "train_time_", 0.0)),
    }
    if name == "knn":
        state["X"] = model._X.tolist()
        state["y"] = model._y.tolist()
    elif name == "dtree":
        state["tree"] = _encode_tree(model.tree_)
    elif name == "rf":
        state["trees"] = [_encode_tree(t) for t in model.trees_]
    elif name == "svm":
        state["gamma"] = float(model.gamma_)
        state["converged"] = list(model.converged_)
        state["machines"] = [
            {"support": sv.tolist(), "coef": coef.tolist(), "bias": float(bias)}
            for sv, coef, bias in model._machines
        ]
    return state


def _restore_state(name: str, model, state: dict):
    model.classes_ = np.asarray(state["classes"])
    model.n_features_in_ = int(state["n_features"])
    model.train_time_ = float(state["train_time"])
    if name == "knn":
        model._X = np.asarray(state["X"], dtype=float).reshape(-1, model.n_features_in_)
        model._y = np.asarray(state["y"], dtype=np.int64)
        model._sq_norms = np.einsum("ij,ij->i", model._X, model._X)
    elif name == "dtree":
        model.tree_ = _decode_tree(state["tree"])
    elif name == "rf":
        model.trees_ = [_decode_tree(t) for t in state["trees"]]
    elif name == "svm":
        model.gamma_ = float(state["gamma"])
        model.converged_ = [bool(v) for v in state["converged"]]
        model.alphas_ = []
        model.intercepts_ = [float(m["bias"]) for m in state["machines"]]
        model._machines = [
            (
                np.asarray(m["support"], dtype=float).reshape(-1, model.n_features_in_),
                np.asarray(m["coef"], dtype=float),
                float(m["bias"]),
            )
            for m in state["machines"]
        ]
    return model


def save_model(model, path: str) -> None:
    """Write a fitted classifier to `path` as versioned JSON (atomic)."""
    name = _NAME_BY_TYPE.get(type(model))
    if name is None:
        raise UsageError(f"cannot serialize models of type {type(model).__name__}")
    if not hasattr(model, "classes_"):
        raise UsageError("model must be fitted before saving")
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": name,
        "params": model.get_params(),
        "state": _model_state(name, model),
    }
    _atomic_write_text(path, json.dumps(document, sort_keys=True))


def load_model(path: str):
    """Load a model written by `save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    if document.get("format") != MODEL_FORMAT:
        raise UsageError(f"{path}: not an {MODEL_FORMAT} file")
    if document.get("version") != MODEL_VERSION:
        raise UsageError(
            f"{path}: unsupported model version {document.get('version')!r}"
        )
    name = document["algorithm"]
    if name not in _ALGORITHMS:
        raise UsageError(f"{path}: unknown algorithm {name!r}")
    model = _ALGORITHMS[name](**document["params"])
    return _restore_state(name, model, document["state"])


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
