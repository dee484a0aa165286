import numpy as np
import pytest

from evoselect.data import Dataset


def make_planted_dataset(n_rows=240, n_features=8, seed=2024):
    """Binary labels from a linear rule over the first three features; the
    remaining features are pure noise."""
    rng = np.random.default_rng(seed)
    X = rng.random((n_rows, n_features))
    y = (X[:, 0] + X[:, 1] + X[:, 2] > 1.5).astype(int)
    return Dataset(
        X=X,
        y=y,
        feature_names=[f"f{j}" for j in range(n_features)],
        class_names=["neg", "pos"],
    )


def write_flow_csv(path, n_rows=300, n_features=4, seed=5, label_rule=None):
    """Synthetic flow-like CSV with a learnable label."""
    rng = np.random.default_rng(seed)
    names = [f"feat_{j}" for j in range(n_features)]
    if label_rule is None:
        label_rule = lambda x: "attack" if x[0] + x[1] > 1.0 else "benign"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + ",Label\n")
        for _ in range(n_rows):
            x = rng.random(n_features)
            fh.write(",".join(f"{v:.6f}" for v in x) + f",{label_rule(x)}\n")
    return path


@pytest.fixture
def planted_dataset():
    return make_planted_dataset()
