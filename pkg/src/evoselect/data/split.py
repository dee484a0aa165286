"""Stratified train/test splitting."""

from __future__ import annotations

import numpy as np

from ..exceptions import StratificationError, UsageError
from .dataset import Dataset, SplitPair


def split(ds: Dataset, ratio: float = 0.8, seed: int = 0) -> SplitPair:
    """Per-class seeded shuffle; floor(ratio * count) rows (at least one)
    train, the rest test.  Every class keeps at least one test row."""
    if not (0.0 < ratio < 1.0):
        raise UsageError(f"ratio must lie in (0, 1), got {ratio}")
    counts = ds.class_counts()
    thin = [ds.class_names[c] for c in range(ds.n_classes) if 0 < counts[c] < 2]
    if thin:
        raise StratificationError(
            f"classes with fewer than 2 rows cannot be split: {thin}"
        )
    if not counts.any():
        raise UsageError("cannot split an empty dataset")

    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in range(ds.n_classes):
        members = np.nonzero(ds.y == c)[0]
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        n_train = max(1, int(np.floor(ratio * members.size)))
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])

    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return SplitPair(
        train=ds.take(train_idx, action=f"split: train ({ratio}, seed {seed})"),
        test=ds.take(test_idx, action=f"split: test ({1 - ratio:.4g}, seed {seed})"),
        ratio=ratio,
        seed=seed,
    )
