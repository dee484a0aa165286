"""Class balancing by seeded downsampling."""

from __future__ import annotations

import numpy as np

from ..exceptions import UsageError
from .dataset import Dataset


def downsample(ds: Dataset, n_per_label: int | None = None, seed: int = 0) -> Dataset:
    """Cap every class at `n_per_label` rows (or at the minority count).

    Rows are sampled uniformly without replacement per class, in class-id
    order from one seeded stream, and the result is shuffled.  With the
    default automatic cap all class counts come out equal.
    """
    if ds.n_samples == 0:
        raise UsageError("cannot downsample an empty dataset")
    counts = ds.class_counts()
    present = counts[counts > 0]
    cap = int(n_per_label) if n_per_label is not None else int(present.min())
    if cap < 1:
        raise UsageError("n_per_label must be at least 1")

    rng = np.random.default_rng(seed)
    kept = []
    for c in range(ds.n_classes):
        members = np.nonzero(ds.y == c)[0]
        if members.size == 0:
            continue
        take = min(members.size, cap)
        kept.append(rng.choice(members, size=take, replace=False))
    selected = np.concatenate(kept)
    selected = selected[rng.permutation(selected.size)]

    result = ds.take(
        selected,
        action=f"downsampled to <= {cap} rows per class (seed {seed})",
    )
    result.provenance["downsample"] = {
        "cap": cap,
        "seed": seed,
        "kept_per_class": {
            ds.class_names[c]: int(min(counts[c], cap)) for c in range(ds.n_classes)
        },
    }
    return result
