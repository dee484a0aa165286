"""Standard test functions for exercising the optimizer."""

from __future__ import annotations

import numpy as np

from .exceptions import UsageError

__all__ = ["sphere", "rastrigin", "rosenbrock", "BENCHMARKS", "benchmark_bounds"]


def sphere(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def rastrigin(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(
        np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2)
    )


# name -> (function, default (lo, hi) box per dimension)
BENCHMARKS = {
    "sphere": (sphere, (-5.0, 5.0)),
    "rastrigin": (rastrigin, (-5.12, 5.12)),
    "rosenbrock": (rosenbrock, (-5.0, 10.0)),
}


def benchmark_bounds(name: str):
    """Return (function, lo, hi) for a named benchmark."""
    try:
        fn, (lo, hi) = BENCHMARKS[name]
    except KeyError:
        known = ", ".join(sorted(BENCHMARKS))
        raise UsageError(f"unknown benchmark function {name!r}; choose from {known}")
    return fn, lo, hi
