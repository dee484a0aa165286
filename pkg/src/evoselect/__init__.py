"""Energy-valley metaheuristic feature selection with reference classifiers."""

__version__ = "0.1.0"

from .evo import Bounds, EvoConfig, OptResult, optimize
from .metrics import Metrics, confusion_matrix, scores
from .selection import CostWeights, EvoFeatureSelector, FsResult, select_features

__all__ = [
    "Bounds",
    "EvoConfig",
    "OptResult",
    "optimize",
    "Metrics",
    "confusion_matrix",
    "scores",
    "CostWeights",
    "EvoFeatureSelector",
    "FsResult",
    "select_features",
    "__version__",
]
