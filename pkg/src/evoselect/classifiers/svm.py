"""RBF-kernel soft-margin SVM trained with simplified sequential minimal
optimization, one-vs-rest for multiclass."""

from __future__ import annotations

import warnings

import numpy as np

from ..exceptions import ConfigurationError
from .base import TimedClassifier

__all__ = ["SVMClassifier", "SMOConvergenceWarning", "rbf_kernel", "smo_solve"]

# Minimum change in a dual coefficient for an update to count.
_MIN_ALPHA_STEP = 1e-5


class SMOConvergenceWarning(UserWarning):
    """The SMO sweep cap was hit before a violation-free pass."""


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K(a, b) = exp(-gamma * ||a - b||^2), shape (len(A), len(B))."""
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    max_passes: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, bool]:
    """Solve the binary soft-margin dual on a precomputed kernel.

    Full sweeps over all points; the partner index is drawn uniformly from
    the remaining points.  Stops after a sweep with no updates (converged)
    or after `max_passes` sweeps (not converged).  Returns (alphas, bias,
    converged); every alpha stays in [0, C].
    """
    n = y.size
    alphas = np.zeros(n)
    b = 0.0
    converged = False
    for _ in range(max_passes):
        changed = 0
        for i in range(n):
            coef = alphas * y
            e_i = float(coef @ K[:, i]) + b - y[i]
            r = y[i] * e_i
            if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
                continue
            j = int(rng.integers(0, n - 1))
            if j >= i:
                j += 1
            e_j = float(coef @ K[:, j]) + b - y[j]
            alpha_i, alpha_j = alphas[i], alphas[j]
            if y[i] != y[j]:
                low = max(0.0, alpha_j - alpha_i)
                high = min(C, C + alpha_j - alpha_i)
            else:
                low = max(0.0, alpha_i + alpha_j - C)
                high = min(C, alpha_i + alpha_j)
            if low == high:
                continue
            eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
            if eta >= 0:
                continue
            new_j = alpha_j - y[j] * (e_i - e_j) / eta
            new_j = min(max(new_j, low), high)
            if abs(new_j - alpha_j) < _MIN_ALPHA_STEP:
                continue
            new_i = alpha_i + y[i] * y[j] * (alpha_j - new_j)
            # the clip bounds on alpha_j keep alpha_i inside the box exactly;
            # clamp away float rounding dust
            new_i = min(max(new_i, 0.0), C)
            alphas[i], alphas[j] = new_i, new_j
            b1 = (
                b
                - e_i
                - y[i] * (new_i - alpha_i) * K[i, i]
                - y[j] * (new_j - alpha_j) * K[i, j]
            )
            b2 = (
                b
                - e_j
                - y[i] * (new_i - alpha_i) * K[i, j]
                - y[j] * (new_j - alpha_j) * K[j, j]
            )
            if 0.0 < new_i < C:
                b = b1
            elif 0.0 < new_j < C:
                b = b2
            else:
                b = 0.5 * (b1 + b2)
            changed += 1
        if changed == 0:
            converged = True
            break
    return alphas, b, converged


class SVMClassifier(TimedClassifier):
    """One-vs-rest RBF SVM.

    `gamma=None` resolves to 1/n_features at fit time; `max_passes=None`
    resolves to 10 * n_samples total SMO sweeps.  Prediction takes the
    argmax of the per-class decision values (ties to the lowest class id).
    A run that exhausts the sweep cap keeps its partial solution, sets
    `converged_` accordingly and emits `SMOConvergenceWarning`.
    """

    def __init__(
        self,
        C: float = 1.0,
        gamma: float | None = None,
        tol: float = 1e-3,
        max_passes: int | None = None,
        random_state: int = 0,
    ):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.random_state = random_state

    def _fit(self, X, y_encoded):
        if self.C <= 0:
            raise ConfigurationError("C must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigurationError("gamma must be positive")
        if self.tol <= 0:
            raise ConfigurationError("tol must be positive")
        n = X.shape[0]
        self.gamma_ = self.gamma if self.gamma is not None else 1.0 / X.shape[1]
        passes = self.max_passes if self.max_passes is not None else 10 * n
        if passes < 1:
            raise ConfigurationError("max_passes must be positive")

        self.alphas_ = []
        self.intercepts_ = []
        self.converged_ = []
        self._machines = []
        if len(self.classes_) == 1:
            return
        K = rbf_kernel(X, X, self.gamma_)
        for c in range(len(self.classes_)):
            rng = np.random.default_rng(
                np.random.SeedSequence(self.random_state, spawn_key=(c,))
            )
            y_bin = np.where(y_encoded == c, 1.0, -1.0)
            alphas, bias, converged = smo_solve(K, y_bin, self.C, self.tol, passes, rng)
            self.alphas_.append(alphas)
            self.intercepts_.append(bias)
            self.converged_.append(converged)
            support = np.nonzero(alphas > 0.0)[0]
            self._machines.append(
                (X[support].copy(), alphas[support] * y_bin[support], bias)
            )
            if not converged:
                warnings.warn(
                    f"SMO hit the sweep cap ({passes}) for class "
                    f"{self.classes_[c]!r} before converging",
                    SMOConvergenceWarning,
                    stacklevel=3,
                )

    def decision_function(self, X) -> np.ndarray:
        """Per-class decision values, shape (n_rows, n_classes)."""
        from .base import validate_features

        X = validate_features(X, self.n_features_in_)
        values = np.zeros((X.shape[0], len(self.classes_)))
        for c, (support, coef, bias) in enumerate(self._machines):
            if support.shape[0]:
                values[:, c] = rbf_kernel(X, support, self.gamma_) @ coef + bias
            else:
                values[:, c] = bias
        return values

    def _predict_encoded(self, X):
        if len(self.classes_) == 1:
            return np.zeros(X.shape[0], dtype=np.int64)
        return self.decision_function(X).argmax(axis=1)
