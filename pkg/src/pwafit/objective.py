"""Least-squares criterion on smoothed models and the empirical-norm metric."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PwaModel
from .smoothing import SmoothingSpec, _batch_values_weights

__all__ = ["Dataset", "least_squares", "least_squares_gradient", "empirical_norm"]


@dataclass(frozen=True)
class Dataset:
    """Paired observations: predictors ``X`` (n x d) and responses ``Y`` (n,)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("X must be an n x d matrix with n >= 1")
        if Y.ndim != 1 or Y.shape[0] != X.shape[0]:
            raise ValueError("Y must be a vector matching the rows of X")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("data must be finite")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def _smoothed_values(model: PwaModel, spec: SmoothingSpec, X: np.ndarray) -> np.ndarray:
    v1, _ = _batch_values_weights(model.part1, spec, X)
    v2, _ = _batch_values_weights(model.part2, spec, X)
    return v1 - v2


def least_squares(model: PwaModel, spec: SmoothingSpec | None, data: Dataset) -> float:
    """Mean squared residual of the smoothed model.

    ``spec=None`` evaluates the unsmoothed criterion (exact max-affine
    evaluation); this path has no gradient.
    """
    if model.d != data.d:
        raise ValueError("model and data dimensions disagree")
    if spec is None:
        fitted = model.evaluate(data.X)
    else:
        fitted = _smoothed_values(model, spec, data.X)
    r = data.Y - fitted
    return float(np.mean(r * r))


def least_squares_gradient(model: PwaModel, spec: SmoothingSpec, data: Dataset) -> np.ndarray:
    """Exact gradient of :func:`least_squares` in pack layout.

    Equals ``-(2/n) sum_i r_i * grad_theta g_mu(X_i)`` with residuals
    ``r_i = Y_i - g_mu(X_i)``; the part2 block carries the opposite sign.
    """
    if spec is None:
        raise ValueError("gradient requires a smoothing spec with mu > 0")
    if model.d != data.d:
        raise ValueError("model and data dimensions disagree")
    X, Y = data.X, data.Y
    n = data.n
    v1, W1 = _batch_values_weights(model.part1, spec, X)
    v2, W2 = _batch_values_weights(model.part2, spec, X)
    r = Y - (v1 - v2)
    scale = -2.0 / n
    ga1 = scale * (W1 * r[:, None]).T @ X
    gb1 = scale * (W1.T @ r)
    ga2 = -scale * (W2 * r[:, None]).T @ X
    gb2 = -scale * (W2.T @ r)
    return np.concatenate([ga1.ravel(), gb1, ga2.ravel(), gb2])


def empirical_norm(model: PwaModel, data: Dataset) -> float:
    """Average squared residual of the unsmoothed model."""
    return least_squares(model, None, data)
