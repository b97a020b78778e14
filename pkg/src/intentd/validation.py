"""Input validation helpers shared by the estimator API."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X) -> np.ndarray:
    """Coerce X to a finite 2D float64 array whose width is a multiple of 3."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2D feature matrix, got shape {X.shape}")
    if X.shape[1] % 3 != 0:
        raise ValueError(
            f"feature width {X.shape[1]} is not a multiple of 3 (nu, d, theta per goal)")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_labels(y, n_samples: int, n_goals: int) -> np.ndarray:
    """Coerce y to integer labels in 0..n_goals-1, matched to n_samples rows."""
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_samples:
        raise ValueError(f"expected {n_samples} labels, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        yi = y.astype(np.int64)
        if not np.array_equal(yi, y):
            raise ValueError("labels must be integers")
        y = yi
    y = y.astype(np.int64)
    if y.min() < 0 or y.max() >= n_goals:
        raise ValueError(f"labels must lie in 0..{n_goals - 1}")
    return y
