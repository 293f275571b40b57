"""Evaluation metrics."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def _pair(pred, actual):
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape:
        raise ShapeError(f"prediction shape {pred.shape} differs from target shape {actual.shape}")
    return pred, actual


def ppa(pred, actual, theta: float) -> float:
    """Fraction of predictions whose absolute error is strictly below ``theta``."""
    pred, actual = _pair(np.ravel(pred), np.ravel(actual))
    return float(np.count_nonzero(np.abs(pred - actual) < theta)) / pred.size


def rmse(pred, actual) -> float:
    pred, actual = _pair(pred, actual)
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def accuracy(pred, labels) -> float:
    """Argmax accuracy; ``np.argmax`` resolves ties toward the lowest class index."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    if pred.ndim != 2 or pred.shape[1] < 2:
        raise ShapeError("accuracy needs an (N, m) prediction matrix with m >= 2")
    if pred.shape[0] != labels.size:
        raise ShapeError(f"{pred.shape[0]} predictions but {labels.size} labels")
    return float(np.mean(np.argmax(pred, axis=1) == labels))
