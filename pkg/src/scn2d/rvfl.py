"""RVFL and 2DRVFL baselines: blind random hidden layer, one least-squares fit."""

from __future__ import annotations

import numpy as np

from .configurator import ONED, TWOD, prepare_training_inputs, sample_candidate
from .errors import NumericError, ShapeError
from .linalg import least_squares
from .model import Network, Provenance, hidden_matrix
from .rng import child_stream


def draw_nodes(shape, L: int, lam: float, seed: int) -> list:
    # node j always comes from the same keyed stream, so a larger L extends a smaller one
    return [sample_candidate(shape, lam, child_stream(seed, j)) for j in range(L)]


def train_rvfl(X, T, L: int, lam: float = 1.0, kind: str = TWOD, seed: int = 0) -> Network:
    if L < 1:
        raise ValueError("L must be at least 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    X = prepare_training_inputs(X, kind)
    T = np.asarray(T, dtype=np.float64)
    if T.ndim == 1:
        T = T[:, None]
    if not np.all(np.isfinite(T)):
        raise NumericError("targets contain non-finite entries")
    if T.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} input samples but {T.shape[0]} target rows")
    nodes = draw_nodes(X.shape[1:], L, lam, seed)
    beta = least_squares(hidden_matrix(nodes, X), T)
    builder = "2DRVFL" if kind == TWOD else "RVFL"
    digest = f"L={L};lambda={lam!r};kind={kind}"
    return Network(X.shape[1:], tuple(nodes), beta, Provenance(builder, int(seed), digest))


__all__ = ["train_rvfl", "draw_nodes", "ONED", "TWOD"]
