"""First-order test-error bound for randomized sigmoid networks.

A test set is modelled as a small perturbation ``X + eta * Z`` of the
training inputs.  Expanding the hidden layer to first order in ``eta`` and
applying Cauchy-Schwarz row by row gives

    ||H(X + eta Z) beta - T||_F
        <= ||H beta - T||_F + eta * max_i ||Z_i|| * ||H o (1 - H) o W||_F * ||beta||_F

where ``W`` repeats the row of input-weight norms.  The product
``||H o (1 - H) o W||_F * ||beta||_F`` (the "raw indicator") ranks models by
their predicted generalization gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateNormalizationError, NumericError, ShapeError
from .linalg import frobenius_norm, hadamard
from .model import Network, flatten_inputs, hidden_matrix, preactivations, prepare_inputs


@dataclass(frozen=True)
class PerturbationSpec:
    eta: float
    Z: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.Z, dtype=np.float64)
        if Z.ndim != 2:
            raise ShapeError(f"Z must be an (N, d) matrix, got shape {Z.shape}")
        if not np.all(np.isfinite(Z)):
            raise NumericError("Z contains non-finite entries")
        if not self.eta >= 0:
            raise ValueError("eta must be non-negative")
        object.__setattr__(self, "Z", Z)


def _unflatten(flat: np.ndarray, input_shape) -> np.ndarray:
    if len(input_shape) == 1:
        return flat
    d1, d2 = input_shape
    return flat.reshape(flat.shape[0], d2, d1).transpose(0, 2, 1)


def _check_direction(net: Network, X: np.ndarray, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    d = int(np.prod(net.input_shape))
    if Z.shape != (X.shape[0], d):
        raise ShapeError(f"Z must have shape ({X.shape[0]}, {d}), got {Z.shape}")
    return Z


def perturb_inputs(net: Network, X, Z, eta: float) -> np.ndarray:
    """``X + eta * Z`` with ``Z`` given in column-major flattened coordinates."""
    X = prepare_inputs(X, net.input_shape)
    Z = _check_direction(net, X, Z)
    return _unflatten(flatten_inputs(X) + eta * Z, net.input_shape)


def directional_derivative(net: Network, X, Z) -> np.ndarray:
    """Derivative of the hidden-layer matrix at ``X`` along ``Z`` (shape N x L).

    Entry ``(i, j)`` is ``g_ij (1 - g_ij) * <w_j, Z_i>``; for 2-D nodes the inner
    product is evaluated as the bilinear form ``u_j^T Z_i v_j``.
    """
    X = prepare_inputs(X, net.input_shape)
    Z = _check_direction(net, X, Z)
    if net.n_nodes == 0:
        return np.zeros((X.shape[0], 0))
    H = hidden_matrix(net.nodes, X)
    S = preactivations(net.nodes, _unflatten(Z, net.input_shape), bias=False)
    return H * (1.0 - H) * S


def saturation_matrix(net: Network, X) -> np.ndarray:
    """``H o (O - H) o W`` with ``W`` the N-fold repeat of the weight-norm row."""
    X = prepare_inputs(X, net.input_shape)
    if net.n_nodes == 0:
        return np.zeros((X.shape[0], 0))
    H = hidden_matrix(net.nodes, X)
    W = np.broadcast_to(net.weight_norms(), H.shape)
    return hadamard(hadamard(H, np.ones_like(H) - H), W)


def indicator_theta_raw(net: Network, X) -> float:
    return frobenius_norm(saturation_matrix(net, X)) * frobenius_norm(net.beta)


def normalize_indicators(raws: Sequence[float]) -> list:
    raws = np.asarray(raws, dtype=np.float64)
    if raws.size == 0 or not np.all(np.isfinite(raws)) or np.min(raws) < 0:
        raise ValueError("indicators must be a non-empty list of finite non-negative values")
    top = np.max(raws)
    if top <= 0:
        raise DegenerateNormalizationError("cannot normalize: every indicator is zero")
    return [float(r / top) for r in raws]


def test_error_bound(net: Network, X, T, spec: PerturbationSpec, include_z_factor: bool = True) -> float:
    """Computable part of the bound (the ``o(eta^2)`` remainder is dropped)."""
    X = prepare_inputs(X, net.input_shape)
    _check_direction(net, X, spec.Z)
    T = np.asarray(T, dtype=np.float64).reshape(X.shape[0], -1)
    if net.n_nodes == 0:
        return frobenius_norm(T)
    train_err = frobenius_norm(hidden_matrix(net.nodes, X) @ net.beta - T)
    zmax = float(np.max(np.linalg.norm(spec.Z, axis=1))) if include_z_factor else 1.0
    return train_err + spec.eta * zmax * indicator_theta_raw(net, X)


test_error_bound.__test__ = False  # not a pytest test despite the name
