"""Dense float64 linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects.  Every public function checks
finiteness of its operands so that NaN/Inf never propagate silently.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError, ShapeError

__all__ = [
    "as_matrix",
    "matmul",
    "hadamard",
    "frobenius_norm",
    "vectorize",
    "unvectorize",
    "outer",
    "bilinear_form",
    "least_squares",
]


def _finite(a: np.ndarray, name: str = "operand") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains non-finite entries")
    return a


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float64 array (vectors become columns)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise ShapeError(f"{name} must be 1-D or 2-D, got shape {m.shape}")
    return _finite(m, name)


def _as_vector(a, name: str) -> np.ndarray:
    v = np.asarray(a, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {v.shape}")
    return _finite(v, name)


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return _finite(a @ b, "product")


def hadamard(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"entrywise product needs equal shapes, got {a.shape} and {b.shape}")
    return _finite(a * b, "product")


def frobenius_norm(a) -> float:
    a = _finite(np.asarray(a, dtype=np.float64))
    # scaled to avoid overflow in the squares
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(scale * np.sqrt(np.sum((a / scale) ** 2)))


def vectorize(x) -> np.ndarray:
    """Column-major stacking: entry ``j*d1 + i`` holds ``x[i, j]``."""
    x = as_matrix(x, "x")
    return x.reshape(-1, 1, order="F")


def unvectorize(w, d1: int, d2: int) -> np.ndarray:
    w = _as_vector(w, "w")
    if w.size != d1 * d2:
        raise ShapeError(f"cannot reshape length {w.size} into ({d1}, {d2})")
    return w.reshape(d1, d2, order="F")


def outer(u, v) -> np.ndarray:
    u, v = _as_vector(u, "u"), _as_vector(v, "v")
    return np.outer(u, v)


def bilinear_form(u, x, v) -> float:
    """``u.T @ x @ v`` evaluated as ``(u.T @ x) @ v``."""
    u, v = _as_vector(u, "u"), _as_vector(v, "v")
    x = as_matrix(x, "x")
    if x.shape != (u.size, v.size):
        raise ShapeError(f"bilinear form needs x of shape ({u.size}, {v.size}), got {x.shape}")
    return float((u @ x) @ v)


def least_squares(h, t) -> np.ndarray:
    """Minimum-Frobenius-norm solution of ``min ||h @ beta - t||_F``.

    Uses a thin SVD; singular values below ``max(N, L) * eps * sigma_max``
    are treated as zero, so rank-deficient ``h`` is handled.
    """
    h = as_matrix(h, "h")
    t = as_matrix(t, "t")
    n, l = h.shape
    if t.shape[0] != n:
        raise ShapeError(f"h has {n} rows but t has {t.shape[0]}")
    if l == 0:
        return np.zeros((0, t.shape[1]))
    u, s, vt = np.linalg.svd(h, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((l, t.shape[1]))
    cutoff = max(n, l) * np.finfo(np.float64).eps * s[0]
    keep = s > cutoff
    coef = (u[:, keep].T @ t) / s[keep, None]
    return _finite(vt[keep].T @ coef, "solution")
