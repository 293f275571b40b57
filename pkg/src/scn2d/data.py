"""Datasets: IDX image containers, CSV files and synthetic matrix-regression tasks."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConsistencyError, FormatError, ShapeError
from .model import activate, flatten_inputs
from .rng import child_stream

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    inputs: np.ndarray            # (N, d1, d2) or (N, d)
    targets: np.ndarray           # (N, m)
    name: str = ""
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.targets.ndim == 1:
            self.targets = self.targets[:, None]
        if self.inputs.ndim not in (2, 3):
            raise ShapeError(f"inputs must be (N, d) or (N, d1, d2), got {self.inputs.shape}")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ConsistencyError(
                f"{self.inputs.shape[0]} samples but {self.targets.shape[0]} target rows")

    @property
    def input_shape(self) -> tuple:
        return self.inputs.shape[1:]

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def is_classification(self) -> bool:
        return self.labels is not None


def one_hot(labels, n_classes: Optional[int] = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and labels.min() < 0:
        raise ValueError("class labels must be non-negative")
    m = int(labels.max()) + 1 if n_classes is None else n_classes
    out = np.zeros((labels.size, m))
    out[np.arange(labels.size), labels] = 1.0
    return out


def decode_one_hot(Y) -> np.ndarray:
    return np.argmax(np.asarray(Y), axis=1)


# --- IDX ---------------------------------------------------------------------

def _read_idx(path, magic: int, ndim: int) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise FormatError(f"{path}: truncated IDX header", offset=len(raw))
    (got,) = struct.unpack(">I", raw[:4])
    if got != magic:
        raise FormatError(f"{path}: bad IDX magic 0x{got:08x}, expected 0x{magic:08x}", offset=0)
    dims = struct.unpack(">" + "I" * ndim, raw[4:header])
    size = int(np.prod(dims))
    if len(raw) != header + size:
        raise FormatError(f"{path}: expected {size} data bytes, found {len(raw) - header}",
                          offset=len(raw))
    return np.frombuffer(raw, dtype=np.uint8, offset=header).reshape(dims)


def load_idx(images_path, labels_path, n_classes: Optional[int] = None, name: str = "") -> Dataset:
    """Load an IDX image/label pair; pixels are scaled to [0, 1], labels one-hot."""
    images = _read_idx(images_path, IDX_IMAGES_MAGIC, 3)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC, 1)
    if images.shape[0] != labels.shape[0]:
        raise ConsistencyError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return Dataset(images.astype(np.float64) / 255.0, one_hot(labels, n_classes),
                   name=name or str(images_path), labels=labels.astype(np.int64))


def write_idx(images, labels, images_path, labels_path) -> None:
    """Write ``uint8`` images ``(N, rows, cols)`` and labels ``(N,)`` as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


# --- CSV ---------------------------------------------------------------------

def load_csv(path, input_shape, target_cols: int, skip_header: bool = False, name: str = "") -> Dataset:
    """Each row holds ``vec(x)`` (column-major) followed by ``target_cols`` targets.

    Lines starting with ``#`` are comments.
    """
    shape = tuple(int(s) for s in input_shape)
    d = int(np.prod(shape))
    width = d + target_cols
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header_pending = skip_header
        for row in reader:
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header_pending:
                header_pending = False
                continue
            if len(row) != width:
                raise FormatError(f"{path}, line {reader.line_num}: expected {width} columns, got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise FormatError(f"{path}, line {reader.line_num}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite values")
    flat = data[:, :d]
    if len(shape) == 2:
        inputs = flat.reshape(-1, shape[1], shape[0]).transpose(0, 2, 1)
    else:
        inputs = flat
    return Dataset(np.ascontiguousarray(inputs), data[:, d:], name=name or str(path))


def save_csv(ds: Dataset, path, comment: Optional[str] = None) -> None:
    flat = flatten_inputs(ds.inputs)
    with open(path, "w", newline="") as f:
        if comment:
            f.write(f"# {comment}\n")
        w = csv.writer(f, lineterminator="\n")
        for x, t in zip(flat, ds.targets):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in t])


# --- synthetic tasks ---------------------------------------------------------

@dataclass(frozen=True)
class PlantedTarget:
    """``f(x) = sum_j c_j * g(u_j^T x v_j + b_j)``."""

    U: np.ndarray
    V: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        pre = np.einsum("ki,nij,kj->nk", self.U, X, self.V) + self.b
        return (activate(pre) @ self.c)[:, None]


def planted_target(d1: int, d2: int, k: int, seed: int) -> PlantedTarget:
    rng = child_stream(seed, 0)
    return PlantedTarget(rng.uniform(-1, 1, (k, d1)), rng.uniform(-1, 1, (k, d2)),
                         rng.uniform(-1, 1, k), rng.uniform(-1, 1, k))


def synth_matrix_regression(N: int, d1: int, d2: int, k: int = 3, noise_sd: float = 0.0,
                            seed: int = 0):
    """Train/test pair of ``N`` samples each, inputs uniform on [0, 1]^(d1 x d2).

    Gaussian noise of standard deviation ``noise_sd`` is added to the training
    targets only.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    f = planted_target(d1, d2, k, seed)
    X_train = child_stream(seed, 1).uniform(0.0, 1.0, (N, d1, d2))
    X_test = child_stream(seed, 2).uniform(0.0, 1.0, (N, d1, d2))
    T_train = f(X_train)
    if noise_sd > 0:
        T_train = T_train + child_stream(seed, 3).normal(0.0, noise_sd, T_train.shape)
    name = f"synth(N={N},d1={d1},d2={d2},k={k},noise_sd={noise_sd!r},seed={seed})"
    return Dataset(X_train, T_train, name=name + ":train"), Dataset(X_test, f(X_test), name=name + ":test")
