"""Hidden nodes, networks, forward evaluation and the model file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import __version__
from .errors import NumericError, ParseError, ShapeError, VersionError
from .linalg import as_matrix, vectorize, outer

FORMAT_NAME = "scn2d-model"
FORMAT_VERSION = 1
BUILDERS = ("SCN", "2DSCN", "RVFL", "2DRVFL")

# Caps the (N, chunk, d1) temporary built while evaluating 2-D nodes.
_CHUNK_ELEMS = 1 << 22


def activate(t):
    """Logistic sigmoid, evaluated without overflow for either sign of ``t``."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class OneDNode:
    w: np.ndarray
    b: float

    def __post_init__(self):
        w = _readonly(self.w).ravel()
        if not (np.all(np.isfinite(w)) and np.isfinite(self.b)):
            raise NumericError("node parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def input_shape(self) -> tuple:
        return (self.w.size,)

    def weight_norm(self) -> float:
        return float(np.linalg.norm(self.w))


@dataclass(frozen=True, eq=False)
class TwoDNode:
    u: np.ndarray
    v: np.ndarray
    b: float

    def __post_init__(self):
        u, v = _readonly(self.u).ravel(), _readonly(self.v).ravel()
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.isfinite(self.b)):
            raise NumericError("node parameters must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "b", float(self.b))

    @property
    def input_shape(self) -> tuple:
        return (self.u.size, self.v.size)

    def weight_norm(self) -> float:
        # ||vec(u v^T)||_2 = ||u|| ||v|| for a rank-1 outer product
        return float(np.linalg.norm(self.u) * np.linalg.norm(self.v))

    def to_oned(self) -> OneDNode:
        return OneDNode(vectorize(outer(self.u, self.v)).ravel(), self.b)


HiddenNode = Union[OneDNode, TwoDNode]


@dataclass(frozen=True)
class Provenance:
    builder: str
    seed: int
    config_digest: str = ""


@dataclass(frozen=True, eq=False)
class Network:
    """A trained single-hidden-layer learner; immutable once built."""

    input_shape: tuple
    nodes: tuple
    beta: np.ndarray
    provenance: Provenance
    activation: str = "sigmoid"
    n_outputs: int = field(default=-1)

    def __post_init__(self):
        shape = tuple(int(s) for s in self.input_shape)
        if len(shape) not in (1, 2) or min(shape) < 1:
            raise ShapeError(f"input_shape must be (d,) or (d1, d2), got {shape}")
        nodes = tuple(self.nodes)
        kind = TwoDNode if len(shape) == 2 else OneDNode
        for j, node in enumerate(nodes):
            if not isinstance(node, kind) or node.input_shape != shape:
                raise ShapeError(f"node {j} does not match input_shape {shape}")
        beta = np.asarray(self.beta, dtype=np.float64)
        m = self.n_outputs
        if beta.size == 0:
            if m < 1:
                m = beta.shape[1] if beta.ndim == 2 and beta.shape[1] > 0 else 1
            beta = np.zeros((0, m))
        beta = as_matrix(beta, "beta")
        if beta.shape[0] != len(nodes):
            raise ShapeError(f"beta has {beta.shape[0]} rows for {len(nodes)} nodes")
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "input_shape", shape)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "beta", _readonly(beta))
        object.__setattr__(self, "n_outputs", beta.shape[1])

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def is_2d(self) -> bool:
        return len(self.input_shape) == 2

    def weight_norms(self) -> np.ndarray:
        return np.array([n.weight_norm() for n in self.nodes])


def flatten_inputs(X) -> np.ndarray:
    """Column-major flattening of a stack of matrices ``(N, d1, d2) -> (N, d1*d2)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        return X
    if X.ndim != 3:
        raise ShapeError(f"expected (N, d) or (N, d1, d2) inputs, got {X.shape}")
    return X.transpose(0, 2, 1).reshape(X.shape[0], -1)


def prepare_inputs(X, input_shape: Sequence[int]) -> np.ndarray:
    """Return ``X`` as an ``(N, *input_shape)`` array, flattening for 1-D models."""
    X = np.asarray(X, dtype=np.float64)
    shape = tuple(input_shape)
    if X.shape[1:] == shape:
        out = X
    elif X.shape == shape:
        out = X[None]
    elif len(shape) == 1 and X.ndim == 3 and X.shape[1] * X.shape[2] == shape[0]:
        out = flatten_inputs(X)
    else:
        raise ShapeError(f"inputs of shape {X.shape} do not match model input shape {shape}")
    if not np.all(np.isfinite(out)):
        raise NumericError("inputs contain non-finite entries")
    return out


def node_output(node: HiddenNode, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(hidden_matrix([node], x[None])[0, 0])


def stack_nodes(nodes: Sequence[HiddenNode]):
    """Pack nodes into arrays: ``(W, b)`` for 1-D or ``(U, V, b)`` for 2-D."""
    b = np.array([n.b for n in nodes], dtype=np.float64)
    if isinstance(nodes[0], TwoDNode):
        return np.array([n.u for n in nodes]), np.array([n.v for n in nodes]), b
    return np.array([n.w for n in nodes]), b


def preactivations(nodes: Sequence[HiddenNode], X, bias: bool = True) -> np.ndarray:
    """Matrix of ``u_j^T x_i v_j + b_j`` (or ``w_j^T vec(x_i) + b_j``), shape (N, L).

    With ``bias=False`` the ``b_j`` term is left out, which turns this into the
    linear response of each node to the inputs.
    """
    if len(nodes) == 0:
        return np.zeros((np.asarray(X).shape[0], 0))
    X = prepare_inputs(X, nodes[0].input_shape)
    if isinstance(nodes[0], TwoDNode):
        U, V, b = stack_nodes(nodes)
        n, d1, d2 = X.shape
        out = np.empty((n, len(nodes)))
        step = max(1, _CHUNK_ELEMS // max(1, n * d1))
        flat = X.reshape(n * d1, d2)
        for s in range(0, len(nodes), step):
            xv = (flat @ V[s:s + step].T).reshape(n, d1, -1)
            out[:, s:s + step] = np.einsum("nil,li->nl", xv, U[s:s + step])
        return out + b if bias else out
    W, b = stack_nodes(nodes)
    return X @ W.T + b if bias else X @ W.T


def hidden_matrix(nodes: Sequence[HiddenNode], X) -> np.ndarray:
    """Hidden-layer output matrix H, one column per node in insertion order."""
    return activate(preactivations(nodes, X))


def predict(net: Network, X) -> np.ndarray:
    X = prepare_inputs(X, net.input_shape)
    if net.n_nodes == 0:
        return np.zeros((X.shape[0], net.n_outputs))
    return hidden_matrix(net.nodes, X) @ net.beta


def to_oned(net: Network) -> Network:
    """Equivalent 1-D network with ``w_j = vec(u_j v_j^T)``."""
    if not net.is_2d:
        return net
    d = net.input_shape[0] * net.input_shape[1]
    return Network((d,), tuple(n.to_oned() for n in net.nodes), net.beta, net.provenance)


# --- serialization ---------------------------------------------------------

def _floats(a) -> list:
    return [float(x) for x in np.asarray(a).ravel()]


def serialize(net: Network) -> bytes:
    """Encode ``net`` as a versioned JSON document.  Floats round-trip exactly."""
    if net.is_2d:
        nodes = [{"u": _floats(n.u), "v": _floats(n.v), "b": n.b} for n in net.nodes]
    else:
        nodes = [{"w": _floats(n.w), "b": n.b} for n in net.nodes]
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "writer": f"scn2d {__version__}",
        "input_shape": list(net.input_shape),
        "activation": net.activation,
        "provenance": {
            "builder": net.provenance.builder,
            "seed": net.provenance.seed,
            "config_digest": net.provenance.config_digest,
        },
        "n_outputs": net.n_outputs,
        "nodes": nodes,
        "beta": [_floats(row) for row in net.beta],
    }
    return (json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n").encode("ascii")


def deserialize(data: bytes) -> Network:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError("model stream is not ASCII", offset=exc.start) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model stream: {exc.msg}", offset=exc.pos) from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ParseError("not a scn2d model stream", offset=0)
    if doc.get("version") != FORMAT_VERSION:
        raise VersionError(f"unsupported model version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    try:
        shape = tuple(doc["input_shape"])
        if len(shape) == 2:
            nodes = tuple(TwoDNode(n["u"], n["v"], n["b"]) for n in doc["nodes"])
        else:
            nodes = tuple(OneDNode(n["w"], n["b"]) for n in doc["nodes"])
        prov = doc["provenance"]
        m = int(doc["n_outputs"])
        beta = np.array(doc["beta"], dtype=np.float64).reshape(len(nodes), m)
        return Network(
            input_shape=shape,
            nodes=nodes,
            beta=beta,
            provenance=Provenance(str(prov["builder"]), int(prov["seed"]), str(prov["config_digest"])),
            activation=doc["activation"],
            n_outputs=m,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid model content: {exc!r}") from None


def save_network(net: Network, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize(net))


def load_network(path) -> Network:
    with open(path, "rb") as f:
        return deserialize(f.read())
