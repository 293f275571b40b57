"""Incremental construction of SCN / 2DSCN learners.

Hidden nodes are added one at a time.  For every new node a small pool of
random candidates is drawn; a candidate is admissible only when its score
``xi_q = (e_q.h)^2 / (h.h) - (1 - r) e_q.e_q`` is non-negative for every
output ``q``.  The admissible candidate with the largest summed score is kept,
after which all output weights are refitted by least squares.  When no
candidate passes, the sampling range ``lambda`` and the contraction ``r`` are
escalated (``lambda`` outer, ``r`` inner, both ascending).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateNodeError, NumericError, ShapeError
from .linalg import as_matrix, least_squares
from .model import Network, OneDNode, Provenance, TwoDNode, flatten_inputs, hidden_matrix
from .rng import child_stream

DEFAULT_LAMBDAS = (1.0, 5.0, 15.0, 30.0, 50.0, 100.0, 150.0, 200.0, 250.0)
DEFAULT_RS = tuple(1.0 - 10.0 ** -j for j in range(2, 8))

ONED, TWOD = "OneD", "TwoD"


@dataclass(frozen=True)
class TrainConfig:
    L_max: int = 100
    tol_eps: float = 1e-6
    T_max: int = 5
    lambda_set: tuple = DEFAULT_LAMBDAS
    r_set: tuple = DEFAULT_RS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lambda_set", tuple(float(x) for x in self.lambda_set))
        object.__setattr__(self, "r_set", tuple(float(x) for x in self.r_set))
        if self.L_max < 1 or self.T_max < 1:
            raise ValueError("L_max and T_max must be positive")
        if not self.tol_eps >= 0:
            raise ValueError("tol_eps must be non-negative")
        if not self.lambda_set or min(self.lambda_set) <= 0:
            raise ValueError("lambda_set must contain positive values")
        if any(b <= a for a, b in zip(self.lambda_set, self.lambda_set[1:])):
            raise ValueError("lambda_set must be strictly ascending")
        if not self.r_set or not all(0.0 < r < 1.0 for r in self.r_set):
            raise ValueError("r_set values must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(self.r_set, self.r_set[1:])):
            raise ValueError("r_set must be strictly ascending")

    def digest(self, kind: str = "") -> str:
        payload = json.dumps({"kind": kind, **asdict(self)}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class CandidateScore:
    node: object
    xi_per_output: np.ndarray
    lambda_used: float
    r_used: float
    h: np.ndarray = field(repr=False)

    @property
    def xi_total(self) -> float:
        return float(np.sum(self.xi_per_output))

    @property
    def admissible(self) -> bool:
        return bool(np.min(self.xi_per_output) >= 0.0)


@dataclass
class BuildReport:
    """Trajectory of a constructive run.

    ``residual_history[L]`` is the Frobenius residual with ``L`` nodes (entry 0
    is the residual of the empty model, i.e. ``||T||_F``).
    ``column_sq_residuals[L]`` holds the per-output squared residual norms.
    """

    residual_history: list = field(default_factory=list)
    column_sq_residuals: list = field(default_factory=list)
    accepted_r: list = field(default_factory=list)
    accepted_lambda: list = field(default_factory=list)
    accepted_xi: list = field(default_factory=list)
    candidates_tried: list = field(default_factory=list)
    terminated_by: str = ""

    @property
    def n_nodes(self) -> int:
        return len(self.accepted_r)

    def rows(self):
        yield 0, self.residual_history[0], "", "", 0
        for j in range(self.n_nodes):
            yield (j + 1, self.residual_history[j + 1], self.accepted_r[j],
                   self.accepted_lambda[j], self.candidates_tried[j])

    def write_csv(self, fh, comment: Optional[str] = None) -> None:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["L", "residual", "r_used", "lambda_used", "candidates_tried"])
        for L, res, r, lam, tried in self.rows():
            w.writerow([L, repr(float(res)), "" if r == "" else repr(r),
                        "" if lam == "" else repr(lam), tried])


def hh_floor(n: int) -> float:
    return 1e-12 * n


def xi_scores(e_prev, h, r: float) -> np.ndarray:
    """Per-output supervisory scores for a candidate hidden output ``h``."""
    e = as_matrix(e_prev, "e_prev")
    h = np.asarray(h, dtype=np.float64).ravel()
    if h.size != e.shape[0]:
        raise ShapeError(f"h has length {h.size}, residual has {e.shape[0]} rows")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie strictly inside (0, 1)")
    hh = float(h @ h)
    if hh <= hh_floor(h.size):
        raise DegenerateNodeError(f"h.h = {hh:.3g} is below the degeneracy floor")
    eh = e.T @ h
    return eh * eh / hh - (1.0 - r) * np.sum(e * e, axis=0)


def sample_candidate(shape: Sequence[int], lam: float, rng: np.random.Generator):
    """Draw one hidden node with every parameter uniform on ``[-lam, lam]``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    shape = tuple(shape)
    if len(shape) == 2:
        u = rng.uniform(-lam, lam, shape[0])
        v = rng.uniform(-lam, lam, shape[1])
        return TwoDNode(u, v, rng.uniform(-lam, lam))
    w = rng.uniform(-lam, lam, shape[0])
    return OneDNode(w, rng.uniform(-lam, lam))


def _score(node, X, e, lam, r) -> Optional[CandidateScore]:
    h = hidden_matrix([node], X)[:, 0]
    try:
        xi = xi_scores(e, h, r)
    except DegenerateNodeError:
        return None
    return CandidateScore(node, xi, lam, r, h)


def configure_node(e_prev, X, lam: float, r: float, T_max: int, rng, executor=None):
    """Draw ``T_max`` candidates and return the best admissible one, or ``None``.

    ``rng`` is either a single generator (candidates drawn in sequence) or a
    sequence of ``T_max`` generators, one per candidate.  Ties in the summed
    score go to the earliest draw.
    """
    X = np.asarray(X, dtype=np.float64)
    shape = X.shape[1:]
    if isinstance(rng, np.random.Generator):
        nodes = [sample_candidate(shape, lam, rng) for _ in range(T_max)]
    else:
        nodes = [sample_candidate(shape, lam, g) for g in rng]
    if executor is None:
        scored = [_score(n, X, e_prev, lam, r) for n in nodes]
    else:
        scored = list(executor.map(lambda n: _score(n, X, e_prev, lam, r), nodes))
    best = None
    for cand in scored:
        if cand is None or not cand.admissible:
            continue
        if best is None or cand.xi_total > best.xi_total:
            best = cand
    return best


def prepare_training_inputs(X, kind: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if kind == TWOD:
        if X.ndim != 3:
            raise ShapeError(f"2-D learners need (N, d1, d2) inputs, got {X.shape}")
    elif kind == ONED:
        X = flatten_inputs(X)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if not np.all(np.isfinite(X)):
        raise NumericError("inputs contain non-finite entries")
    return X


def train_scn(X, T, config: TrainConfig = TrainConfig(), kind: str = TWOD, executor=None):
    """Build an SCN (``kind="OneD"``) or 2DSCN (``kind="TwoD"``).

    Returns ``(network, report)``.  One-dimensional learners flatten matrix
    inputs column-major.
    """
    X = prepare_training_inputs(X, kind)
    T = np.asarray(T, dtype=np.float64)
    if T.ndim == 1:
        T = T[:, None]
    if not np.all(np.isfinite(T)):
        raise NumericError("targets contain non-finite entries")
    n = X.shape[0]
    if n < 1 or T.shape[0] != n:
        raise ShapeError(f"{n} input samples but {T.shape[0]} target rows")

    nodes, columns = [], []
    beta = np.zeros((0, T.shape[1]))
    e = T.copy()
    report = BuildReport()
    report.residual_history.append(float(np.linalg.norm(e)))
    report.column_sq_residuals.append(np.sum(e * e, axis=0))

    while len(nodes) < config.L_max and report.residual_history[-1] > config.tol_eps:
        L = len(nodes) + 1
        best, tried = None, 0
        for li, lam in enumerate(config.lambda_set):
            for ri, r in enumerate(config.r_set):
                streams = [child_stream(config.seed, L, li, ri, k) for k in range(config.T_max)]
                tried += config.T_max
                best = configure_node(e, X, lam, r, config.T_max, streams, executor)
                if best is not None:
                    break
            if best is not None:
                break
        if best is None:
            report.terminated_by = "exhausted"
            break
        nodes.append(best.node)
        columns.append(best.h)
        H = np.column_stack(columns)
        beta = least_squares(H, T)
        e = T - H @ beta
        report.residual_history.append(float(np.linalg.norm(e)))
        report.column_sq_residuals.append(np.sum(e * e, axis=0))
        report.accepted_r.append(best.r_used)
        report.accepted_lambda.append(best.lambda_used)
        report.accepted_xi.append(best.xi_per_output)
        report.candidates_tried.append(tried)
    else:
        if report.residual_history[-1] <= config.tol_eps:
            report.terminated_by = "tolerance"
        else:
            report.terminated_by = "L_max"

    builder = "2DSCN" if kind == TWOD else "SCN"
    net = Network(
        input_shape=X.shape[1:],
        nodes=tuple(nodes),
        beta=beta,
        provenance=Provenance(builder, int(config.seed), config.digest(kind)),
        n_outputs=T.shape[1],
    )
    return net, report
