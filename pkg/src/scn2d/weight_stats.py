"""How often do random weight vectors carry many near-zero coordinates?

Three ways of producing a length-``d`` weight vector are compared:

* ``M1`` - ``d`` i.i.d. draws;
* ``M2`` - entrywise product of two independent i.i.d. ``d``-vectors;
* ``M3`` - ``vec(u v^T)`` with ``u`` of length ``d1``, ``v`` of length ``d2``.

For each strategy we estimate ``P(#{i : |w_i| <= tau} / d >= p)`` by Monte
Carlo.  Trial ``t`` draws from the keyed stream ``(seed, t)`` so estimates do
not depend on thread scheduling; trials are dispatched in fixed-size blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rng import child_stream

METHODS = ("M3", "M2", "M1")
DISTRIBUTIONS = ("uniform_pm1", "standard_normal")
BLOCK = 1000

TABLE_TAUS = (0.001, 0.005, 0.01)
TABLE_PS = (0.08, 0.10, 0.12, 0.15)


@dataclass(frozen=True)
class StatsSpec:
    d1: int = 28
    d2: int = 28
    dist: str = "uniform_pm1"
    tau: float = 0.01
    p: float = 0.08
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("d1 and d2 must be positive")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"dist must be one of {DISTRIBUTIONS}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.p < 1:
            raise ValueError("p must lie strictly inside (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @property
    def d(self) -> int:
        return self.d1 * self.d2


@dataclass(frozen=True)
class Estimate:
    hits: int
    trials: int

    @property
    def p_hat(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)


def _draw(dist: str, rng: np.random.Generator, size) -> np.ndarray:
    if dist == "uniform_pm1":
        return rng.uniform(-1.0, 1.0, size)
    return rng.standard_normal(size)


def sample_block(method: str, dist: str, d1: int, d2: int, n: int, rng) -> np.ndarray:
    """``n`` weight vectors (rows) drawn with ``method``."""
    d = d1 * d2
    if method == "M1":
        return _draw(dist, rng, (n, d))
    if method == "M2":
        return _draw(dist, rng, (n, d)) * _draw(dist, rng, (n, d))
    if method == "M3":
        u = _draw(dist, rng, (n, d1))
        v = _draw(dist, rng, (n, d2))
        # row k is vec(u_k v_k^T) in column-major order
        return (v[:, :, None] * u[:, None, :]).reshape(n, d)
    raise ValueError(f"unknown method {method!r}")


def sample_weight(method: str, spec: StatsSpec, rng) -> np.ndarray:
    return sample_block(method, spec.dist, spec.d1, spec.d2, 1, rng)[0]


def small_fraction(w, tau: float) -> float:
    w = np.asarray(w, dtype=np.float64).ravel()
    return float(np.count_nonzero(np.abs(w) <= tau)) / w.size


def small_counts(method: str, dist: str, d1: int, d2: int, taus: Sequence[float],
                 trials: int, seed: int, executor=None) -> np.ndarray:
    """Per-trial counts of coordinates with ``|w_i| <= tau``; shape (trials, len(taus))."""
    taus = np.asarray(taus, dtype=np.float64)
    n_blocks = -(-trials // BLOCK)

    def block(b):
        stop = min(trials, (b + 1) * BLOCK)
        a = np.abs(np.concatenate([sample_block(method, dist, d1, d2, 1, child_stream(seed, t))
                                   for t in range(b * BLOCK, stop)]))
        return np.stack([np.count_nonzero(a <= t, axis=1) for t in taus], axis=1)

    blocks = map(block, range(n_blocks)) if executor is None else executor.map(block, range(n_blocks))
    return np.concatenate(list(blocks), axis=0)


def estimate_probability(method: str, spec: StatsSpec, executor=None) -> Estimate:
    counts = small_counts(method, spec.dist, spec.d1, spec.d2, [spec.tau], spec.trials,
                          spec.seed, executor)[:, 0]
    return Estimate(int(np.count_nonzero(counts / spec.d >= spec.p)), spec.trials)


def estimate_grid(dist: str, taus: Iterable[float] = TABLE_TAUS, ps: Iterable[float] = TABLE_PS,
                  d1: int = 28, d2: int = 28, trials: int = 100_000, seed: int = 0,
                  methods: Sequence[str] = METHODS, executor=None) -> dict:
    """Estimates for every ``(method, tau, p)`` cell, sharing draws across cells.

    A cell matches what :func:`estimate_probability` returns for the same
    ``(method, dist, tau, p, trials, seed)``.
    """
    taus, ps = list(taus), list(ps)
    d = d1 * d2
    out = {}
    for method in methods:
        counts = small_counts(method, dist, d1, d2, taus, trials, seed, executor)
        for k, tau in enumerate(taus):
            frac = counts[:, k] / d
            for p in ps:
                out[method, tau, p] = Estimate(int(np.count_nonzero(frac >= p)), trials)
    return out
