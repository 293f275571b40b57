"""Keyed random streams.

Every stochastic draw in the package comes from a generator keyed by the
master seed plus a tuple of integer indices, so results never depend on the
order in which independent pieces of work are scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def child_stream(seed: int, *key: int) -> np.random.Generator:
    entropy = [int(seed) & _MASK64, *(int(k) for k in key)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
