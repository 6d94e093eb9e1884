"""Per-replicate random streams.

Replicate ``i`` of a run with master seed ``seed`` and purpose tag ``tag``
draws from ``Philox(SeedSequence(seed, spawn_key=(tag, i)))``.  Results are
therefore independent of how replicates are split across workers.
"""
from __future__ import annotations

import os

import numpy as np

FINITE = 0
LIMIT = 1
FIGURE1 = 2
VARIANCE = 3

DEFAULT_SEED = 20240517


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("ISOCONE_SEED")
    return int(env) if env else DEFAULT_SEED


def stream(seed: int, tag: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.Philox(ss))
