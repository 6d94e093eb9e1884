"""Random pre-orders and isotonic vectors for property tests and demos."""
from __future__ import annotations

import numpy as np

from .preorder import PreOrder


def random_preorder(rng: np.random.Generator, s: int, density: float = 0.35,
                    cycle_prob: float = 0.0) -> PreOrder:
    """Random DAG on ``s`` shuffled nodes; with ``cycle_prob`` one back edge makes a cycle."""
    perm = rng.permutation(s)
    edges = [(int(perm[i]), int(perm[j]))
             for i in range(s) for j in range(i + 1, s) if rng.random() < density]
    if s > 1 and rng.random() < cycle_prob:
        i, j = sorted(rng.choice(s, size=2, replace=False))
        edges.append((int(perm[j]), int(perm[i])))
    return PreOrder(list(range(s)), edges)


def random_isotonic(p: PreOrder, rng: np.random.Generator, levels: int | None = 4) -> np.ndarray:
    """``g0[i] = max_{j <= i} r[j]`` for random ``r``; integer ``r`` when ``levels`` is set, so ties occur."""
    if levels is None:
        r = rng.normal(size=p.size)
    else:
        r = rng.integers(0, levels, size=p.size).astype(float)
    R = p.reachability
    return np.max(np.where(R, r[:, None], -np.inf), axis=0)
