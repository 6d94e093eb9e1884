"""Comparable level sets of a reference isotonic vector and the map phi.

Given a reference isotonic ``g0`` the ground set splits uniquely into sets on
which ``g0`` is constant and which are comparability-connected.  A vector
that stays within half the smallest comparable level distance of ``g0`` has
an isotonic regression equal to the concatenation of the separate
regressions over those sets; :func:`phi` computes that concatenation for an
arbitrary vector, which is how the limit law of the isotonized estimator is
built from the limit law of the basic one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .isotone_solver import isotonic_regression
from .preorder import PreOrder

ISOTONIC_SLACK = 1e-12


class NotIsotonicError(ValueError):
    pass


@dataclass(frozen=True)
class LevelSet:
    indices: np.ndarray
    component: int
    level: int
    value: float

    def __len__(self):
        return len(self.indices)


@dataclass
class LevelPartition:
    """Comparable level sets of ``g0``, optionally with a truncation tail.

    In the untruncated case ``sets`` covers the ground set and ``tail_set`` is
    empty.  After truncation ``sets`` holds the ``m'`` kept sets and
    ``tail_set`` everything else.
    """

    preorder: PreOrder = field(repr=False)
    reference: np.ndarray = field(repr=False)
    sets: list[LevelSet]
    epsilon_tilde: float
    tail_set: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    n_levels: int = 0

    @property
    def truncated(self) -> bool:
        return len(self.tail_set) > 0

    @property
    def pieces(self) -> list[np.ndarray]:
        """Index sets over which phi regresses separately."""
        out = [ls.indices for ls in self.sets]
        if self.truncated:
            out.append(self.tail_set)
        return out

    @cached_property
    def piece_labels(self) -> np.ndarray:
        labels = np.empty(self.preorder.size, dtype=np.intp)
        for k, idx in enumerate(self.pieces):
            labels[idx] = k
        return labels

    @cached_property
    def piece_preorders(self) -> list[PreOrder | None]:
        return [self.preorder.restrict(idx) if len(idx) > 1 else None for idx in self.pieces]

    def to_dict(self) -> dict:
        out = {
            "sets": [
                {"component": ls.component, "level": ls.level, "value": ls.value,
                 "indices": ls.indices.tolist()}
                for ls in self.sets
            ],
            "epsilon_tilde": self.epsilon_tilde,
            "n_levels": self.n_levels,
        }
        if self.truncated:
            out["tail_set"] = self.tail_set.tolist()
        return out


def _check_isotonic(p: PreOrder, g0) -> np.ndarray:
    g0 = np.asarray(g0, dtype=float)
    if g0.shape != (p.size,):
        raise ValueError(f"reference has shape {g0.shape}, expected ({p.size},)")
    if not p.is_isotonic(g0, slack=ISOTONIC_SLACK):
        raise NotIsotonicError("reference vector is not isotonic on this pre-order")
    return g0


def _level_labels(p: PreOrder, g0: np.ndarray) -> np.ndarray:
    """Set id per element: weak components of the edges joining equal values."""
    s = p.size
    if p.edges:
        a, b = np.asarray(p.edges).T
        same = g0[a] == g0[b]
        a, b = a[same], b[same]
    else:
        a = b = np.empty(0, dtype=int)
    graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(s, s))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels


def _set_distance(p: PreOrder, g0: np.ndarray, labels: np.ndarray, rows=None) -> float:
    """Smallest |g0 difference| over comparable pairs lying in different sets.

    ``rows`` restricts the first member of the pair (used for the truncated
    variant, where only kept sets count on one side).
    """
    C = p.comparability
    cross = C & (labels[:, None] != labels[None, :])
    if rows is not None:
        mask = np.zeros(p.size, dtype=bool)
        mask[rows] = True
        cross &= mask[:, None]
    if not cross.any():
        return math.inf
    diff = np.abs(g0[:, None] - g0[None, :])
    return float(diff[cross].min())


def _build_sets(p: PreOrder, g0: np.ndarray, labels: np.ndarray) -> list[LevelSet]:
    comp = p.components.labels
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels.tolist()):
        groups.setdefault(lab, []).append(i)
    members = [np.asarray(v, dtype=np.intp) for v in groups.values()]
    # level numbering inside a component: increasing value, then smallest member
    members.sort(key=lambda m: (comp[m[0]], g0[m[0]], m[0]))
    out = []
    level = {}
    for m in members:
        v = int(comp[m[0]])
        level[v] = level.get(v, 0) + 1
        out.append(LevelSet(m, v, level[v], float(g0[m[0]])))
    return out


def level_partition(p: PreOrder, g0) -> LevelPartition:
    """Unique partition into comparable level sets of an isotonic ``g0``.

    ``epsilon_tilde`` is ``inf`` when no two distinct sets contain a
    comparable pair.
    """
    g0 = _check_isotonic(p, g0)
    labels = _level_labels(p, g0)
    sets = _build_sets(p, g0, labels)
    eps = _set_distance(p, g0, labels)
    return LevelPartition(p, g0, sets, eps, n_levels=len(sets))


def truncated_level_partition(p: PreOrder, g0, m_prime: int) -> LevelPartition:
    """Keep the ``m_prime`` sets with the largest ``|g0|`` and lump the rest.

    Ties in ``|g0|`` go to the set whose smallest member index is lower.
    """
    g0 = _check_isotonic(p, g0)
    labels = _level_labels(p, g0)
    sets = _build_sets(p, g0, labels)
    if not 1 <= m_prime < len(sets):
        raise ValueError(f"m_prime must lie in [1, {len(sets) - 1}], got {m_prime}")
    ranked = sorted(sets, key=lambda ls: (-abs(ls.value), int(ls.indices[0])))
    kept = ranked[:m_prime]
    tail = np.sort(np.concatenate([ls.indices for ls in ranked[m_prime:]]))
    kept_rows = np.concatenate([ls.indices for ls in kept])
    eps = _set_distance(p, g0, labels, rows=kept_rows)
    kept.sort(key=lambda ls: (ls.component, ls.level))
    return LevelPartition(p, g0, kept, eps, tail_set=tail, n_levels=len(sets))


def phi(p: PreOrder, lp: LevelPartition, theta, weights=None, antitonic: bool = False) -> np.ndarray:
    """Concatenate the separate (weighted) regressions of ``theta`` over each piece of ``lp``.

    With ``antitonic=True`` each piece is projected onto order-reversing
    vectors instead, which is the map used for decreasing pmfs.
    """
    if lp.preorder is not p and lp.preorder.size != p.size:
        raise ValueError("level partition was built for a different pre-order")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (p.size,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({p.size},)")
    w = np.ones(p.size) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != theta.shape:
        raise ValueError("weights and theta must have the same length")
    sign = -1.0 if antitonic else 1.0
    out = theta.copy()
    for idx, sub in zip(lp.pieces, lp.piece_preorders):
        if sub is None:
            continue
        out[idx] = sign * isotonic_regression(sub, sign * theta[idx], w[idx]).fitted
    return out


def check_localization(p: PreOrder, lp: LevelPartition, g, g0=None) -> bool:
    """Whether ``sup |g - g0| < epsilon_tilde / 2``."""
    g0 = lp.reference if g0 is None else np.asarray(g0, dtype=float)
    if math.isinf(lp.epsilon_tilde):
        return True
    return bool(np.max(np.abs(np.asarray(g, dtype=float) - g0)) < lp.epsilon_tilde / 2)
