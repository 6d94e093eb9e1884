"""Finite pre-ordered sets.

A :class:`PreOrder` stores a ground set of opaque labels together with a list
of generating edges ``(a, b)`` meaning ``a <= b``.  The relation itself is the
reflexive-transitive closure of those edges.  Cycles are allowed, so the
canonical internal form is the condensation into strongly connected
components (SCCs), with a reachability bitset per SCC.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from graphlib import TopologicalSorter
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class PreOrderError(ValueError):
    """Raised for malformed pre-order input."""


@dataclass(frozen=True)
class ComponentPartition:
    """Partition of the ground set into comparable components.

    ``labels[i]`` is the component id of element ``i``; components are
    numbered by their smallest member.
    """

    components: tuple[np.ndarray, ...]
    labels: np.ndarray

    @property
    def k(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def _canonical_labels(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Renumber component labels in order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.intp), len(first)


class PreOrder:
    """Reflexive-transitive closure of a directed edge list on ``s`` elements.

    Instances are immutable; derived structures are computed lazily and
    cached, so sharing one instance across many solves is cheap.
    """

    def __init__(self, elements: Sequence[Hashable], edges: Iterable[tuple[int, int]]):
        self.elements = tuple(elements)
        s = len(self.elements)
        if s < 1:
            raise PreOrderError("a pre-order needs at least one element")
        seen = set()
        clean = []
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < s and 0 <= b < s):
                raise PreOrderError(f"edge ({a}, {b}) out of range for {s} elements")
            if a == b or (a, b) in seen:
                continue
            seen.add((a, b))
            clean.append((a, b))
        self.edges = tuple(clean)

    # construction -------------------------------------------------------

    @classmethod
    def from_labels(cls, elements: Sequence[Hashable],
                    relation_edges: Iterable[tuple[Hashable, Hashable]]) -> "PreOrder":
        elements = list(elements)
        index = {}
        for i, label in enumerate(elements):
            if label in index:
                raise PreOrderError(f"duplicate element label {label!r}")
            index[label] = i
        edges = []
        for a, b in relation_edges:
            if a not in index or b not in index:
                missing = a if a not in index else b
                raise PreOrderError(f"edge references unknown element {missing!r}")
            edges.append((index[a], index[b]))
        return cls(elements, edges)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"PreOrder(size={self.size}, edges={len(self.edges)})"

    @cached_property
    def index(self) -> dict:
        return {label: i for i, label in enumerate(self.elements)}

    def index_of(self, label: Hashable) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise PreOrderError(f"unknown element {label!r}") from None

    # structure ----------------------------------------------------------

    def _adjacency(self):
        s = self.size
        if self.edges:
            rows, cols = zip(*self.edges)
        else:
            rows, cols = (), ()
        return coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(s, s)).tocsr()

    @cached_property
    def scc_labels(self) -> np.ndarray:
        """SCC id per element; ids follow first appearance."""
        _, labels = connected_components(self._adjacency(), directed=True,
                                         connection="strong")
        labels, _ = _canonical_labels(labels)
        return labels

    @cached_property
    def n_scc(self) -> int:
        return int(self.scc_labels.max()) + 1

    @cached_property
    def scc_edges(self) -> tuple[tuple[int, int], ...]:
        """Edges of the condensation DAG (deduplicated, no self loops)."""
        lab = self.scc_labels
        out = {(int(lab[a]), int(lab[b])) for a, b in self.edges if lab[a] != lab[b]}
        return tuple(sorted(out))

    @cached_property
    def scc_topological_order(self) -> tuple[int, ...]:
        ts = TopologicalSorter({c: () for c in range(self.n_scc)})
        for a, b in self.scc_edges:
            ts.add(b, a)
        return tuple(ts.static_order())

    @cached_property
    def _scc_reach_bits(self) -> list[int]:
        succ = [[] for _ in range(self.n_scc)]
        for a, b in self.scc_edges:
            succ[a].append(b)
        reach = [0] * self.n_scc
        for c in reversed(self.scc_topological_order):
            bits = 1 << c
            for d in succ[c]:
                bits |= reach[d]
            reach[c] = bits
        return reach

    @cached_property
    def reachability(self) -> np.ndarray:
        """Boolean matrix ``R`` with ``R[a, b]`` iff ``a <= b``."""
        nbytes = (self.n_scc + 7) // 8
        rows = np.empty((self.n_scc, self.n_scc), dtype=bool)
        for c, bits in enumerate(self._scc_reach_bits):
            raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
            rows[c] = np.unpackbits(raw, bitorder="little")[: self.n_scc].astype(bool)
        lab = self.scc_labels
        R = rows[np.ix_(lab, lab)]
        R.setflags(write=False)
        return R

    @cached_property
    def comparability(self) -> np.ndarray:
        C = self.reachability | self.reachability.T
        C.setflags(write=False)
        return C

    def leq(self, a: int, b: int) -> bool:
        """``a <= b`` for element indices."""
        lab = self.scc_labels
        return bool((self._scc_reach_bits[lab[a]] >> int(lab[b])) & 1)

    def comparable_indices(self, a: int, b: int) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    @cached_property
    def components(self) -> ComponentPartition:
        _, labels = connected_components(self._adjacency(), directed=True,
                                         connection="weak")
        labels, k = _canonical_labels(labels)
        comps = tuple(np.flatnonzero(labels == v) for v in range(k))
        return ComponentPartition(comps, labels)

    def is_isotonic(self, values, slack: float = 1e-12) -> bool:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.size,):
            raise PreOrderError(f"expected {self.size} values, got shape {values.shape}")
        if not self.edges:
            return True
        a, b = np.asarray(self.edges).T
        return bool(np.all(values[a] <= values[b] + slack))

    def restrict(self, indices: Sequence[int]) -> "PreOrder":
        """Induced pre-order on a subset, relabelled ``0..len(indices)-1``.

        Edges are the covers of the induced closure plus cycles through every
        mutually comparable class, so paths through removed elements are kept.
        """
        idx = np.asarray(indices, dtype=np.intp)
        sub = self.reachability[np.ix_(idx, idx)]
        mutual = sub & sub.T
        strict = sub & ~sub.T
        two_step = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
        cover = strict & ~two_step
        np.fill_diagonal(mutual, False)
        rows, cols = np.nonzero(cover | mutual)
        labels = [self.elements[i] for i in idx]
        return PreOrder(labels, zip(rows.tolist(), cols.tolist()))


def build_preorder(elements: Sequence[Hashable],
                   relation_edges: Iterable[tuple[Hashable, Hashable]]) -> PreOrder:
    """Validate labels and edges and return the pre-order they generate."""
    return PreOrder.from_labels(elements, relation_edges)


def comparable(p: PreOrder, a: Hashable, b: Hashable) -> bool:
    """True iff ``a <= b`` or ``b <= a`` (labels, not indices)."""
    return p.comparable_indices(p.index_of(a), p.index_of(b))


def comparable_components(p: PreOrder) -> ComponentPartition:
    return p.components


def grid_preorder(dims: Sequence[int]) -> PreOrder:
    """Product order on ``{1..r_1} x ... x {1..r_d}``, row-major, 1-based labels.

    Cover edges join points that differ by one in a single coordinate.
    """
    dims = [int(r) for r in dims]
    if not dims or any(r < 1 for r in dims):
        raise PreOrderError(f"grid dimensions must be positive, got {dims}")
    shape = tuple(dims)
    labels = list(itertools.product(*(range(1, r + 1) for r in shape)))
    flat = np.arange(int(np.prod(shape))).reshape(shape)
    edges = []
    for axis in range(len(shape)):
        lo = np.take(flat, range(shape[axis] - 1), axis=axis).ravel()
        hi = np.take(flat, range(1, shape[axis]), axis=axis).ravel()
        edges.extend(zip(lo.tolist(), hi.tolist()))
    edges.sort()
    return PreOrder(labels, edges)


def chain_preorder(s: int) -> PreOrder:
    """Total order ``0 <= 1 <= ... <= s-1``."""
    return PreOrder(list(range(s)), [(i, i + 1) for i in range(s - 1)])
