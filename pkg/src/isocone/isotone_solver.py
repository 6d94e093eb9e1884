"""Weighted least-squares projection onto the cone of isotonic vectors.

The exact solver works on the SCC condensation of the pre-order (elements on
a cycle must share one fitted value) and treats each comparable component
separately.  Chains go through pool-adjacent-violators; everything else goes
through recursive min-cut partitioning: pool a block at its weighted mean,
find the maximum-excess upper subset with one max-flow, split, recurse.

:func:`oracle_projection` is an independent, much slower route (Dykstra's
cyclic projections over the edge half-spaces) used only for verification.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._maxflow import INF, FlowNetwork
from .preorder import PreOrder

__all__ = [
    "WeightedFunction",
    "IsotonicFit",
    "ConvergenceError",
    "isotonic_regression",
    "antitonic_regression",
    "oracle_projection",
    "pava",
]

# relative slack used when deciding whether a cut improves the objective
_CUT_RTOL = 1e-12
# relative tolerance for merging fitted values into blocks
_BLOCK_RTOL = 1e-10


class ConvergenceError(RuntimeError):
    """The verification oracle hit ``max_iter`` before meeting ``tol``."""


@dataclass(frozen=True)
class WeightedFunction:
    """Values over the ground set with strictly positive weights."""

    values: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=1)
        if self.weights is None:
            weights = np.ones_like(values)
        else:
            weights = np.array(self.weights, dtype=float, ndmin=1)
        if values.ndim != 1 or weights.shape != values.shape:
            raise ValueError(f"values {values.shape} and weights {weights.shape} must be matching vectors")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.values)


def _as_weighted(values, weights) -> WeightedFunction:
    if isinstance(values, WeightedFunction):
        if weights is not None:
            raise TypeError("pass weights inside the WeightedFunction or separately, not both")
        return values
    return WeightedFunction(values, weights)


@dataclass
class IsotonicFit:
    fitted: np.ndarray
    objective: float
    diagnostics: dict
    preorder: PreOrder = field(repr=False)

    @cached_property
    def blocks(self) -> list[np.ndarray]:
        """Maximal comparability-connected sets on which ``fitted`` is constant."""
        f = self.fitted
        s = len(f)
        if self.preorder.edges:
            a, b = np.asarray(self.preorder.edges).T
            tol = _BLOCK_RTOL * np.maximum(1.0, np.maximum(np.abs(f[a]), np.abs(f[b])))
            keep = np.abs(f[a] - f[b]) <= tol
            a, b = a[keep], b[keep]
        else:
            a = b = np.empty(0, dtype=int)
        graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(s, s))
        k, labels = connected_components(graph, directed=True, connection="weak")
        _, first = np.unique(labels, return_index=True)
        return [np.flatnonzero(labels == labels[i]) for i in np.sort(first)]


# ---------------------------------------------------------------------------
# per-preorder solve plan


@dataclass
class _Piece:
    nodes: np.ndarray                 # SCC ids in this comparable component
    chain: np.ndarray | None          # SCC ids in order, when the piece is a path
    succ: list[list[int]] | None      # local successor lists for the cut solver


_PLANS: "weakref.WeakKeyDictionary[PreOrder, list[_Piece]]" = weakref.WeakKeyDictionary()


def _plan(p: PreOrder) -> list[_Piece]:
    plan = _PLANS.get(p)
    if plan is not None:
        return plan
    n = p.n_scc
    edges = p.scc_edges
    if edges:
        a, b = np.asarray(edges).T
    else:
        a = b = np.empty(0, dtype=int)
    graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    _, comp = connected_components(graph, directed=True, connection="weak")
    plan = []
    _, first = np.unique(comp, return_index=True)
    for label in comp[np.sort(first)]:
        nodes = np.flatnonzero(comp == label)
        local = {int(c): i for i, c in enumerate(nodes)}
        succ = [[] for _ in nodes]
        indeg = [0] * len(nodes)
        for u, v in edges:
            if u in local and v in local:
                succ[local[u]].append(local[v])
                indeg[local[v]] += 1
        chain = None
        if len(nodes) > 1 and all(len(s_) <= 1 for s_ in succ) and max(indeg) <= 1:
            start = indeg.index(0)
            order = [start]
            while succ[order[-1]]:
                order.append(succ[order[-1]][0])
            chain = nodes[order]
        plan.append(_Piece(nodes, chain, None if chain is not None else succ))
    _PLANS[p] = plan
    return plan


# ---------------------------------------------------------------------------
# exact solvers


def pava(y, w) -> np.ndarray:
    """Weighted pool-adjacent-violators for a nondecreasing fit along a chain."""
    means: list[float] = []
    mass: list[float] = []
    count: list[int] = []
    for yi, wi in zip(np.asarray(y, dtype=float).tolist(), np.asarray(w, dtype=float).tolist()):
        m, ww, c = yi, wi, 1
        while means and means[-1] > m:
            pm, pw, pc = means.pop(), mass.pop(), count.pop()
            m = (pm * pw + m * ww) / (pw + ww)
            ww += pw
            c += pc
        means.append(m)
        mass.append(ww)
        count.append(c)
    return np.repeat(means, count)


def _partition_solve(vals: np.ndarray, wts: np.ndarray, succ: list[list[int]]) -> tuple[np.ndarray, int]:
    out = np.empty(len(vals))
    stack = [np.arange(len(vals))]
    cuts = 0
    while stack:
        block = stack.pop()
        wb = wts[block]
        mean = float(np.dot(wb, vals[block]) / wb.sum())
        if len(block) == 1:
            out[block] = mean
            continue
        excess = wb * (vals[block] - mean)
        scale = float(np.abs(excess).sum())
        if scale <= 1e-300:
            out[block] = mean
            continue
        pos = {int(node): j for j, node in enumerate(block)}
        source, sink = len(block), len(block) + 1
        net = FlowNetwork(len(block) + 2)
        for j, node in enumerate(block.tolist()):
            c = excess[j]
            if c > 0:
                net.add_edge(source, j, c)
            elif c < 0:
                net.add_edge(j, sink, -c)
            for v in succ[node]:
                jv = pos.get(v)
                if jv is not None:
                    net.add_edge(j, jv, INF)
        eps = 1e-15 * scale
        net.max_flow(source, sink, eps)
        side = np.array(net.source_side(source, eps)[: len(block)])
        gain = float(excess[side].sum())
        if not side.any() or side.all() or gain <= _CUT_RTOL * scale:
            out[block] = mean
            continue
        cuts += 1
        stack.append(block[~side])
        stack.append(block[side])
    return out, cuts


def isotonic_regression(p: PreOrder, values, weights=None) -> IsotonicFit:
    """Exact weighted isotonic regression of ``values`` over ``p``.

    ``values`` may be a :class:`WeightedFunction` or a plain vector with a
    separate ``weights`` vector (unit weights by default).
    """
    f = _as_weighted(values, weights)
    if len(f) != p.size:
        raise ValueError(f"expected {p.size} values for this pre-order, got {len(f)}")
    g, w = f.values, f.weights
    diagnostics = {"components": 0, "pava": 0, "partition": 0, "cuts": 0, "singletons": 0}
    if p.size == 1 or not p.edges:
        diagnostics["singletons"] = p.size
        diagnostics["components"] = p.size
        return IsotonicFit(g.copy(), 0.0, diagnostics, p)

    lab = p.scc_labels
    W = np.bincount(lab, weights=w, minlength=p.n_scc)
    V = np.bincount(lab, weights=w * g, minlength=p.n_scc) / W
    out = np.empty(p.n_scc)
    for piece in _plan(p):
        diagnostics["components"] += 1
        if len(piece.nodes) == 1:
            out[piece.nodes] = V[piece.nodes]
            diagnostics["singletons"] += 1
        elif piece.chain is not None:
            out[piece.chain] = pava(V[piece.chain], W[piece.chain])
            diagnostics["pava"] += 1
        else:
            sol, cuts = _partition_solve(V[piece.nodes], W[piece.nodes], piece.succ)
            out[piece.nodes] = sol
            diagnostics["partition"] += 1
            diagnostics["cuts"] += cuts
    fitted = out[lab]
    objective = float(np.sum((fitted - g) ** 2 * w))
    return IsotonicFit(fitted, objective, diagnostics, p)


def antitonic_regression(p: PreOrder, values, weights=None) -> IsotonicFit:
    """Projection onto order-reversing vectors, via negation of the isotonic case."""
    f = _as_weighted(values, weights)
    fit = isotonic_regression(p, WeightedFunction(-f.values, f.weights))
    fit.fitted = -fit.fitted
    fit.diagnostics["direction"] = "antitonic"
    fit.__dict__.pop("blocks", None)
    return fit


def oracle_projection(p: PreOrder, values, weights=None, tol: float = 1e-10,
                      max_iter: int = 1_000_000) -> np.ndarray:
    """Dykstra's cyclic projections onto ``{x_a <= x_b}`` for every edge.

    Iterates full sweeps until the largest coordinate change over a sweep is
    below ``tol``.  Independent of the exact solver; slow, for tests only.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = _as_weighted(values, weights)
    if len(f) != p.size:
        raise ValueError(f"expected {p.size} values for this pre-order, got {len(f)}")
    x = f.values.tolist()
    w = f.weights.tolist()
    edges = p.edges
    if not edges:
        return np.array(x)
    inc_a = [0.0] * len(edges)
    inc_b = [0.0] * len(edges)
    for sweep in range(max_iter):
        start = list(x)
        for k, (a, b) in enumerate(edges):
            ya = x[a] + inc_a[k]
            yb = x[b] + inc_b[k]
            if ya > yb:
                m = (w[a] * ya + w[b] * yb) / (w[a] + w[b])
                na = nb = m
            else:
                na, nb = ya, yb
            inc_a[k] = ya - na
            inc_b[k] = yb - nb
            x[a] = na
            x[b] = nb
        if max(abs(u - v) for u, v in zip(x, start)) < tol:
            return np.array(x)
    raise ConvergenceError(f"no convergence to tol={tol} within {max_iter} sweeps")
