"""Dinic max-flow on small real-capacity networks.

Only what the partitioning solver needs: add edges, push a max flow, then
read off the source side of a minimum cut.
"""
from __future__ import annotations

from collections import deque

INF = float("inf")


class FlowNetwork:
    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[float] = []

    def add_edge(self, u: int, v: int, capacity: float) -> None:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(capacity)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)

    def _levels(self, s: int, t: int, eps: float):
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        to, cap = self.to, self.cap
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                v = to[e]
                if level[v] < 0 and cap[e] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, u, t, pushed, level, it, eps):
        if u == t:
            return pushed
        to, cap, adj = self.to, self.cap, self.adj[u]
        while it[u] < len(adj):
            e = adj[it[u]]
            v = to[e]
            if cap[e] > eps and level[v] == level[u] + 1:
                got = self._augment(v, t, min(pushed, cap[e]), level, it, eps)
                if got > eps:
                    cap[e] -= got
                    cap[e ^ 1] += got
                    return got
            it[u] += 1
        return 0.0

    def max_flow(self, s: int, t: int, eps: float = 0.0) -> float:
        """Push a maximum flow; residual capacities at or below ``eps`` count as saturated."""
        total = 0.0
        while True:
            level = self._levels(s, t, eps)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                got = self._augment(s, t, INF, level, it, eps)
                if got <= eps:
                    break
                total += got

    def source_side(self, s: int, eps: float = 0.0) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if not seen[v] and self.cap[e] > eps:
                    seen[v] = True
                    queue.append(v)
        return seen
