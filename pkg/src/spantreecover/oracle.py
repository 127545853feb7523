"""Distance oracle over a tree cover: exact per-tree LCA queries, min-over-
trees estimates, and path reporting by parent climbs in the argmin tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graphs import WeightedGraph


class TreeOracle:
    """Euler tour + sparse-table RMQ: O(1) LCA and distance on one tree.

    Edges are (u, v) pairs; weights come from the host graph.
    """

    __slots__ = (
        "n", "root", "parent", "wdepth", "depth", "_first", "_tour", "_table", "_wd",
    )

    def __init__(
        self, n: int, edges: Sequence[tuple[int, int]], root: int, g: WeightedGraph
    ) -> None:
        self.n = n
        self.root = root
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        parent = [-1] * n
        wdepth = [0.0] * n
        depth = [0] * n
        tour: list[int] = []
        first = [-1] * n
        # iterative DFS emitting an Euler tour
        it = [0] * n
        visited = [False] * n
        visited[root] = True
        tour.append(root)
        first[root] = 0
        path = [root]
        while path:
            u = path[-1]
            advanced = False
            while it[u] < len(adj[u]):
                v = adj[u][it[u]]
                it[u] += 1
                if not visited[v]:
                    visited[v] = True
                    parent[v] = u
                    wdepth[v] = wdepth[u] + g.weight(u, v)
                    depth[v] = depth[u] + 1
                    path.append(v)
                    first[v] = len(tour)
                    tour.append(v)
                    advanced = True
                    break
            if not advanced:
                path.pop()
                if path:
                    tour.append(path[-1])
        assert all(f >= 0 for f in first), "tree does not span all vertices"
        self.parent = parent
        self.wdepth = wdepth
        self.depth = depth
        self._wd = np.asarray(wdepth)
        self._first = np.asarray(first, dtype=np.int64)
        tour_depth = np.asarray([depth[v] for v in tour], dtype=np.int64)
        tour_arr = np.asarray(tour, dtype=np.int64)
        m = len(tour)
        levels = max(1, m.bit_length())
        table = np.empty((levels, m), dtype=np.int64)
        table[0] = np.arange(m)
        k = 1
        while (1 << k) <= m:
            prev = table[k - 1]
            half = 1 << (k - 1)
            left = prev[: m - (1 << k) + 1]
            right = prev[half : half + m - (1 << k) + 1]
            take_right = tour_depth[right] < tour_depth[left]
            table[k, : m - (1 << k) + 1] = np.where(take_right, right, left)
            k += 1
        self._tour = tour_arr
        self._table = (table, tour_depth)

    def lca(self, u: int, v: int) -> int:
        a, b = int(self._first[u]), int(self._first[v])
        if a > b:
            a, b = b, a
        span = b - a + 1
        k = span.bit_length() - 1
        table, tour_depth = self._table
        i, j = table[k, a], table[k, b - (1 << k) + 1]
        best = i if tour_depth[i] <= tour_depth[j] else j
        return int(self._tour[best])

    def dist(self, u: int, v: int) -> float:
        w = self.lca(u, v)
        return self.wdepth[u] + self.wdepth[v] - 2.0 * self.wdepth[w]

    def dist_many(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorized tree distances for aligned vertex arrays."""
        table, tour_depth = self._table
        a = self._first[us]
        b = self._first[vs]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        span = hi - lo + 1
        k = np.frexp(span)[1].astype(np.int64) - 1
        i = table[k, lo]
        j = table[k, hi - np.left_shift(1, k) + 1]
        best = np.where(tour_depth[i] <= tour_depth[j], i, j)
        lca = self._tour[best]
        return self._wd[us] + self._wd[vs] - 2.0 * self._wd[lca]

    def path(self, u: int, v: int) -> list[int]:
        w = self.lca(u, v)
        up = [u]
        while up[-1] != w:
            up.append(self.parent[up[-1]])
        down = [v]
        while down[-1] != w:
            down.append(self.parent[down[-1]])
        return up + down[-2::-1]


@dataclass
class OracleIndex:
    trees: list[TreeOracle]
    params: dict = field(default_factory=dict)
    trees_touched: int = 0  # query-cost instrumentation


def build_oracle(g: WeightedGraph, cover) -> OracleIndex:
    trees = [TreeOracle(g.n, t.edges, t.root, g) for t in cover.trees]
    return OracleIndex(trees, dict(cover.params))


def query_distance(oracle: OracleIndex, u: int, v: int) -> tuple[float, int]:
    """Minimum tree distance and the (smallest) tree index achieving it."""
    if u == v:
        return 0.0, 0
    best, best_idx = None, -1
    for idx, t in enumerate(oracle.trees):
        oracle.trees_touched += 1
        d = t.dist(u, v)
        if best is None or d < best - 1e-12:
            best, best_idx = d, idx
    return best, best_idx


def query_path(
    oracle: OracleIndex, g: WeightedGraph, u: int, v: int
) -> tuple[list[int], float, int]:
    """Path in G realizing the estimate, via the argmin tree."""
    est, idx = query_distance(oracle, u, v)
    if u == v:
        return [u], 0.0, idx
    path = oracle.trees[idx].path(u, v)
    for a, b in zip(path, path[1:]):
        assert g.has_edge(a, b), f"tree edge ({a},{b}) missing from graph"
    return path, est, idx
