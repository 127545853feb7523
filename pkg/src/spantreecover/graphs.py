"""Weighted-graph core: storage, I/O, shortest paths, spanners, nets, generators.

Graphs are undirected with positive edge weights. Vertices are 0..n-1.
All algorithms here are deterministic: ties on equal float keys are broken
by vertex id and then edge id, with a fixed absolute tolerance.
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

TOL = 1e-9

DEFAULT_APSP_CAP = 2000
APSP_CAP_ENV = "TREECOVER_APSP_CAP"

INF = math.inf


def gt(a: float, b: float) -> bool:
    """Strictly greater under the global tolerance."""
    return a > b + TOL


def leq(a: float, b: float) -> bool:
    """Less-or-equal under the global tolerance."""
    return a <= b + TOL


def close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL


class GraphFormatError(ValueError):
    """Base class for graph-file parse and validation failures."""


class MalformedLineError(GraphFormatError):
    pass


class NonpositiveWeightError(GraphFormatError):
    pass


class DuplicateEdgeError(GraphFormatError):
    pass


class DisconnectedGraphError(GraphFormatError):
    pass


@dataclass
class WeightedGraph:
    """Undirected weighted graph with stable edge ids.

    ``edges[k] = (u, v, w)`` with u < v; ``adj[u]`` lists ``(v, w, k)``.
    """

    n: int
    edges: list[tuple[int, int, float]]
    adj: list[list[tuple[int, float, int]]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self.adj:
            self.adj = [[] for _ in range(self.n)]
            for k, (u, v, w) in enumerate(self.edges):
                self.adj[u].append((v, w, k))
                self.adj[v].append((u, w, k))
        self._weight = {}
        for u, v, w in self.edges:
            self._weight[(u, v)] = w
            self._weight[(v, u)] = w

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self, u: int, v: int) -> float:
        return self._weight[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._weight

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def min_weight(self) -> float:
        return min(w for _, _, w in self.edges) if self.edges else 1.0

    def rescaled(self) -> tuple["WeightedGraph", float]:
        """Scale weights so the minimum edge weight is exactly 1.

        Returns (scaled graph, scale factor s) with w' = s * w.
        """
        wmin = self.min_weight()
        s = 1.0 / wmin
        g = WeightedGraph(self.n, [(u, v, w * s) for u, v, w in self.edges])
        return g, s


def validate_graph(n: int, edges: list[tuple[int, int, float]]) -> WeightedGraph:
    seen: set[tuple[int, int]] = set()
    norm: list[tuple[int, int, float]] = []
    for u, v, w in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise MalformedLineError(f"vertex out of range in edge ({u}, {v})")
        if u == v:
            raise MalformedLineError(f"self-loop at vertex {u}")
        if w <= 0:
            raise NonpositiveWeightError(f"edge ({u}, {v}) has weight {w} <= 0")
        a, b = (u, v) if u < v else (v, u)
        if (a, b) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({a}, {b})")
        seen.add((a, b))
        norm.append((a, b, float(w)))
    g = WeightedGraph(n, norm)
    if n > 0 and not _connected(g):
        raise DisconnectedGraphError("graph is not connected")
    return g


def _connected(g: WeightedGraph) -> bool:
    if g.n == 0:
        return True
    seen = [False] * g.n
    stack = [0]
    seen[0] = True
    cnt = 1
    while stack:
        u = stack.pop()
        for v, _, _ in g.adj[u]:
            if not seen[v]:
                seen[v] = True
                cnt += 1
                stack.append(v)
    return cnt == g.n


def load_graph(path: str) -> WeightedGraph:
    """Read the text format: header ``n m``, then m lines ``u v w``.

    Blank lines and ``#`` comments are skipped.
    """
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append(line.split())
    if not rows:
        raise MalformedLineError("empty graph file")
    if len(rows[0]) != 2:
        raise MalformedLineError(f"bad header: {' '.join(rows[0])!r}")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
    except ValueError as exc:
        raise MalformedLineError(f"bad header: {' '.join(rows[0])!r}") from exc
    if len(rows) - 1 != m:
        raise MalformedLineError(f"expected {m} edge lines, found {len(rows) - 1}")
    edges: list[tuple[int, int, float]] = []
    for parts in rows[1:]:
        if len(parts) != 3:
            raise MalformedLineError(f"bad edge line: {' '.join(parts)!r}")
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise MalformedLineError(f"bad edge line: {' '.join(parts)!r}") from exc
        edges.append((u, v, w))
    return validate_graph(n, edges)


def save_graph(g: WeightedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v, w in g.edges:
            fh.write(f"{u} {v} {w!r}\n")


@dataclass
class ShortestPathTree:
    """Result of a single-source run: distances plus deterministic parents."""

    source: int
    dist: list[float]
    parent: list[int]
    parent_edge: list[int]

    def path_to(self, v: int) -> list[int]:
        """Vertex sequence source..v; raises if v is unreachable."""
        if self.dist[v] == INF:
            raise ValueError(f"vertex {v} not reached from {self.source}")
        out = [v]
        while out[-1] != self.source:
            out.append(self.parent[out[-1]])
        out.reverse()
        return out


def dijkstra(
    g: WeightedGraph,
    source: int,
    restrict: Optional[Iterable[int]] = None,
    cutoff: float = INF,
) -> ShortestPathTree:
    """Single-source shortest paths with deterministic tie-breaking.

    When two paths to v tie in length (within tolerance), the parent with the
    smaller vertex id wins, then the smaller edge id. ``restrict`` limits the
    search to an induced vertex subset (which must contain the source).
    ``cutoff`` stops expansion beyond that distance.
    """
    allowed = None if restrict is None else (restrict if isinstance(restrict, (set, frozenset)) else set(restrict))
    if allowed is not None and source not in allowed:
        raise ValueError("source outside restriction set")
    dist = [INF] * g.n
    parent = [-1] * g.n
    pedge = [-1] * g.n
    dist[source] = 0.0
    done = [False] * g.n
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d > dist[u] + TOL:
            continue
        done[u] = True
        if d > cutoff + TOL:
            continue
        for v, w, k in g.adj[u]:
            if allowed is not None and v not in allowed:
                continue
            nd = d + w
            if nd < dist[v] - TOL:
                dist[v] = nd
                parent[v] = u
                pedge[v] = k
                heapq.heappush(heap, (nd, v))
            elif nd <= dist[v] + TOL and not done[v]:
                # equal-length alternative: keep the lexicographically
                # smallest (parent id, edge id)
                if (u, k) < (parent[v], pedge[v]):
                    parent[v] = u
                    pedge[v] = k
    return ShortestPathTree(source, dist, parent, pedge)


def shortest_path(
    g: WeightedGraph, u: int, v: int, restrict: Optional[Iterable[int]] = None
) -> tuple[list[int], float]:
    spt = dijkstra(g, u, restrict=restrict)
    return spt.path_to(v), spt.dist[v]


def apsp(g: WeightedGraph, cap: Optional[int] = None) -> np.ndarray:
    """All-pairs distance matrix via n single-source runs.

    Refuses graphs above the cap (env ``TREECOVER_APSP_CAP``, default 2000).
    """
    if cap is None:
        cap = int(os.environ.get(APSP_CAP_ENV, DEFAULT_APSP_CAP))
    if g.n > cap:
        raise ValueError(f"graph has {g.n} vertices, above the all-pairs cap {cap}")
    out = np.full((g.n, g.n), INF)
    for s in range(g.n):
        out[s, :] = dijkstra(g, s).dist
    return out


class _DSU:
    def __init__(self, n: int) -> None:
        self.p = list(range(n))

    def find(self, x: int) -> int:
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.p[rb] = ra
        return True


def mst_weight(g: WeightedGraph) -> float:
    """Total weight of a minimum spanning tree (Kruskal, ties by edge id)."""
    dsu = _DSU(g.n)
    total = 0.0
    for k in sorted(range(g.m), key=lambda k: (g.edges[k][2], k)):
        u, v, w = g.edges[k]
        if dsu.union(u, v):
            total += w
    return total


def greedy_spanner(g: WeightedGraph, epsilon: float) -> WeightedGraph:
    """Greedy (1+epsilon)-spanner: scan edges by weight, keep an edge only
    if the spanner built so far does not already give stretch 1+epsilon.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    order = sorted(range(g.m), key=lambda k: (g.edges[k][2], k))
    sp_adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
    kept: list[tuple[int, int, float]] = []
    for k in order:
        u, v, w = g.edges[k]
        bound = (1.0 + epsilon) * w
        if _sp_dist(sp_adj, u, v, bound) <= bound + TOL:
            continue
        kept.append((u, v, w))
        sp_adj[u].append((v, w))
        sp_adj[v].append((u, w))
    kept.sort(key=lambda e: (e[0], e[1]))
    return WeightedGraph(g.n, kept)


def _sp_dist(adj: list[list[tuple[int, float]]], s: int, t: int, cutoff: float) -> float:
    """Dijkstra on a plain adjacency list, stopping past cutoff or at t."""
    dist = {s: 0.0}
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, INF) + TOL:
            continue
        if u == t:
            return d
        if d > cutoff + TOL:
            return INF
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, INF) - TOL:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist.get(t, INF)


def greedy_net(
    g: WeightedGraph,
    candidates: Sequence[int],
    base: Sequence[int],
    t: float,
) -> list[int]:
    """Extend ``base`` to a t-net greedily over ``candidates`` in id order.

    A candidate joins iff its graph distance to every current member exceeds t.
    Returns the full member list (base followed by additions).
    """
    members = list(base)
    dmin = [INF] * g.n
    for b in members:
        spt = dijkstra(g, b, cutoff=t)
        for v in range(g.n):
            if spt.dist[v] < dmin[v]:
                dmin[v] = spt.dist[v]
    for c in sorted(candidates):
        if gt(dmin[c], t):
            members.append(c)
            spt = dijkstra(g, c, cutoff=t)
            for v in range(g.n):
                if spt.dist[v] < dmin[v]:
                    dmin[v] = spt.dist[v]
    return members


def generate(kind: str, params: dict, seed: int = 0) -> WeightedGraph:
    """Named test-instance families, deterministic in (params, seed)."""
    if kind == "path":
        n = int(params["n"])
        return WeightedGraph(n, [(i, i + 1, 1.0) for i in range(n - 1)])
    if kind == "uniform_line":
        n = int(params["n"])
        return WeightedGraph(n, [(i, i + 1, 1.0) for i in range(n - 1)])
    if kind == "grid":
        k = int(params["k"])
        edges = []
        for r in range(k):
            for c in range(k):
                u = r * k + c
                if c + 1 < k:
                    edges.append((u, u + 1, 1.0))
                if r + 1 < k:
                    edges.append((u, u + k, 1.0))
        return WeightedGraph(k * k, edges)
    if kind == "star_exponential":
        n = int(params["n"])
        return WeightedGraph(n, [(0, i, float(2 ** (i - 1))) for i in range(1, n)])
    if kind == "random_geometric":
        return _random_geometric(
            int(params["n"]),
            int(params.get("dim", 2)),
            params.get("radius"),
            seed,
        )
    raise ValueError(f"unknown generator kind {kind!r}")


def _random_geometric(
    n: int, dim: int, radius: Optional[float], seed: int
) -> WeightedGraph:
    rng = np.random.default_rng(seed)
    r = radius if radius is not None else 1.8 * (math.log(max(n, 2)) / n) ** (1.0 / dim)
    for _ in range(200):
        pts = rng.random((n, dim))
        edges = []
        for i in range(n):
            d = np.sqrt(((pts[i + 1 :] - pts[i]) ** 2).sum(axis=1))
            for off in np.nonzero(d <= r)[0]:
                edges.append((i, i + 1 + int(off), float(d[off])))
        g = WeightedGraph(n, edges)
        if _connected(g) and g.m > 0:
            return g
        r *= 1.2
    raise RuntimeError("could not draw a connected geometric graph")
