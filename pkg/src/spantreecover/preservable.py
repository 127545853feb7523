"""Preservable path systems and their tree sketches for one cluster.

Given a level-i cluster, its clustering ell levels down, an incoming highway
path pi, and optionally a designated subcluster pair, this module builds a
set of vertex-disjoint shortest paths touching every subcluster exactly once
(plus the inter-cluster edges gluing them together), and condenses it into
a sketch tree whose fake edges carry the fixed weight 10 * epsilon * mu^i.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graphs import INF, TOL, WeightedGraph, dijkstra, gt, leq
from .hpf import Hierarchy


@dataclass
class PreservableSet:
    """Vertex-disjoint paths: paths[highway] is pi; touch maps each
    clustering cluster to the unique path index that enters it."""

    paths: list[list[int]]
    highway: int
    touch: dict[int, int]
    inter_cluster: list[tuple[int, int]]
    # per path: ("highway" | "pair-main" | "pair-bridge" | "glue", origin rep)
    origins: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class SketchGraph:
    vertices: list[int]
    real_edges: list[tuple[int, int, float]]
    fake_edges: list[tuple[int, int, float]]
    inter_cluster: list[tuple[int, int, float]]
    scale: float
    _adj: dict[int, list[tuple[int, float]]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._adj:
            self._adj = {v: [] for v in self.vertices}
            for u, v, w in self.real_edges + self.fake_edges + self.inter_cluster:
                self._adj[u].append((v, w))
                self._adj[v].append((u, w))
            for lst in self._adj.values():
                lst.sort()

    @property
    def edge_count(self) -> int:
        return len(self.real_edges) + len(self.fake_edges) + len(self.inter_cluster)

    def distances(self, source: int) -> dict[int, float]:
        dist = {source: 0.0}
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u] + TOL:
                continue
            for v, w in self._adj[u]:
                nd = d + w
                if nd < dist.get(v, INF) - TOL:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist


def union_adjacency(
    g: WeightedGraph, members: frozenset[int], *paths: Iterable[int]
) -> dict[int, list[tuple[int, float]]]:
    """Adjacency of the induced subgraph on ``members`` plus the edges of the
    given paths (whose vertices may leave ``members``)."""
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in members}
    for v in members:
        for u, w, _ in g.adj[v]:
            if u in members:
                adj[v].append((u, w))
    for path in paths:
        seq = list(path)
        for a, b in zip(seq, seq[1:]):
            w = g.weight(a, b)
            adj.setdefault(a, []).append((b, w))
            adj.setdefault(b, []).append((a, w))
        for v in seq:
            adj.setdefault(v, [])
    for v in adj:
        adj[v] = sorted(set(adj[v]))
    return adj


def _sssp(adj: dict[int, list[tuple[int, float]]], source: int):
    """Deterministic single-source run over a dict adjacency."""
    dist = {source: 0.0}
    parent: dict[int, int] = {}
    done: set[int] = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done or d > dist[u] + TOL:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, INF) - TOL:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd <= dist.get(v, INF) + TOL and v not in done:
                if u < parent.get(v, math.inf):
                    parent[v] = u
    return dist, parent


def _extract(parent: dict[int, int], source: int, target: int) -> list[int]:
    out = [target]
    while out[-1] != source:
        out.append(parent[out[-1]])
    out.reverse()
    return out


def _path_to_set(
    adj: dict[int, list[tuple[int, float]]], source: int, targets: set[int]
) -> list[int]:
    """Shortest path from source to the nearest target (ties: smaller id)."""
    dist, parent = _sssp(adj, source)
    best = min(
        ((dist[t], t) for t in targets if t in dist), default=None
    )
    if best is None:
        raise ValueError("target set unreachable")
    return _extract(parent, source, best[1])


class PreservableError(AssertionError):
    pass


def build_preservable_set(
    g: WeightedGraph,
    hier: Hierarchy,
    cluster_id: int,
    level: int,
    ell: int,
    pi: list[int],
    pair: Optional[tuple[int, int]],
    mu_i: float,
    epsilon: float,
    cache: Optional[dict] = None,
) -> PreservableSet:
    """Step 1 routes the designated pair; Step 2 glues every remaining
    cluster onto the growing path system, one hierarchy level at a time.

    ``cache`` memoizes shortest paths that depend only on the hierarchy
    (pair paths and glue descents), which repeat across hierarchy copies.
    """
    if cache is None:
        cache = {}
    chat = hier.clusters[cluster_id].members
    if not set(pi) & chat and not any(
        g.has_edge(a, b) for a in pi for b in chat if a != b
    ):
        if not set(pi) & chat:
            raise ValueError("highway does not touch the cluster")
    isub = max(level - ell, 0)
    cof = {v: hier.cluster_at(v, isub) for v in chat}

    paths: list[list[int]] = [list(pi)]
    origins: list[tuple[str, int]] = [("highway", pi[0])]
    touch: dict[int, int] = {}
    onpath: set[int] = set(pi)
    inter: list[tuple[int, int]] = []

    def register(idx: int) -> None:
        for v in paths[idx]:
            c = cof.get(v)
            if c is not None and c not in touch:
                touch[c] = idx

    def add_path(seq: list[int], kind: str, rep: int) -> None:
        paths.append(list(seq))
        origins.append((kind, rep))
        onpath.update(seq)
        register(len(paths) - 1)

    def add_inter(a: int, b: int) -> None:
        e = (min(a, b), max(a, b))
        if e not in inter:
            inter.append(e)

    register(0)
    c_pi = {cof[v] for v in pi if v in cof}

    if pair is not None:
        c1, c2 = hier.clusters[pair[0]], hier.clusters[pair[1]]
        if not (c1.members <= chat and c2.members <= chat):
            raise ValueError("pair clusters not inside the cluster")
        x, y = c1.representative, c2.representative
        pkey = ("pair", cluster_id, pair)
        pxy = cache.get(pkey)
        if pxy is None:
            spt = dijkstra(g, x, restrict=chat)
            pxy = spt.path_to(y)
            cache[pkey] = pxy
        c_pxy = {cof[v] for v in pxy}
        if c_pxy.isdisjoint(c_pi):
            uadj = union_adjacency(g, chat, pi)
            pprime = _path_to_set(uadj, x, set(pi))
            j2 = next(
                t
                for t, v in enumerate(pprime)
                if cof.get(v) in c_pi or v in set(pi)
            )
            j1 = max(t for t in range(j2 + 1) if cof.get(pprime[t]) in c_pxy)
            bridge = pprime[j1 + 1 : j2]
            add_path(pxy, "pair-main", x)
            if bridge:
                add_path(bridge, "pair-bridge", x)
            add_inter(pprime[j1], pprime[j1 + 1])
            add_inter(pprime[j2 - 1], pprime[j2])
        else:
            pi_verts = set(pi)
            j3 = next(
                t for t, v in enumerate(pxy) if cof.get(v) in c_pi or v in pi_verts
            )
            prefix = pxy[:j3]
            c_prefix = {cof[v] for v in prefix}
            stop = c_pi | c_prefix
            j4 = max(
                t for t, v in enumerate(pxy) if cof.get(v) in stop or v in pi_verts
            )
            suffix = pxy[j4 + 1 :]
            if prefix:
                add_path(prefix, "pair-main", x)
                add_inter(pxy[j3 - 1], pxy[j3])
            if suffix:
                add_path(suffix, "pair-main", y)
                add_inter(pxy[j4], pxy[j4 + 1])

    def glue(seq: list[int], rep: int) -> None:
        stop = next(
            (t for t, v in enumerate(seq) if cof.get(v) in touch or v in onpath),
            None,
        )
        if stop is None:
            raise PreservableError(f"glue path never meets the system: {seq}")
        if stop == 0:
            return
        add_path(seq[:stop], "glue", rep)
        add_inter(seq[stop - 1], seq[stop])

    # first iteration: the cluster's own representative reaches pi
    r0 = hier.clusters[cluster_id].representative
    uadj = union_adjacency(g, chat, pi)
    glue(_path_to_set(uadj, r0, set(pi)), r0)

    for j in range(level - 1, isub - 1, -1):
        sub_ids = sorted({hier.cluster_at(v, j) for v in chat})
        for did in sub_ids:
            d = hier.clusters[did]
            pid = hier.cluster_at(d.representative, j + 1)
            p = hier.clusters[pid]
            r, rp = d.representative, p.representative
            if r == rp and (cof.get(r) in touch or r in onpath):
                continue
            gkey = ("glue", did)
            seq = cache.get(gkey)
            if seq is None:
                spt = dijkstra(g, r, restrict=p.members & chat | {r, rp})
                seq = spt.path_to(rp)
                cache[gkey] = seq
            glue(seq, r)

    return PreservableSet(paths, 0, touch, inter, origins)


def build_sketch_graph(
    g: WeightedGraph,
    pset: PreservableSet,
    hier: Hierarchy,
    cluster_id: int,
    level: int,
    ell: int,
    mu_i: float,
    epsilon: float,
) -> SketchGraph:
    """Condense the path system into a tree: path and inter-cluster edges
    stay real; off-path vertices hang by a fake edge of weight exactly
    10 * epsilon * mu^i from the nearest on-path vertex of their cluster.
    """
    chat = hier.clusters[cluster_id].members
    isub = max(level - ell, 0)
    verts = sorted(chat | {v for p in pset.paths for v in p})
    onpath = {v for p in pset.paths for v in p}

    real: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for p in pset.paths:
        for a, b in zip(p, p[1:]):
            e = (min(a, b), max(a, b))
            if e not in seen:
                seen.add(e)
                real.append((e[0], e[1], g.weight(a, b)))
    inter = [(a, b, g.weight(a, b)) for a, b in pset.inter_cluster]

    fake: list[tuple[int, int, float]] = []
    wfake = 10.0 * epsilon * mu_i
    sub_ids = sorted({hier.cluster_at(v, isub) for v in chat})
    for cid in sub_ids:
        members = hier.clusters[cid].members
        if cid not in pset.touch:
            raise ValueError(f"cluster {cid} has no touching path")
        path = pset.paths[pset.touch[cid]]
        anchors = sorted(set(path) & members)
        off = sorted(members - onpath)
        if not off:
            continue
        adj = union_adjacency(g, members, path)
        best: dict[int, tuple[float, int]] = {}
        for a in anchors:
            dist, _ = _sssp(adj, a)
            for v in off:
                if v in dist and (v not in best or (dist[v], a) < best[v]):
                    best[v] = (dist[v], a)
        for v in off:
            if v not in best:
                raise ValueError(f"vertex {v} cannot reach its cluster path")
            fake.append((v, best[v][1], wfake))
    return SketchGraph(verts, real, fake, inter, mu_i)


def verify_preservable_set(
    g: WeightedGraph,
    pset: PreservableSet,
    hier: Hierarchy,
    cluster_id: int,
    level: int,
    ell: int,
) -> None:
    """Assert the structural path-system properties."""
    chat = hier.clusters[cluster_id].members
    isub = max(level - ell, 0)
    sub_ids = sorted({hier.cluster_at(v, isub) for v in chat})
    # pairwise vertex-disjoint
    seen: dict[int, int] = {}
    for idx, p in enumerate(pset.paths):
        assert len(set(p)) == len(p), f"path {idx} revisits a vertex"
        for v in p:
            assert v not in seen, f"vertex {v} on paths {seen[v]} and {idx}"
            seen[v] = idx
    # exactly-one-touch, recomputed from scratch
    for cid in sub_ids:
        touching = [
            idx
            for idx, p in enumerate(pset.paths)
            if set(p) & hier.clusters[cid].members
        ]
        assert len(touching) == 1, f"cluster {cid} touched by {touching}"
        assert pset.touch[cid] == touching[0]
    assert pset.paths[pset.highway] is pset.paths[0]
    # each path is shortest in G[C] union itself, for every touched cluster C
    for idx, p in enumerate(pset.paths):
        if len(p) < 2:
            continue
        plen = sum(g.weight(a, b) for a, b in zip(p, p[1:]))
        for cid in sub_ids:
            members = hier.clusters[cid].members
            if not set(p) & members:
                continue
            adj = union_adjacency(g, members, p)
            dist, _ = _sssp(adj, p[0])
            assert abs(dist[p[-1]] - plen) <= TOL, (
                f"path {idx} not shortest within cluster {cid}"
            )
    # inter-cluster edges are real edges crossing clusters (or reaching pi
    # vertices outside the cluster)
    cof = {v: hier.cluster_at(v, isub) for v in chat}
    for a, b in pset.inter_cluster:
        assert g.has_edge(a, b), f"inter-cluster edge ({a},{b}) not in graph"
        assert cof.get(a) != cof.get(b) or (a not in cof or b not in cof)


def verify_preservable_lemma(
    g: WeightedGraph,
    sketch: SketchGraph,
    pset: PreservableSet,
    hier: Hierarchy,
    cluster_id: int,
    level: int,
    ell: int,
    pair: Optional[tuple[int, int]],
    mu_i: float,
    epsilon: float,
    theory_mode: bool = False,
    dist_full=None,
) -> dict:
    """Check the sketch-tree guarantees; returns a report of measurements.

    ``dist_full`` (optional apsp matrix) short-circuits the in-cluster
    distance oracle when the cluster is the whole graph.
    """
    import numpy as np

    from .oracle import TreeOracle

    chat = hier.clusters[cluster_id].members
    isub = max(level - ell, 0)
    report: dict = {}

    # tree-ness
    nv, ne = len(sketch.vertices), sketch.edge_count
    assert ne == nv - 1, f"sketch has {ne} edges over {nv} vertices"
    root = sketch.vertices[0]
    dist0 = sketch.distances(root)
    assert len(dist0) == nv, "sketch disconnected"
    report["is_tree"] = True

    # LCA oracle over the (relabeled) sketch tree for bulk distance queries
    index = {v: i for i, v in enumerate(sketch.vertices)}
    sk_edges = [
        (index[u], index[v])
        for u, v, _ in sketch.real_edges + sketch.fake_edges + sketch.inter_cluster
    ]
    sk_graph = WeightedGraph(
        nv,
        [
            (min(index[u], index[v]), max(index[u], index[v]), w)
            for u, v, w in sketch.real_edges + sketch.fake_edges + sketch.inter_cluster
        ],
    )
    tor = TreeOracle(nv, sk_edges, 0, sk_graph)

    def pairwise_max(ids: np.ndarray) -> float:
        iu, iv = np.triu_indices(len(ids), k=1)
        if len(iu) == 0:
            return 0.0
        return float(tor.dist_many(ids[iu], ids[iv]).max())

    def ids_of(verts) -> np.ndarray:
        return np.asarray([index[x] for x in verts], dtype=np.int64)

    # same-cluster bound, every cluster (one batched query over all pairs)
    us: list[int] = []
    vs: list[int] = []
    for cid in sorted({hier.cluster_at(v, isub) for v in chat}):
        members = sorted(hier.clusters[cid].members)
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                us.append(index[a])
                vs.append(index[b])
    worst_same = 0.0
    if us:
        worst_same = float(
            tor.dist_many(
                np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
            ).max()
        )
    report["max_same_cluster"] = worst_same
    assert leq(worst_same, 21.0 * epsilon * mu_i), (
        f"same-cluster distance {worst_same} > 21 eps mu^i"
    )

    # pair bound
    if pair is not None:
        m1 = sorted(hier.clusters[pair[0]].members)
        m2 = sorted(hier.clusters[pair[1]].members)
        slack = 44.0 * epsilon * mu_i
        whole = len(chat) == g.n and dist_full is not None
        i1, i2 = ids_of(m1), ids_of(m2)
        dh = tor.dist_many(
            np.repeat(i1, len(m2)), np.tile(i2, len(m1))
        ).reshape(len(m1), len(m2))
        din = np.empty_like(dh)
        for r, x in enumerate(m1):
            src = dist_full[x] if whole else dijkstra(g, x, restrict=chat).dist
            din[r] = [src[y] for y in m2]
        worst_gap = float((dh - din).max())
        report["pair_gap"] = worst_gap
        assert leq(worst_gap, slack), f"pair gap {worst_gap} > 44 eps mu^i"

    # diameter ratio (asserted only under theory-coupled parameters)
    worst = pairwise_max(ids_of(sorted(chat)))
    report["diam_ratio"] = worst / mu_i
    if theory_mode:
        assert leq(worst, 10.0 * mu_i), f"sketch diameter {worst} > 10 mu^i"

    # glue monotonicity: clusters touched by a glued path stay near pi
    pi_verts = sorted(set(pset.paths[pset.highway]))
    allv = sketch.vertices
    pids, aids = ids_of(pi_verts), ids_of(allv)
    near = (
        tor.dist_many(np.repeat(pids, len(aids)), np.tile(aids, len(pids)))
        .reshape(len(pids), len(aids))
        .min(axis=0)
    )
    near_pi = {v: float(near[i]) for i, v in enumerate(allv)}
    for idx, (kind, rep) in enumerate(pset.origins):
        if kind != "glue":
            continue
        bound = near_pi[rep] + 10.0 * epsilon * mu_i
        for v in pset.paths[idx]:
            if v not in chat:
                continue
            cid = hier.cluster_at(v, isub)
            for u in hier.clusters[cid].members:
                assert leq(near_pi[u], bound), (
                    f"glue monotonicity broken at vertex {u}"
                )
    report["glue_ok"] = True
    return report
