"""Spanning tree covers with (1 + eps) stretch for preserved pairs.

The recursion turns one hierarchy copy and one top level into a spanning
tree: each cluster builds its preservable path system, children recurse with
their touching path as the incoming highway, and the inter-cluster edges
stitch the child trees together. The top-level driver emits one tree per
(hierarchy copy, level offset) and carries verification hooks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graphs import TOL, WeightedGraph, apsp, dijkstra, greedy_spanner, leq, mst_weight
from .hpf import HPFamily, HierarchyCopy, build_hpf, make_pair_preserving
from .oracle import TreeOracle
from .preservable import (
    build_preservable_set,
    build_sketch_graph,
    verify_preservable_lemma,
    verify_preservable_set,
)


@dataclass
class SpanningTree:
    edges: list[tuple[int, int]]  # (u, v) with u < v, sorted
    root: int
    provenance: tuple[int, int]  # (hierarchy copy index, top level)

    def weight(self, g: WeightedGraph) -> float:
        return sum(g.weight(u, v) for u, v in self.edges)

    def max_degree(self) -> int:
        deg: dict[int, int] = {}
        for u, v in self.edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        return max(deg.values(), default=0)


@dataclass
class CoverConfig:
    epsilon: float = 0.25
    mu: float = 6.0
    rho: float = 24.0
    eta: float = 1.0
    mode: str = "demand"  # demand | exhaustive | theory
    pairs: Optional[list[tuple[int, int]]] = None
    seed: int = 42
    sample_size: int = 10_000
    check: bool = True
    theory_mode: bool = False

    def validate(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.mu < 2:
            raise ValueError("mu must be at least 2")
        if self.mode not in ("demand", "exhaustive", "theory"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "theory" and (self.rho < 24 or self.eta < 5):
            raise ValueError("theory mode requires rho >= 24 and eta >= 5")


@dataclass
class TreeCover:
    trees: list[SpanningTree]
    params: dict
    scale: float
    hpf: HPFamily = field(repr=False, default=None)
    diagnostics: dict = field(default_factory=dict)
    _oracles: Optional[list[TreeOracle]] = field(default=None, repr=False)

    def tree_oracles(self, g: WeightedGraph) -> list[TreeOracle]:
        if self._oracles is None:
            self._oracles = [TreeOracle(g.n, t.edges, t.root, g) for t in self.trees]
        return self._oracles


def default_demand_pairs(
    g: WeightedGraph, seed: int, sample_size: int = 10_000, cap: int = 512
) -> list[tuple[int, int]]:
    """All pairs up to the cap; above it, a seeded sample plus every edge."""
    if g.n <= cap:
        return [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
    import numpy as np

    rng = np.random.default_rng(seed)
    pairs = {(min(u, v), max(u, v)) for u, v, _ in g.edges}
    sample_size = min(sample_size, g.n * (g.n - 1) // 2)
    while len(pairs) < sample_size:
        u, v = int(rng.integers(g.n)), int(rng.integers(g.n))
        if u != v:
            pairs.add((min(u, v), max(u, v)))
    return sorted(pairs)


def path_preserving_tree(
    g: WeightedGraph,
    copy: HierarchyCopy,
    cluster_id: int,
    level: int,
    pi: list[int],
    ell: int,
    mu: float,
    epsilon: float,
    check: bool = True,
    theory_mode: bool = False,
    diagnostics: Optional[dict] = None,
    memo: Optional[dict] = None,
    dist_full=None,
    path_cache: Optional[dict] = None,
) -> tuple[set[tuple[int, int]], set[int]]:
    """Spanning tree of G[cluster] union pi, as (edge set, vertex set).

    ``memo`` caches finished subtrees across hierarchy copies: two copies
    that agree on the incoming highway and on every pair assigned inside the
    subtree produce identical trees, which is the common case away from the
    one cluster whose pair distinguishes the copies.
    """
    hier = copy.base
    cluster = hier.clusters[cluster_id]
    if not pi:
        pi = [cluster.representative]
    if len(cluster.members) == 1:
        edges = {(min(a, b), max(a, b)) for a, b in zip(pi, pi[1:])}
        return edges, cluster.members | set(pi)

    memo_key = None
    if memo is not None:
        sig = tuple(
            sorted(
                (node, entry[:2])
                for node, entry in copy.pairs.items()
                if node[0] <= level
                and hier.clusters[node[1]].members <= cluster.members
            )
        )
        memo_key = (copy.base_index, cluster_id, level, tuple(pi), sig)
        hit = memo.get(memo_key)
        if hit is not None:
            return hit

    pair_entry = copy.pairs.get((level, cluster_id))
    pair = pair_entry[:2] if pair_entry else None
    mu_i = mu**level
    if path_cache is None:
        path_cache = {}
    pset = build_preservable_set(
        g, hier, cluster_id, level, ell, pi, pair, mu_i, epsilon,
        cache=path_cache.setdefault(copy.base_index, {}),
    )
    if check:
        verify_preservable_set(g, pset, hier, cluster_id, level, ell)
        sketch = build_sketch_graph(
            g, pset, hier, cluster_id, level, ell, mu_i, epsilon
        )
        report = verify_preservable_lemma(
            g, pset=pset, sketch=sketch, hier=hier, cluster_id=cluster_id,
            level=level, ell=ell, pair=pair, mu_i=mu_i, epsilon=epsilon,
            theory_mode=theory_mode, dist_full=dist_full,
        )
        if diagnostics is not None:
            diagnostics.setdefault("nodes_checked", 0)
            diagnostics["nodes_checked"] += 1
            diagnostics["max_diam_ratio"] = max(
                diagnostics.get("max_diam_ratio", 0.0), report["diam_ratio"]
            )

    edges: set[tuple[int, int]] = {
        (min(a, b), max(a, b)) for a, b in pset.inter_cluster
    }
    isub = max(level - ell, 0)
    for cid in sorted({hier.cluster_at(v, isub) for v in cluster.members}):
        sub_pi = pset.paths[pset.touch[cid]]
        sub_edges, _ = path_preserving_tree(
            g, copy, cid, isub, sub_pi, ell, mu, epsilon,
            check=check, theory_mode=theory_mode, diagnostics=diagnostics,
            memo=memo, dist_full=dist_full, path_cache=path_cache,
        )
        edges |= sub_edges

    verts = set(cluster.members) | {v for p in pset.paths for v in p}
    assert len(edges) == len(verts) - 1, (
        f"cluster {cluster_id}: {len(edges)} edges over {len(verts)} vertices"
    )
    if memo is not None:
        memo[memo_key] = (edges, verts)
    return edges, verts


def span_tree_cover(g: WeightedGraph, config: CoverConfig) -> TreeCover:
    """One spanning tree per (hierarchy copy, top-level offset)."""
    config.validate()
    gs, scale = g.rescaled()
    hpf = build_hpf(gs, config.mu, config.rho, config.eta)
    if config.mode == "exhaustive":
        demand: object = "exhaustive"
    else:
        demand = (
            config.pairs
            if config.pairs is not None
            else default_demand_pairs(gs, config.seed, config.sample_size)
        )
    pp = make_pair_preserving(hpf, config.epsilon, demand)

    trees: list[SpanningTree] = []
    diagnostics: dict = {}
    memo: dict = {}
    path_cache: dict = {}
    for copy_idx, copy in enumerate(pp.copies):
        for level in pp.top_tree_levels(copy.base_index):
            top = copy.base.levels[copy.base.i_max][0]
            edges, verts = path_preserving_tree(
                gs, copy, top, level, [], pp.ell, pp.mu, pp.epsilon,
                check=config.check, theory_mode=config.theory_mode,
                diagnostics=diagnostics, memo=memo, dist_full=pp.dist,
                path_cache=path_cache,
            )
            assert verts == set(range(g.n))
            trees.append(SpanningTree(sorted(edges), 0, (copy_idx, level)))

    params = {
        "epsilon": config.epsilon,
        "mu": config.mu,
        "rho": config.rho,
        "eta": config.eta,
        "mode": config.mode,
        "seed": config.seed,
        "ell": pp.ell,
        "scale": scale,
        "num_hierarchies": len(pp.hierarchies),
        "num_copies": len(pp.copies),
    }
    cover = TreeCover(trees, params, scale, hpf=pp, diagnostics=diagnostics)
    verify_spanning(g, cover)
    return cover


def light_tree_cover(
    g: WeightedGraph, epsilon: float, config: Optional[CoverConfig] = None
) -> TreeCover:
    """Cover over the greedy spanner; trees inherit its lightness."""
    config = config or CoverConfig(epsilon=epsilon)
    config.epsilon = epsilon
    spanner = greedy_spanner(g, epsilon)
    cover = span_tree_cover(spanner, config)
    mst = mst_weight(g)
    weights = [t.weight(g) for t in cover.trees]
    cover.params["spanner_edges"] = spanner.m
    cover.params["spanner_lightness"] = spanner.total_weight() / mst
    cover.params["individual_lightness"] = max(weights) / mst
    cover.params["collective_lightness"] = sum(weights) / mst
    return cover


def cover_stretch(
    g: WeightedGraph, cover: TreeCover, pairs: Iterable[tuple[int, int]]
) -> dict:
    """Min-over-trees stretch per pair, with max/mean summary."""
    import numpy as np

    oracles = cover.tree_oracles(g)
    pairs = [(min(u, v), max(u, v)) for u, v in pairs if u != v]
    sources = sorted({u for u, _ in pairs})
    dist = {s: dijkstra(g, s).dist for s in sources}
    us = np.asarray([u for u, _ in pairs], dtype=np.int64)
    vs = np.asarray([v for _, v in pairs], dtype=np.int64)
    best = np.full(len(pairs), math.inf)
    best_idx = np.full(len(pairs), -1, dtype=np.int64)
    for idx, t in enumerate(oracles):
        d = t.dist_many(us, vs)
        take = d < best - 1e-12
        best[take] = d[take]
        best_idx[take] = idx
    table = [
        (u, v, float(best[i]) / dist[u][v], int(best_idx[i]))
        for i, (u, v) in enumerate(pairs)
    ]
    ratios = [r for _, _, r, _ in table]
    return {
        "max": max(ratios),
        "mean": sum(ratios) / len(ratios),
        "table": table,
    }


def pair_guarantee_report(g: WeightedGraph, cover: TreeCover) -> dict:
    """Check the additive guarantee for every demanded pair's assignment:
    min-tree distance <= in-cluster distance + 44 eps mu^i (scaled units)."""
    import numpy as np

    pp = cover.hpf
    oracles = cover.tree_oracles(g)
    scale = cover.scale
    worst = -math.inf
    failures = []
    recs = pp.pair_records
    if recs:
        us = np.asarray([r.u for r in recs], dtype=np.int64)
        vs = np.asarray([r.v for r in recs], dtype=np.int64)
        best = np.full(len(recs), math.inf)
        for t in oracles:
            best = np.minimum(best, t.dist_many(us, vs))
        best *= scale
        for i, rec in enumerate(recs):
            bound = rec.d_in_cluster + 44.0 * pp.epsilon * pp.mu**rec.level
            gap = float(best[i]) - bound
            worst = max(worst, gap)
            if gap > TOL:
                failures.append((rec.u, rec.v, float(best[i]), bound))
    return {
        "pairs_checked": len(pp.pair_records),
        "unresolved": list(pp.unresolved_pairs),
        "worst_gap": worst,
        "failures": failures,
    }


def verify_spanning(g: WeightedGraph, cover: TreeCover) -> dict:
    """Assert every tree is a spanning tree using only graph edges."""
    for idx, t in enumerate(cover.trees):
        for u, v in t.edges:
            assert g.has_edge(u, v), f"tree {idx}: edge ({u},{v}) not in graph"
        assert len(t.edges) == g.n - 1, (
            f"tree {idx}: {len(t.edges)} edges, expected {g.n - 1}"
        )
        parent = list(range(g.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in t.edges:
            ru, rv = find(u), find(v)
            assert ru != rv, f"tree {idx}: cycle at edge ({u},{v})"
            parent[rv] = ru
    return {"trees": len(cover.trees), "spanning": True}


def save_cover(cover: TreeCover, path: str) -> None:
    doc = {
        "version": 1,
        "params": cover.params,
        "trees": [
            {
                "provenance": list(t.provenance),
                "root": t.root,
                "edges": [[u, v] for u, v in t.edges],
            }
            for t in cover.trees
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_cover(path: str) -> TreeCover:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    trees = [
        SpanningTree(
            [tuple(e) for e in t["edges"]], t["root"], tuple(t["provenance"])
        )
        for t in doc["trees"]
    ]
    return TreeCover(trees, doc["params"], doc["params"].get("scale", 1.0))


def cover_stats(g: WeightedGraph, cover: TreeCover, pairs=None) -> dict:
    pairs = pairs or default_demand_pairs(g, int(cover.params.get("seed", 42)))
    stretch = cover_stretch(g, cover, pairs)
    mst = mst_weight(g)
    weights = [t.weight(g) for t in cover.trees]
    return {
        "num_trees": len(cover.trees),
        "max_stretch": stretch["max"],
        "mean_stretch": stretch["mean"],
        "individual_lightness": max(weights) / mst,
        "collective_lightness": sum(weights) / mst,
        "max_tree_degree": max(t.max_degree() for t in cover.trees),
    }
