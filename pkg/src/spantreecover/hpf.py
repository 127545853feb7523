"""Hierarchical partition families with strong diameter and padding.

Pipeline: a greedy net hierarchy, a small family of hierarchies of subnets,
then level-by-level cluster aggregation around the subnet points. The result
is a family of hierarchical partitions in which every ball of radius
mu^i / rho is padded inside some level-i cluster of some hierarchy, checked
empirically rather than via worst-case constants. A second pass augments the
family with per-cluster subcluster-pair assignments (materialized as
hierarchy copies) so that demanded vertex pairs are preserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .graphs import TOL, WeightedGraph, apsp, dijkstra, greedy_net, gt, leq


@dataclass
class NetHierarchy:
    """Nested greedy nets N_0 .. N_L with N_0 = V and |N_L| = 1."""

    levels: list[list[int]]
    delta: list[float]
    mu: float
    eta: float


@dataclass
class SubnetFamily:
    """sigma hierarchies of subnets; subnets[j][i] is level i of hierarchy j."""

    sigma: int
    subnets: list[list[list[int]]]
    mu: float
    sigma_slack: int = 0  # max subsets actually needed during carving


@dataclass
class Cluster:
    id: int
    level: int
    members: frozenset[int]
    portal: int
    representative: int
    parent: Optional[int] = None
    children: list[int] = field(default_factory=list)
    diameter: float = 0.0  # measured strong diameter inside G[members]


@dataclass
class Hierarchy:
    """One hierarchical partition: level 0 singletons up to a single cluster."""

    clusters: dict[int, Cluster]
    levels: list[list[int]]  # cluster ids per level
    vmap: list[list[int]]  # per level, vertex -> cluster id
    i_max: int

    def cluster_at(self, v: int, level: int) -> int:
        """Cluster id containing v; levels above the top clamp to the top."""
        return self.vmap[min(level, self.i_max)][v]

    def level_clusters(self, level: int) -> list[int]:
        return self.levels[min(level, self.i_max)]


@dataclass
class PairRecord:
    """One demanded vertex pair and where it was preserved."""

    u: int
    v: int
    hierarchy: int
    copy: int
    level: int
    cluster: int
    sub1: int
    sub2: int
    rho_eff: float
    d_in_cluster: float


@dataclass
class HierarchyCopy:
    """A hierarchy copy: shares the base partition, owns pair assignments.

    ``pairs`` maps (level, cluster id) to (subcluster id, subcluster id,
    effective separation rho). Levels above base.i_max address the top
    cluster at virtual whole-graph levels.
    """

    base_index: int
    base: Hierarchy
    copy_index: int
    pairs: dict[tuple[int, int], tuple[int, int, float]]


@dataclass
class HPFamily:
    graph: WeightedGraph
    hierarchies: list[Hierarchy]
    mu: float
    rho: float
    eta: float
    nets: NetHierarchy
    subnets: SubnetFamily
    dist: np.ndarray = field(repr=False, default=None)
    epsilon: Optional[float] = None
    ell: Optional[int] = None
    copies: list[HierarchyCopy] = field(default_factory=list)
    pair_records: list[PairRecord] = field(default_factory=list)
    unresolved_pairs: list[tuple[int, int]] = field(default_factory=list)
    diameter_violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def i_top(self) -> int:
        return max(h.i_max for h in self.hierarchies)

    def top_tree_levels(self, hierarchy_index: int) -> list[int]:
        """Levels at which top-level trees are rooted: one per residue mod ell."""
        ell = self.ell or 1
        im = self.hierarchies[hierarchy_index].i_max
        return list(range(im, im + ell))


def offset_ell(mu: float, epsilon: float) -> int:
    """ceil(log_mu(1/epsilon)), at least 1."""
    return max(1, math.ceil(math.log(1.0 / epsilon) / math.log(mu) - 1e-12))


def build_net_hierarchy(g: WeightedGraph, mu: float, eta: float) -> NetHierarchy:
    """Greedy nets N_0 = V, N_i a (mu^i / 6 eta)-net of N_{i-1}, up to one point."""
    if mu < 2 or eta < 1:
        raise ValueError("need mu >= 2 and eta >= 1")
    levels = [sorted(range(g.n))]
    delta = [0.0]
    i = 0
    while len(levels[-1]) > 1:
        i += 1
        t = mu**i / (6.0 * eta)
        levels.append(greedy_net(g, levels[-1], [], t))
        delta.append(t)
    return NetHierarchy(levels, delta, mu, eta)


def build_subnet_family(
    g: WeightedGraph, nets: NetHierarchy, mu: float, dist: Optional[np.ndarray] = None
) -> SubnetFamily:
    """Split the net hierarchy into sigma hierarchical subnets (two passes).

    Pass 1 (top-down) distributes each net level into disjoint subsets that
    stay mu^i/3-separated, carrying parents down so subsets nest. Pass 2
    (bottom-up) completes each subset chain into genuine mu^i/3-nets.
    sigma comes from a packing pre-pass and placement is asserted.
    """
    d = dist if dist is not None else apsp(g)
    L = len(nets.levels) - 1
    sigma = 1
    for i in range(1, L + 1):
        r = mu**i / 3.0
        ni = nets.levels[i]
        for p in ni:
            cnt = sum(1 for q in ni if leq(d[p, q], r))
            sigma = max(sigma, cnt)

    # pass 1: top point seeds subset 0 only, keeping the subsets disjoint
    tilde: list[list[list[int]]] = [[[] for _ in range(L + 1)] for _ in range(sigma)]
    tilde[0][L] = list(nets.levels[L])
    used = 1
    for i in range(L - 1, -1, -1):
        r = mu**i / 3.0
        carried: set[int] = set()
        for j in range(sigma):
            tilde[j][i] = list(tilde[j][i + 1])
            carried.update(tilde[j][i])
        for p in sorted(set(nets.levels[i]) - carried):
            placed = False
            for j in range(sigma):
                if all(gt(d[p, q], r) for q in tilde[j][i]):
                    tilde[j][i].append(p)
                    placed = True
                    used = max(used, j + 1)
                    break
            assert placed, f"sigma pre-pass bound {sigma} insufficient at level {i}"

    # pass 2: complete each chain into nets, bottom-up
    subnets: list[list[list[int]]] = [[[] for _ in range(L + 1)] for _ in range(sigma)]
    for j in range(sigma):
        subnets[j][0] = sorted(range(g.n))
        for i in range(1, L + 1):
            subnets[j][i] = sorted(
                greedy_net(g, subnets[j][i - 1], sorted(tilde[j][i]), mu**i / 3.0)
            )
    return SubnetFamily(sigma, subnets, mu, sigma_slack=used)


def strong_diameter(g: WeightedGraph, members: frozenset[int]) -> float:
    """Max pairwise distance inside the induced subgraph (inf if disconnected)."""
    if len(members) <= 1:
        return 0.0
    worst = 0.0
    for s in sorted(members):
        spt = dijkstra(g, s, restrict=members)
        worst = max(worst, max(spt.dist[v] for v in members))
    return worst


def cluster_aggregation(
    g: WeightedGraph,
    clusters: Sequence[frozenset[int]],
    portals: Sequence[int],
    diams: Optional[Sequence[float]] = None,
) -> list[int]:
    """Assign every input cluster to a portal, preimages staying connected.

    Dijkstra forest on the cluster-adjacency graph: arc cost into a cluster is
    the best connecting edge weight plus that cluster's internal diameter;
    clusters holding a portal are seeds at cost zero.
    """
    if not portals:
        raise ValueError("portal set empty")
    if diams is None:
        diams = [strong_diameter(g, c) for c in clusters]
    cof = {}
    for idx, c in enumerate(clusters):
        for v in c:
            cof[v] = idx
    arc: dict[tuple[int, int], float] = {}
    for u, v, w in g.edges:
        a, b = cof[u], cof[v]
        if a == b:
            continue
        for x, y in ((a, b), (b, a)):
            key = (x, y)
            if key not in arc or w < arc[key]:
                arc[key] = w
    out_arcs: list[list[tuple[int, float]]] = [[] for _ in clusters]
    for (a, b), w in arc.items():
        out_arcs[a].append((b, w + diams[b]))
    for lst in out_arcs:
        lst.sort()

    import heapq

    label = [-1] * len(clusters)
    heap: list[tuple[float, int, int]] = []
    for idx, c in enumerate(clusters):
        inside = sorted(p for p in portals if p in c)
        if inside:
            heapq.heappush(heap, (0.0, inside[0], idx))
    while heap:
        cost, portal, idx = heapq.heappop(heap)
        if label[idx] != -1:
            continue
        label[idx] = portal
        for nb, w in out_arcs[idx]:
            if label[nb] == -1:
                heapq.heappush(heap, (cost + w, portal, nb))
    assert all(p != -1 for p in label), "aggregation left a cluster unreached"
    return label


def aggregation_distortion(
    g: WeightedGraph,
    clusters: Sequence[frozenset[int]],
    portals: Sequence[int],
    assignment: Sequence[int],
) -> float:
    """Measured additive distortion: how much farther the assigned portal is
    inside the merged preimage than the nearest portal is in G.
    """
    pre: dict[int, set[int]] = {}
    for idx, c in enumerate(clusters):
        pre.setdefault(assignment[idx], set()).update(c)
    near = [math.inf] * g.n
    for p in portals:
        spt = dijkstra(g, p)
        for v in range(g.n):
            near[v] = min(near[v], spt.dist[v])
    worst = 0.0
    for portal, verts in sorted(pre.items()):
        spt = dijkstra(g, portal, restrict=verts)
        for v in verts:
            worst = max(worst, spt.dist[v] - near[v])
    return worst


def build_hpf(
    g: WeightedGraph,
    mu: float,
    rho: float,
    eta: float,
    dist: Optional[np.ndarray] = None,
) -> HPFamily:
    """Build one hierarchy per subnet chain by repeated cluster aggregation."""
    d = dist if dist is not None else apsp(g)
    nets = build_net_hierarchy(g, mu, eta)
    subnets = build_subnet_family(g, nets, mu, dist=d)
    hierarchies = []
    diam_violations: list[tuple[int, int]] = []
    for j in range(subnets.sigma):
        hierarchies.append(
            _build_hierarchy(g, mu, subnets.subnets[j], j, diam_violations)
        )
    return HPFamily(
        g,
        hierarchies,
        mu,
        rho,
        eta,
        nets,
        subnets,
        dist=d,
        diameter_violations=diam_violations,
    )


def _build_hierarchy(
    g: WeightedGraph,
    mu: float,
    subnet_levels: list[list[int]],
    j: int,
    diam_violations: list[tuple[int, int]],
) -> Hierarchy:
    clusters: dict[int, Cluster] = {}
    next_id = 0
    level_ids: list[list[int]] = [[]]
    vmap: list[list[int]] = []
    for v in range(g.n):
        clusters[next_id] = Cluster(next_id, 0, frozenset([v]), v, v)
        level_ids[0].append(next_id)
        next_id += 1
    vmap.append(list(range(g.n)))

    L = len(subnet_levels) - 1
    i = 0
    while len(level_ids[i]) > 1:
        i += 1
        if i <= L:
            portals = subnet_levels[i]
        else:
            # net hierarchy exhausted before the partition reached one
            # cluster: keep coarsening with fresh mu^i/3-nets of the
            # previous portals
            portals = greedy_net(g, portals, [], mu**i / 3.0)
        prev_ids = level_ids[i - 1]
        prev = [clusters[c].members for c in prev_ids]
        diams = [clusters[c].diameter for c in prev_ids]
        assignment = cluster_aggregation(g, prev, portals, diams=diams)
        groups: dict[int, list[int]] = {}
        for idx, portal in enumerate(assignment):
            groups.setdefault(portal, []).append(prev_ids[idx])
        ids_here: list[int] = []
        vm = [0] * g.n
        for portal in sorted(groups):
            members = frozenset().union(*(clusters[c].members for c in groups[portal]))
            cl = Cluster(
                next_id,
                i,
                members,
                portal,
                min(members),
                children=sorted(groups[portal]),
                diameter=strong_diameter(g, members),
            )
            if gt(cl.diameter, mu**i):
                diam_violations.append((j, next_id))
            clusters[next_id] = cl
            for c in groups[portal]:
                clusters[c].parent = next_id
            for v in members:
                vm[v] = next_id
            ids_here.append(next_id)
            next_id += 1
        level_ids.append(ids_here)
        vmap.append(vm)
    return Hierarchy(clusters, level_ids, vmap, i)


def verify_padding(
    hpf: HPFamily, rho: float, sample: Iterable[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Return the sampled (vertex, level) pairs whose mu^i/rho ball is not
    padded inside any hierarchy's level-i cluster.
    """
    d = hpf.dist
    failures = []
    for v, i in sample:
        r = hpf.mu**i / rho
        ball = {u for u in range(d.shape[0]) if leq(d[v, u], r)}
        ok = False
        for h in hpf.hierarchies:
            if ball <= h.clusters[h.cluster_at(v, i)].members:
                ok = True
                break
        if not ok:
            failures.append((v, i))
    return failures


def set_separation(dist: np.ndarray, a: frozenset[int], b: frozenset[int]) -> float:
    ia = np.fromiter(a, dtype=np.int64, count=len(a))
    ib = np.fromiter(b, dtype=np.int64, count=len(b))
    return float(dist[np.ix_(ia, ib)].min())


def make_pair_preserving(
    hpf: HPFamily,
    epsilon: float,
    demanded_pairs: Union[str, Iterable[tuple[int, int]]] = "exhaustive",
) -> HPFamily:
    """Augment the family with subcluster-pair assignments via copies.

    Demand mode: each demanded (u, v) is matched to the lowest level and
    first hierarchy whose cluster contains both, keeps their distance, and
    separates them into distinct subclusters ell levels down. Exhaustive
    mode enumerates every well-separated subcluster pair of every cluster.
    One copy per distinct pair demanded of the busiest cluster; a copy
    serves every vertex pair that shares its subcluster pair.
    """
    ell = offset_ell(hpf.mu, epsilon)
    d = hpf.dist
    # per hierarchy: (level, cluster id) -> ordered distinct subcluster pairs
    demands: list[dict[tuple[int, int], list[tuple[int, int, float]]]] = [
        {} for _ in hpf.hierarchies
    ]
    records: list[tuple[int, int, int, tuple[int, int], tuple[int, int, float], float]] = []
    unresolved: list[tuple[int, int]] = []

    if demanded_pairs == "exhaustive":
        for j, h in enumerate(hpf.hierarchies):
            for i in range(1, h.i_max + ell):
                isub = max(i - ell, 0)
                for cid in h.level_clusters(i):
                    subs = sorted(
                        {h.cluster_at(v, isub) for v in h.clusters[cid].members}
                    )
                    entry = []
                    for a_i in range(len(subs)):
                        for b_i in range(a_i + 1, len(subs)):
                            sep = set_separation(
                                d,
                                h.clusters[subs[a_i]].members,
                                h.clusters[subs[b_i]].members,
                            )
                            if gt(sep, hpf.mu**i / hpf.rho):
                                entry.append(
                                    (subs[a_i], subs[b_i], hpf.mu**i / sep)
                                )
                    if entry:
                        demands[j][(i, cid)] = entry
    else:
        cache: dict[tuple[int, int, int], dict[int, float]] = {}
        sep_cache: dict[tuple[int, int, int], float] = {}

        def separation(j: int, c1: int, c2: int, h: Hierarchy) -> float:
            key = (j, min(c1, c2), max(c1, c2))
            if key not in sep_cache:
                sep_cache[key] = set_separation(
                    d, h.clusters[c1].members, h.clusters[c2].members
                )
            return sep_cache[key]

        def restricted_dist(j: int, cid: int, u: int, v: int) -> float:
            key = (j, cid, u)
            if key not in cache:
                h = hpf.hierarchies[j]
                spt = dijkstra(hpf.graph, u, restrict=h.clusters[cid].members)
                cache[key] = {x: spt.dist[x] for x in h.clusters[cid].members}
            return cache[key][v]

        for u, v in sorted({(min(p), max(p)) for p in demanded_pairs if p[0] != p[1]}):
            hit = None
            top = max(h.i_max for h in hpf.hierarchies) + ell - 1
            for i in range(1, top + 1):
                for j, h in enumerate(hpf.hierarchies):
                    cid = h.cluster_at(u, i)
                    if h.cluster_at(v, i) != cid:
                        continue
                    isub = max(i - ell, 0)
                    c1, c2 = h.cluster_at(u, isub), h.cluster_at(v, isub)
                    if c1 == c2:
                        continue
                    if len(h.clusters[cid].members) == hpf.graph.n:
                        din = float(d[u, v])
                    else:
                        din = restricted_dist(j, cid, u, v)
                    if abs(din - d[u, v]) > TOL:
                        continue
                    sep = separation(j, c1, c2, h)
                    hit = (j, i, cid, c1, c2, hpf.mu**i / sep, din)
                    break
                if hit:
                    break
            if hit is None:
                unresolved.append((u, v))
                continue
            j, i, cid, c1, c2, rho_eff, din = hit
            a, b = (c1, c2) if c1 < c2 else (c2, c1)
            entry = demands[j].setdefault((i, cid), [])
            pair = (a, b, rho_eff)
            if pair not in entry:
                entry.append(pair)
            records.append((u, v, j, (i, cid), pair, din))

    copies: list[HierarchyCopy] = []
    copy_of: dict[tuple[int, int], int] = {}  # (hierarchy, t) -> global copy index
    for j, h in enumerate(hpf.hierarchies):
        ncopies = max([len(v) for v in demands[j].values()], default=0) or 1
        for t in range(ncopies):
            pairs = {
                node: entry[t] for node, entry in demands[j].items() if t < len(entry)
            }
            copy_of[(j, t)] = len(copies)
            copies.append(HierarchyCopy(j, h, t, pairs))

    pair_records = []
    for u, v, j, node, pair, din in records:
        t = demands[j][node].index(pair)
        pair_records.append(
            PairRecord(
                u, v, j, copy_of[(j, t)], node[0], node[1], pair[0], pair[1], pair[2], din
            )
        )

    return replace(
        hpf,
        epsilon=epsilon,
        ell=ell,
        copies=copies,
        pair_records=pair_records,
        unresolved_pairs=unresolved,
    )


def subnet_cover_radius(hpf: HPFamily) -> float:
    """Worst ratio max_v d(v, subnet_i^j) / mu^i over all chains and levels.

    The conditional claim (large mu) puts this at 5/12; practical parameter
    runs report the measured value instead.
    """
    d = hpf.dist
    worst = 0.0
    sub = hpf.subnets
    for j in range(sub.sigma):
        top = len(sub.subnets[j]) - 1
        for i in range(1, top + 1):
            pts = sub.subnets[j][i]
            reach = d[pts, :].min(axis=0).max()
            worst = max(worst, float(reach) / hpf.mu**i)
    return worst
