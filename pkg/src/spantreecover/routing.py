"""Fixed-port labeled routing over a spanning tree cover.

The scheme has two halves. Per tree, a DFS-interval router whose tables keep
only a bounded window of children and siblings; recovery headers (a single
port number) let a route backtrack through early children when the target
child fell outside the window. Across trees, per-vertex selection labels over
compressed cluster hierarchies identify, from the two endpoint labels alone,
a tree that approximately preserves the pair's distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graphs import TOL, WeightedGraph, dijkstra, greedy_spanner, leq
from .oracle import TreeOracle


class RoutingError(AssertionError):
    pass


class SelectionError(KeyError):
    """No subhierarchy satisfies the selection condition for the pair."""


def word_bits(n: int) -> int:
    """Fixed field width: every stored integer fits in ceil(2 log2 n) bits."""
    return max(1, math.ceil(2.0 * math.log2(max(n, 2))))


# ---------------------------------------------------------------------------
# ports


@dataclass
class PortAssignment:
    ports: dict[tuple[int, int], int]  # directed (u, v) -> port at u
    by_port: dict[tuple[int, int], int]  # (u, port) -> v
    bits: int


def assign_ports(g: WeightedGraph, seed: int = 42) -> PortAssignment:
    """Adversarial-stand-in port numbers: random, distinct per vertex,
    deterministic in the seed, each fitting in the fixed word width."""
    bits = word_bits(g.n)
    rng = np.random.default_rng(seed)
    ports: dict[tuple[int, int], int] = {}
    by_port: dict[tuple[int, int], int] = {}
    for u in range(g.n):
        nbrs = sorted({v for v, _, _ in g.adj[u]})
        if not nbrs:
            continue
        values = rng.choice(2**bits, size=len(nbrs), replace=False)
        for v, p in zip(nbrs, values):
            ports[(u, v)] = int(p)
            by_port[(u, int(p))] = v
    return PortAssignment(ports, by_port, bits)


# ---------------------------------------------------------------------------
# per-tree interval routing


def measure_alpha(spanner: WeightedGraph, epsilon: float) -> int:
    """Largest number of edges at one vertex whose weights fit in a common
    factor-2 window, computed exactly by a sliding window per vertex."""
    alpha = 1
    for u in range(spanner.n):
        ws = sorted(w for _, w, _ in spanner.adj[u])
        j = 0
        for i in range(len(ws)):
            while j < len(ws) and ws[j] <= 2.0 * ws[i] + TOL:
                j += 1
            alpha = max(alpha, j - i)
    return alpha


def routing_beta(alpha: int, epsilon: float) -> int:
    return 2 * max(1, math.ceil(math.log2(1.0 / epsilon))) * alpha


@dataclass
class VertexTable:
    interval: tuple[int, int]  # own DFS interval; interval[0] is own stamp
    parent_port: Optional[int]
    children: list[tuple[tuple[int, int], int]]  # first beta: interval, port
    parent_interval: Optional[tuple[int, int]]
    siblings: list[tuple[tuple[int, int], int]]  # next beta: interval, port
    # port stored for a sibling is the parent's port toward that sibling


@dataclass
class TreeRoutingState:
    root: int
    beta: int
    tstamp: list[int]
    tables: list[VertexTable]
    parent: list[int]


def build_tree_routing(
    tree,
    spanner: WeightedGraph,
    ports: PortAssignment,
    epsilon: float,
    beta: Optional[int] = None,
) -> TreeRoutingState:
    """DFS-interval tables for one cover tree, minimum-weight edge first."""
    n = spanner.n
    for u, v in tree.edges:
        if not spanner.has_edge(u, v):
            raise RoutingError(f"tree edge ({u},{v}) not in the spanner")
    if beta is None:
        beta = routing_beta(measure_alpha(spanner, epsilon), epsilon)

    adj: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    for u, v in tree.edges:
        w = spanner.weight(u, v)
        adj[u].append((w, v))
        adj[v].append((w, u))
    for lst in adj:
        lst.sort()

    root = tree.root
    tstamp = [-1] * n
    parent = [-1] * n
    order: list[list[int]] = [[] for _ in range(n)]  # children, stamp order
    clock = 0
    stack = [(root, -1)]
    while stack:
        u, p = stack.pop()
        if tstamp[u] != -1:
            continue
        tstamp[u] = clock
        clock += 1
        parent[u] = p
        if p != -1:
            order[p].append(u)
        kids = [(w, v) for w, v in adj[u] if v != p]
        for w, v in reversed(kids):
            stack.append((v, u))
    assert clock == n, "tree does not span the graph"

    # subtree intervals: max descendant timestamp, children-first
    hi = [tstamp[u] for u in range(n)]
    for u in sorted(range(n), key=lambda x: -tstamp[x]):
        for c in order[u]:
            hi[u] = max(hi[u], hi[c])
    interval = [(tstamp[u], hi[u]) for u in range(n)]

    # DFS child order must agree with nondecreasing edge weight
    for u in range(n):
        ws = [spanner.weight(u, c) for c in order[u]]
        assert all(leq(a, b) for a, b in zip(ws, ws[1:])), (
            f"child weights out of order at vertex {u}"
        )

    tables: list[VertexTable] = []
    for u in range(n):
        p = parent[u]
        kid_entries = [
            (interval[c], ports.ports[(u, c)]) for c in order[u][:beta]
        ]
        if p == -1:
            tables.append(
                VertexTable(interval[u], None, kid_entries, None, [])
            )
            continue
        sibs = order[p]
        i = sibs.index(u)
        sib_entries = [
            (interval[s], ports.ports[(p, s)])
            for s in sibs[i + 1 : i + 1 + beta]
        ]
        tables.append(
            VertexTable(
                interval[u],
                ports.ports[(u, p)],
                kid_entries,
                interval[p],
                sib_entries,
            )
        )
    return TreeRoutingState(root, beta, tstamp, tables, parent)


def routing_decision(
    table: VertexTable, dest_t: int, header: Optional[int]
) -> tuple[str, Optional[int], Optional[int]]:
    """One routing step: ("done", None, None) or ("forward", port, header).

    Headers carry at most one port: emitted when the target hides behind a
    sibling window (so the parent can shortcut on arrival), consumed the
    moment the destination falls back inside the current subtree.
    """
    a, b = table.interval
    if dest_t == a:
        return ("done", None, None)
    if a <= dest_t <= b:
        for (ca, cb), port in table.children:
            if ca <= dest_t <= cb:
                return ("forward", port, None)
        if header is not None:
            return ("forward", header, None)
        if not table.children:
            raise RoutingError("destination inside a leaf interval")
        return ("forward", table.children[0][1], None)
    if table.parent_interval is None:
        raise RoutingError("destination outside the root interval")
    pa, pb = table.parent_interval
    if not (pa <= dest_t <= pb):
        return ("forward", table.parent_port, None)
    for (sa, sb), pport in table.siblings:
        if sa <= dest_t <= sb:
            return ("forward", table.parent_port, pport)
    if dest_t < a:
        # the target sits at or before the parent in DFS order; climbing
        # with an empty header lets the parent re-dispatch from the start
        return ("forward", table.parent_port, None)
    if not table.siblings:
        return ("forward", table.parent_port, None)
    return ("forward", table.parent_port, table.siblings[0][1])


@dataclass
class RouteTrace:
    vertices: list[int]
    ports: list[int]
    weight: float
    hops: int
    done: bool


# ---------------------------------------------------------------------------
# tree selection labels


@dataclass
class SubNode:
    """One node of a compressed cluster hierarchy."""

    members: frozenset[int]
    level: int
    children: list["SubNode"] = field(default_factory=list)
    pair: Optional[tuple[int, int]] = None  # child indices, when assigned
    leaf: Optional[int] = None
    tmin: int = -1
    tmax: int = -1
    depth: int = 0
    heavy: int = -1  # heavy child index, -1 when none


@dataclass
class ApexRecord:
    depth: int
    interval: tuple[int, int]
    child_of_x: int  # L1
    heavy_child: int  # L2, -1 when absent
    pair: Optional[tuple[int, int]]  # L3


@dataclass
class SelectionLabel:
    # per subhierarchy: own leaf timestamp and the apex records
    stamps: list[int]
    apices: list[list[ApexRecord]]


def compressed_subhierarchy(copy, top_level: int, ell: int) -> SubNode:
    """Cluster tree keeping every ell-th level below the given top, with
    single-child chains contracted away."""
    hier = copy.base

    def build(level: int, cid: int) -> SubNode:
        cluster = hier.clusters[cid]
        if len(cluster.members) == 1:
            (v,) = cluster.members
            return SubNode(cluster.members, 0, leaf=v)
        isub = max(level - ell, 0)
        kid_ids = sorted({hier.cluster_at(v, isub) for v in cluster.members})
        kids = [build(isub, k) for k in kid_ids]
        if len(kids) == 1:
            return kids[0]
        node = SubNode(cluster.members, level, children=kids)
        entry = copy.pairs.get((level, cid))
        if entry is not None:
            s1, s2 = entry[0], entry[1]
            m1 = hier.clusters[s1].members
            m2 = hier.clusters[s2].members
            i1 = next(i for i, k in enumerate(kids) if k.members <= m1)
            i2 = next(i for i, k in enumerate(kids) if k.members <= m2)
            node.pair = (i1, i2)
        return node

    top = hier.levels[hier.i_max][0]
    root = build(top_level, top)
    _finalize(root)
    return root


def _finalize(root: SubNode) -> None:
    """Leaf timestamps, intervals, depths, and heavy children in one pass."""
    clock = 0
    stack: list[tuple[SubNode, int, bool]] = [(root, 0, False)]
    while stack:
        node, depth, seen = stack.pop()
        if seen:
            node.tmax = max(
                (k.tmax for k in node.children), default=node.tmin
            )
            weights = [len(k.members) for k in node.children]
            node.heavy = -1
            for i, w in enumerate(weights):
                if 2 * w > len(node.members):
                    node.heavy = i
                    break
            continue
        node.depth = depth
        if node.leaf is not None:
            node.tmin = node.tmax = clock
            clock += 1
            continue
        node.tmin = clock  # equals the leftmost descendant leaf's stamp
        stack.append((node, depth, True))
        for k in reversed(node.children):
            stack.append((k, depth + 1, False))


def build_selection_labels(hpf, cover) -> tuple[list[SelectionLabel], list[SubNode]]:
    """Per-vertex apex lists over every compressed subhierarchy; the
    subhierarchy order matches the cover's tree order."""
    n = hpf.graph.n
    subs: list[SubNode] = []
    for copy in hpf.copies:
        for level in hpf.top_tree_levels(copy.base_index):
            subs.append(compressed_subhierarchy(copy, level, hpf.ell))
    assert len(subs) == len(cover.trees), "subhierarchy/tree count mismatch"

    labels = [SelectionLabel([], []) for _ in range(n)]
    for root in subs:
        stamps = [-1] * n
        apex_lists: list[list[ApexRecord]] = [[] for _ in range(n)]

        def walk(node: SubNode, trail: list[tuple[SubNode, int]]) -> None:
            if node.leaf is not None:
                stamps[node.leaf] = node.tmin
                recs = []
                for parent, idx in trail:
                    child = parent.children[idx]
                    if idx != parent.heavy:  # light child: parent is an apex
                        recs.append(
                            ApexRecord(
                                parent.depth,
                                (parent.tmin, parent.tmax),
                                idx,
                                parent.heavy,
                                parent.pair,
                            )
                        )
                apex_lists[node.leaf] = recs
                return
            for i, k in enumerate(node.children):
                walk(k, trail + [(node, i)])

        walk(root, [])
        for v in range(n):
            assert stamps[v] >= 0, f"vertex {v} missing from a subhierarchy"
            labels[v].stamps.append(stamps[v])
            labels[v].apices.append(apex_lists[v])
    return labels, subs


def _lca_record(
    lx: SelectionLabel, ly: SelectionLabel, idx: int
) -> Optional[tuple[Optional[ApexRecord], Optional[ApexRecord]]]:
    tx, ty = lx.stamps[idx], ly.stamps[idx]

    def deepest(recs: list[ApexRecord]) -> Optional[ApexRecord]:
        best = None
        for r in recs:
            if r.interval[0] <= tx <= r.interval[1] and (
                r.interval[0] <= ty <= r.interval[1]
            ):
                if best is None or r.depth > best.depth:
                    best = r
        return best

    rx = deepest(lx.apices[idx])
    ry = deepest(ly.apices[idx])
    if rx is None and ry is None:
        return None
    if rx is not None and ry is not None:
        if rx.depth > ry.depth:
            ry = None
        elif ry.depth > rx.depth:
            rx = None
    return rx, ry


def select_tree(label_x: SelectionLabel, label_y: SelectionLabel) -> int:
    """First subhierarchy whose lowest common cluster of the two leaves is
    assigned exactly their two child branches; its index is the tree index."""
    if label_x.stamps == label_y.stamps:
        raise ValueError("degenerate query: identical labels")
    for idx in range(len(label_x.stamps)):
        found = _lca_record(label_x, label_y, idx)
        if found is None:
            continue
        rx, ry = found
        if rx is not None:
            cx = rx.child_of_x
            cy = ry.child_of_x if ry is not None else rx.heavy_child
            pair = rx.pair
        else:
            cy = ry.child_of_x
            cx = ry.heavy_child
            pair = ry.pair
        if cx < 0 or cy is None or cy < 0 or pair is None:
            continue
        if {cx, cy} == set(pair):
            return idx
    raise SelectionError("no subhierarchy preserves this pair")


def lca_condition_bruteforce(root: SubNode, x: int, y: int):
    """Walk the actual cluster tree; returns (holds, lca node) for a pair.
    Reference oracle for the label-based decoding."""
    node = root
    while True:
        nxt = None
        for k in node.children:
            if x in k.members and y in k.members:
                nxt = k
                break
        if nxt is None:
            break
        node = nxt
    if node.pair is None:
        return False, node
    i1, i2 = node.pair
    cx = next(
        i for i, k in enumerate(node.children) if x in k.members
    )
    cy = next(
        i for i, k in enumerate(node.children) if y in k.members
    )
    return {cx, cy} == {i1, i2}, node


# ---------------------------------------------------------------------------
# the full scheme


@dataclass
class RoutingScheme:
    graph: WeightedGraph
    spanner: WeightedGraph
    cover: object
    ports: PortAssignment
    states: list[TreeRoutingState]
    labels: list[SelectionLabel]
    subhierarchies: list[SubNode]
    epsilon: float
    alpha: int
    beta: int
    _oracles: Optional[list[TreeOracle]] = field(default=None, repr=False)

    def tree_oracles(self) -> list[TreeOracle]:
        if self._oracles is None:
            self._oracles = self.cover.tree_oracles(self.spanner)
        return self._oracles


def build_routing_scheme(
    g: WeightedGraph, epsilon: float = 0.25, config=None, seed: int = 42
) -> RoutingScheme:
    from .cover import CoverConfig, span_tree_cover

    spanner = greedy_spanner(g, epsilon)
    cfg = config if config is not None else CoverConfig(epsilon=epsilon)
    cover = span_tree_cover(spanner, cfg)
    ports = assign_ports(g, seed)
    alpha = measure_alpha(spanner, epsilon)
    beta = routing_beta(alpha, epsilon)
    states = [
        build_tree_routing(t, spanner, ports, epsilon, beta=beta)
        for t in cover.trees
    ]
    labels, subs = build_selection_labels(cover.hpf, cover)
    return RoutingScheme(
        g, spanner, cover, ports, states, labels, subs, epsilon, alpha, beta
    )


def simulate_route(
    scheme: RoutingScheme, tree_idx: int, s: int, t: int
) -> RouteTrace:
    """Hop-by-hop simulation on one tree; each physical hop follows the
    chosen port. Successful routes are held to the (1 + eps) tree bound."""
    state = scheme.states[tree_idx]
    g = scheme.graph
    dest_t = state.tstamp[t]
    cur = s
    header: Optional[int] = None
    verts = [s]
    out_ports: list[int] = []
    weight = 0.0
    cap = 4 * g.n
    done = False
    for _ in range(cap):
        kind, port, header = routing_decision(
            state.tables[cur], dest_t, header
        )
        if kind == "done":
            done = True
            break
        nxt = scheme.ports.by_port[(cur, port)]
        weight += g.weight(cur, nxt)
        out_ports.append(port)
        verts.append(nxt)
        cur = nxt
    trace = RouteTrace(verts, out_ports, weight, len(out_ports), done)
    if done:
        dt = scheme.tree_oracles()[tree_idx].dist(s, t)
        assert leq(weight, (1.0 + scheme.epsilon) * dt), (
            f"route weight {weight} exceeds (1+eps) * {dt}"
        )
    return trace


def route_end_to_end(
    scheme: RoutingScheme, s: int, t: int
) -> tuple[RouteTrace, int]:
    if s == t:
        return RouteTrace([s], [], 0.0, 0, True), 0
    idx = select_tree(scheme.labels[s], scheme.labels[t])
    return simulate_route(scheme, idx, s, t), idx


def measure_sizes(scheme: RoutingScheme) -> dict:
    """Exact bit accounting with fixed-width integer fields."""
    w = word_bits(scheme.graph.n)
    num_trees = len(scheme.states)
    label_max = 0
    table_max = 0
    for v in range(scheme.graph.n):
        # per tree: one timestamp; plus the selection label
        bits = num_trees * w
        lab = scheme.labels[v]
        for recs in lab.apices:
            bits += w  # leaf timestamp in this subhierarchy
            bits += len(recs) * 6 * w  # interval, L1, L2, L3 per apex
        label_max = max(label_max, bits)
        tbits = 0
        for state in scheme.states:
            tab = state.tables[v]
            tbits += 3 * w  # own interval + parent port
            tbits += 2 * w  # parent interval
            tbits += 3 * w * len(tab.children)
            tbits += 3 * w * len(tab.siblings)
        table_max = max(table_max, tbits)
    limit = 2**w
    for (u, _), p in scheme.ports.ports.items():
        assert 0 <= p < limit
    for state in scheme.states:
        assert all(0 <= t < limit for t in state.tstamp)
    return {
        "alpha": scheme.alpha,
        "beta": scheme.beta,
        "word_bits": w,
        "label_bits_max": label_max,
        "table_bits_max": table_max,
        "header_bits": w,
        "num_trees": num_trees,
    }
