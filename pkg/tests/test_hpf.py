"""Hierarchical partition family: nets, subnets, aggregation, padding, pairs."""

import itertools
import math

import pytest

from spantreecover.graphs import WeightedGraph, apsp, dijkstra, generate, leq
from spantreecover.hpf import (
    aggregation_distortion,
    build_hpf,
    build_net_hierarchy,
    build_subnet_family,
    cluster_aggregation,
    make_pair_preserving,
    offset_ell,
    set_separation,
    strong_diameter,
    verify_padding,
)


def test_net_hierarchy_single_vertex():
    nh = build_net_hierarchy(WeightedGraph(1, []), 6.0, 1.0)
    assert nh.levels == [[0]]


def test_net_hierarchy_path8():
    g = generate("path", {"n": 9})
    nh = build_net_hierarchy(g, 6.0, 1.0)
    assert nh.delta[1] == pytest.approx(1.0)
    assert nh.delta[2] == pytest.approx(6.0)
    assert nh.levels[1] == [0, 2, 4, 6, 8]
    assert nh.levels[-1] == [0]


def test_net_hierarchy_packing_covering():
    g = generate("random_geometric", {"n": 40}, seed=5)
    gs, _ = g.rescaled()
    nh = build_net_hierarchy(gs, 6.0, 1.0)
    d = apsp(gs)
    for i in range(1, len(nh.levels)):
        net, prev, t = nh.levels[i], nh.levels[i - 1], nh.delta[i]
        for a, b in itertools.combinations(net, 2):
            assert d[a, b] > t - 1e-9
        for p in prev:
            assert min(d[p, q] for q in net) <= t + 1e-9
        assert set(net) <= set(prev)


def test_subnets_sigma_one_when_spread():
    g = WeightedGraph(2, [(0, 1, 1.0)])
    fam = build_subnet_family(g, build_net_hierarchy(g, 6.0, 1.0), 6.0)
    assert fam.sigma == 1
    assert len(fam.subnets) == 1


def _check_subnet_invariants(g, mu, eta):
    d = apsp(g)
    nets = build_net_hierarchy(g, mu, eta)
    fam = build_subnet_family(g, nets, mu, dist=d)
    L = len(nets.levels) - 1
    for i in range(L + 1):
        covered = set().union(*(fam.subnets[j][i] for j in range(fam.sigma)))
        assert set(nets.levels[i]) <= covered
    for j in range(fam.sigma):
        assert fam.subnets[j][0] == sorted(range(g.n))
        for i in range(1, L + 1):
            cur, prev = fam.subnets[j][i], fam.subnets[j][i - 1]
            t = mu**i / 3.0
            assert set(cur) <= set(prev)
            for a, b in itertools.combinations(cur, 2):
                assert d[a, b] > t - 1e-9
            for p in prev:
                assert min(d[p, q] for q in cur) <= t + 1e-9
            radius = sum(mu**k / 3.0 for k in range(1, i + 1))
            for v in range(g.n):
                assert min(d[v, q] for q in cur) <= radius + 1e-9
    return fam


def test_subnet_invariants_grid5():
    _check_subnet_invariants(generate("grid", {"k": 5}), 6.0, 1.0)


def test_subnet_invariants_grid16_mu6():
    # the shared-root regression: carving must always find a free subset
    _check_subnet_invariants(generate("grid", {"k": 16}), 6.0, 1.0)


def test_subnet_level_zero_is_v():
    g = generate("grid", {"k": 4})
    fam = build_subnet_family(g, build_net_hierarchy(g, 6.0, 1.0), 6.0)
    for j in range(fam.sigma):
        assert fam.subnets[j][0] == list(range(16))


def test_aggregation_identity_when_all_seeded():
    g = generate("path", {"n": 4})
    clusters = [frozenset([i]) for i in range(4)]
    assert cluster_aggregation(g, clusters, [0, 1, 2, 3]) == [0, 1, 2, 3]


def test_aggregation_single_portal_floods():
    g = generate("path", {"n": 6})
    clusters = [frozenset([0, 1]), frozenset([2, 3]), frozenset([4, 5])]
    assert cluster_aggregation(g, clusters, [0]) == [0, 0, 0]


def test_aggregation_preimages_connected():
    g = generate("grid", {"k": 6})
    clusters = [frozenset([v]) for v in range(36)]
    portals = [0, 21, 35]
    label = cluster_aggregation(g, clusters, portals)
    for p in portals:
        verts = {v for v in range(36) if label[v] == p}
        spt = dijkstra(g, min(verts), restrict=verts)
        assert all(spt.dist[v] < math.inf for v in verts)


def test_aggregation_distortion_reported():
    g = generate("grid", {"k": 6})
    clusters = [frozenset([v]) for v in range(36)]
    portals = [0, 35]
    label = cluster_aggregation(g, clusters, portals)
    dist = aggregation_distortion(g, clusters, portals, label)
    assert math.isfinite(dist) and dist >= 0.0


def test_aggregation_rejects_empty_portals():
    g = generate("path", {"n": 3})
    with pytest.raises(ValueError):
        cluster_aggregation(g, [frozenset([0, 1, 2])], [])


def test_hpf_single_vertex():
    hpf = build_hpf(WeightedGraph(1, []), 6.0, 24.0, 1.0)
    assert len(hpf.hierarchies) == 1
    assert hpf.hierarchies[0].i_max == 0


def test_hpf_hierarchy_count_is_sigma():
    g = generate("grid", {"k": 5})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    assert len(hpf.hierarchies) == hpf.subnets.sigma


def _check_hierarchy_structure(g, hpf):
    for h in hpf.hierarchies:
        assert len(h.levels[0]) == g.n
        assert len(h.levels[h.i_max]) == 1
        for i in range(1, h.i_max + 1):
            seen = set()
            for cid in h.levels[i]:
                c = h.clusters[cid]
                kids = [h.clusters[k] for k in c.children]
                union = frozenset().union(*(k.members for k in kids))
                assert union == c.members
                assert sum(len(k.members) for k in kids) == len(c.members)
                seen |= c.members
                # representative eccentricity within the cluster
                spt = dijkstra(g, c.representative, restrict=c.members)
                ecc = max(spt.dist[v] for v in c.members)
                assert ecc <= hpf.mu**i + 1e-9
            assert seen == set(range(g.n))


def test_hpf_structure_grid5():
    g = generate("grid", {"k": 5})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    _check_hierarchy_structure(g, hpf)
    assert hpf.diameter_violations == []


def test_hpf_structure_geometric():
    g, _ = generate("random_geometric", {"n": 48}, seed=11).rescaled()
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    _check_hierarchy_structure(g, hpf)


def test_padding_level0_and_top():
    g = generate("grid", {"k": 4})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    top = hpf.i_top
    sample = [(v, 0) for v in range(16)] + [(v, top) for v in range(16)]
    assert verify_padding(hpf, 24.0, sample) == []


def test_padding_grid5_all_levels():
    g = generate("grid", {"k": 5})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    sample = [(v, i) for v in range(25) for i in range(hpf.i_top + 1)]
    assert verify_padding(hpf, 24.0, sample) == []


def test_offset_ell():
    assert offset_ell(6.0, 0.25) == 1
    assert offset_ell(6.0, 1.0 / 36.0) == 2
    assert offset_ell(64.0, 1.0 / 64.0) == 1


def test_pairs_degenerate_rejected():
    g = generate("path", {"n": 4})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    pp = make_pair_preserving(hpf, 0.25, [(2, 2)])
    assert pp.pair_records == [] and pp.unresolved_pairs == []


def test_pairs_path8_endpoints():
    g = generate("path", {"n": 9})
    hpf = build_hpf(g, 4.0, 24.0, 1.0)
    pp = make_pair_preserving(hpf, 0.25, [(0, 7)])
    assert len(pp.pair_records) == 1
    rec = pp.pair_records[0]
    h = pp.hierarchies[rec.hierarchy]
    cl = h.clusters[rec.cluster].members
    assert 0 in cl and 7 in cl
    s1, s2 = h.clusters[rec.sub1].members, h.clusters[rec.sub2].members
    assert {0, 7} <= s1 | s2 and s1.isdisjoint(s2)


def test_pairs_assignments_well_formed():
    g = generate("grid", {"k": 5})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    pairs = [(u, v) for u in range(25) for v in range(u + 1, 25)]
    pp = make_pair_preserving(hpf, 0.25, pairs)
    assert pp.unresolved_pairs == []
    d = pp.dist
    for rec in pp.pair_records:
        h = pp.hierarchies[rec.hierarchy]
        isub = max(rec.level - pp.ell, 0)
        for cid in (rec.sub1, rec.sub2):
            assert h.clusters[cid].level == isub
        assert rec.sub1 != rec.sub2
        sep = set_separation(d, h.clusters[rec.sub1].members, h.clusters[rec.sub2].members)
        assert sep > pp.mu**rec.level / rec.rho_eff - 1e-9
        # cluster preserves the pair distance
        assert rec.d_in_cluster == pytest.approx(float(d[rec.u, rec.v]), abs=1e-9)
        cp = pp.copies[rec.copy]
        assert cp.pairs[(rec.level, rec.cluster)][:2] == (rec.sub1, rec.sub2)


def test_pairs_exhaustive_mode_small():
    g = generate("path", {"n": 8})
    hpf = build_hpf(g, 6.0, 24.0, 1.0)
    pp = make_pair_preserving(hpf, 0.25, "exhaustive")
    assert len(pp.copies) >= len(pp.hierarchies)
    for cp in pp.copies:
        h = cp.base
        for (lvl, cid), (s1, s2, rho_eff) in cp.pairs.items():
            sep = set_separation(
                pp.dist, h.clusters[s1].members, h.clusters[s2].members
            )
            assert sep > pp.mu**lvl / rho_eff - 1e-9


def test_strong_diameter_helper():
    g = generate("path", {"n": 5})
    assert strong_diameter(g, frozenset([0, 1, 2])) == pytest.approx(2.0)
    assert strong_diameter(g, frozenset([3])) == 0.0
