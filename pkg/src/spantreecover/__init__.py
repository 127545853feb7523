"""Spanning tree covers with (1 + eps) stretch, plus the applications built
on top of them: light covers, compact labeled routing, and a path-reporting
distance oracle."""

from .cover import (
    CoverConfig,
    SpanningTree,
    TreeCover,
    cover_stats,
    cover_stretch,
    light_tree_cover,
    load_cover,
    pair_guarantee_report,
    save_cover,
    span_tree_cover,
    verify_spanning,
)
from .graphs import (
    WeightedGraph,
    apsp,
    dijkstra,
    generate,
    greedy_spanner,
    load_graph,
    mst_weight,
    save_graph,
    shortest_path,
)
from .hpf import build_hpf, offset_ell, subnet_cover_radius, verify_padding
from .oracle import OracleIndex, build_oracle, query_distance, query_path
from .routing import (
    RoutingScheme,
    build_routing_scheme,
    measure_sizes,
    route_end_to_end,
    select_tree,
    simulate_route,
)

__all__ = [
    "CoverConfig",
    "OracleIndex",
    "RoutingScheme",
    "SpanningTree",
    "TreeCover",
    "WeightedGraph",
    "apsp",
    "build_hpf",
    "build_oracle",
    "build_routing_scheme",
    "cover_stats",
    "cover_stretch",
    "dijkstra",
    "generate",
    "greedy_spanner",
    "light_tree_cover",
    "load_cover",
    "load_graph",
    "measure_sizes",
    "mst_weight",
    "offset_ell",
    "pair_guarantee_report",
    "query_distance",
    "query_path",
    "route_end_to_end",
    "save_cover",
    "save_graph",
    "select_tree",
    "shortest_path",
    "simulate_route",
    "span_tree_cover",
    "subnet_cover_radius",
    "verify_padding",
    "verify_spanning",
]
