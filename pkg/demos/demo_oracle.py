"""Answer distance queries from a tree cover, with an actual path back.

The oracle keeps one LCA structure per tree; a query takes the minimum over
trees and reports the realizing path, which always exists in the input graph.

Run: python3 demos/demo_oracle.py
"""

import numpy as np

from spantreecover import (
    CoverConfig,
    build_oracle,
    dijkstra,
    generate,
    query_distance,
    query_path,
    span_tree_cover,
)

g = generate("random_geometric", {"n": 256}, seed=2)
print(f"input: random geometric graph, {g.n} vertices, {g.m} edges")

cover = span_tree_cover(g, CoverConfig(epsilon=0.25, check=False))
oracle = build_oracle(g, cover)
print(f"oracle over {len(oracle.trees)} trees")

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    u, v = map(int, rng.integers(g.n, size=2))
    if u == v:
        continue
    est, tree = query_distance(oracle, u, v)
    true = dijkstra(g, u).dist[v]
    worst = max(worst, est / true)
print(f"200 random queries: worst estimate / true distance = {worst:.3f}")

u, v = 3, 77
path, weight, tree = query_path(oracle, g, u, v)
true = dijkstra(g, u).dist[v]
print(f"example query ({u}, {v}): estimate {weight:.3f} from tree {tree}")
print(f"  true distance {true:.3f}")
print(f"  path ({len(path)} vertices): {path}")
assert all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
print("  every path edge exists in the input graph")
