"""Build a tree cover on a small grid and walk through what it guarantees.

Run: python3 demos/demo_tree_cover.py
"""

import numpy as np

from spantreecover import (
    CoverConfig,
    apsp,
    cover_stretch,
    generate,
    pair_guarantee_report,
    span_tree_cover,
    verify_spanning,
)

g = generate("grid", {"k": 8}, seed=0)
print(f"input: 8x8 grid, {g.n} vertices, {g.m} edges")

cover = span_tree_cover(g, CoverConfig(epsilon=0.25))
print(f"cover: {len(cover.trees)} spanning trees (eps = 0.25)")

verify_spanning(g, cover)
print("every tree is a spanning tree using only graph edges")

# each demanded pair is preserved by some tree up to a small additive term
report = pair_guarantee_report(g, cover)
print(
    f"pair guarantee: {report['pairs_checked']} pairs checked, "
    f"{len(report['failures'])} failures, worst gap {report['worst_gap']:.3g}"
)

# measured stretch: min-over-trees distance vs true distance
us, vs = np.triu_indices(g.n, 1)
stretch = cover_stretch(g, cover, list(zip(us, vs)))
print(
    f"stretch over all {len(us)} pairs: "
    f"max {stretch['max']:.3f}, mean {stretch['mean']:.3f}"
)

# contrast: any single tree of the cover is far worse on its own
d = apsp(g)
dg = d[us, vs]
worst_single = min(
    float((t.dist_many(us, vs) / dg).max()) for t in cover.tree_oracles(g)
)
print(f"best single tree alone has max stretch {worst_single:.3f}")
