import json

import pytest

from spantreecover.cli import main
from spantreecover.graphs import load_graph


@pytest.fixture()
def grid4_file(tmp_path):
    p = tmp_path / "grid4.txt"
    assert main(["generate", "grid", "4", "--out", str(p)]) == 0
    return str(p)


@pytest.fixture()
def path8_file(tmp_path):
    p = tmp_path / "path8.txt"
    assert main(["generate", "path", "8", "--out", str(p)]) == 0
    return str(p)


def test_generate_grid(grid4_file):
    g = load_graph(grid4_file)
    assert g.n == 16 and g.m == 24


def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["generate", "random_geometric", "32", "--seed", "5", "--out", str(a)])
    main(["generate", "random_geometric", "32", "--seed", "5", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_generate_star_weights(tmp_path):
    p = tmp_path / "star.txt"
    main(["generate", "star_exponential", "5", "--out", str(p)])
    g = load_graph(p)
    assert sorted(w for _, _, w in g.edges) == [1.0, 2.0, 4.0, 8.0]


def test_cover_tree_input_stats(tmp_path, path8_file):
    stats_p = tmp_path / "stats.json"
    rc = main(
        ["cover", "--graph", path8_file, "--stats", str(stats_p)]
    )
    assert rc == 0
    stats = json.loads(stats_p.read_text())
    assert stats["max_stretch"] == pytest.approx(1.0, abs=1e-9)
    assert stats["individual_lightness"] == pytest.approx(1.0, abs=1e-9)
    assert stats["pair_gate_failures"] == 0


def test_cover_rerun_byte_identical(tmp_path, grid4_file):
    c1, c2 = tmp_path / "c1.json", tmp_path / "c2.json"
    assert main(["cover", "--graph", grid4_file, "--out", str(c1)]) == 0
    assert main(["cover", "--graph", grid4_file, "--out", str(c2)]) == 0
    assert c1.read_bytes() == c2.read_bytes()


def test_verify_pass_and_fail(tmp_path, grid4_file):
    cov = tmp_path / "cover.json"
    rep = tmp_path / "verify.json"
    assert main(["cover", "--graph", grid4_file, "--out", str(cov)]) == 0
    rc = main(
        ["verify", "--graph", grid4_file, "--cover", str(cov),
         "--stats", str(rep)]
    )
    assert rc == 0
    doc = json.loads(rep.read_text())
    assert all(doc["families"].values())

    # corrupt one tree edge: spanning must fail, exit code 1
    broken = json.loads(cov.read_text())
    broken["trees"][0]["edges"][0] = [0, 15]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(broken))
    rc = main(["verify", "--graph", grid4_file, "--cover", str(bad)])
    assert rc == 1


def test_route_path_graph(tmp_path, path8_file):
    stats_p = tmp_path / "route.json"
    out_p = tmp_path / "traces.csv"
    rc = main(
        ["route", "--graph", path8_file, "--pairs", "all",
         "--out", str(out_p), "--stats", str(stats_p)]
    )
    assert rc == 0
    stats = json.loads(stats_p.read_text())
    assert stats["selection_failures"] == []
    assert stats["stretch_max"] == pytest.approx(1.0, abs=1e-9)
    for key in ("alpha", "beta", "label_bits_max", "table_bits_max",
                "header_bits"):
        assert key in stats
    lines = out_p.read_text().strip().splitlines()
    assert lines[0] == "u,v,tree,hops,weight,stretch"
    assert len(lines) == 1 + 28  # all pairs of 8 vertices


def test_route_grid_terminates(tmp_path, grid4_file):
    stats_p = tmp_path / "route.json"
    rc = main(
        ["route", "--graph", grid4_file, "--stats", str(stats_p)]
    )
    assert rc == 0
    stats = json.loads(stats_p.read_text())
    assert stats["pairs_routed"] == 120
    assert stats["selection_failures"] == []


def test_oracle_queries(tmp_path, grid4_file):
    cov = tmp_path / "cover.json"
    main(["cover", "--graph", grid4_file, "--out", str(cov)])
    q = tmp_path / "q.txt"
    q.write_text("0 15\n3 12\n")
    out = tmp_path / "ans.csv"
    rc = main(
        ["oracle", "--graph", grid4_file, "--cover", str(cov),
         "--queries", str(q), "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "u,v,estimate,tree,path_len,path"
    assert len(lines) == 3
    u, v, est, tree, plen, path = lines[1].split(",")
    assert (u, v) == ("0", "15")
    assert float(est) >= 6.0 - 1e-9
    assert len(path.split("-")) == int(plen)


def test_oracle_malformed_query(tmp_path, grid4_file):
    cov = tmp_path / "cover.json"
    main(["cover", "--graph", grid4_file, "--out", str(cov)])
    q = tmp_path / "q.txt"
    q.write_text("0 1 2\n")
    rc = main(
        ["oracle", "--graph", grid4_file, "--cover", str(cov),
         "--queries", str(q)]
    )
    assert rc == 2


def test_usage_errors(tmp_path, grid4_file):
    assert main(["cover", "--graph", grid4_file, "--epsilon", "2.0"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["cover", "--graph", str(tmp_path / "missing.txt")]) == 2
