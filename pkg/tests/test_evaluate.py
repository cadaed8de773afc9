import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackmap import InvalidInputError, RoadGraph, frechet_distance
from trackmap.evaluate import (
    average_vertical_distance,
    d_percent_distance,
    eval_directed_hausdorff,
    eval_graph_sampling,
    eval_path_based,
    eval_shortest_path,
    map_match_min_frechet,
    write_rows_csv,
    write_summary_json,
)
from trackmap.geometry import PolyLine
from trackmap.graph import GraphPath, VertexLocator, enumerate_link_paths
from trackmap.synthetic import grid_graph


def bent_grid(seed, amp=15.0):
    """3x3 grid whose edges bow sideways at their midpoints; vertices stay put."""
    g = grid_graph(3, 3, 500.0)
    rng = np.random.default_rng(seed)
    edges = []
    for e in g.iter_edges():
        a, b = e.geometry.points[0], e.geometry.points[-1]
        d = (b - a) / np.hypot(*(b - a))
        mid = (a + b) / 2 + rng.uniform(-amp, amp) * np.array([-d[1], d[0]])
        edges.append((e.id, e.u, e.v, [a, mid, b]))
    return RoadGraph(dict(g.vertices), edges)


def simple_paths(g, s, t):
    """Every simple vertex path from s to t, as GraphPath objects."""
    out = []

    def dfs(x, seen, steps):
        if x == t and steps:
            out.append(GraphPath(g, steps, origin=s))
            return
        for eid in g.incident(x):
            e = g.edge(eid)
            y = e.other(x)
            if y not in seen:
                dfs(y, seen | {y}, steps + [(eid, e.u == x)])

    dfs(s, {s}, [])
    return out


class TestHausdorff:
    def test_subgraph(self, grid):
        assert eval_directed_hausdorff(grid.subgraph([0, 4, 7]), grid).distance == 0.0

    def test_translated(self, grid):
        rep = eval_directed_hausdorff(grid.translated(30, 0), grid, 1.0)
        assert rep.distance == pytest.approx(30.0, abs=0.5)
        # horizontal edges slide along themselves except at the ends
        assert set(rep.per_edge) == set(grid.edges)

    def test_empty(self, grid):
        with pytest.raises(InvalidInputError):
            eval_directed_hausdorff(RoadGraph(), grid)


class TestMapMatch:
    def test_edge_of_graph(self, grid):
        assert map_match_min_frechet(grid.edge(3).geometry, grid) <= 0.5

    def test_offset(self):
        g = RoadGraph({0: (0, 0), 1: (100, 0)}, [(0, 0, 1, None)])
        assert map_match_min_frechet([(0, 1), (100, 1)], g, 0.5) == pytest.approx(1.0, abs=0.5)

    def test_concatenation(self, grid):
        # along two grid edges through vertex 1, wobbling a little
        path = [(0, 0), (200, 6), (500, 0), (497, 250), (500, 500)]
        want = frechet_distance(path, [(0, 0), (500, 0), (500, 500)], 0.01)
        assert map_match_min_frechet(path, grid, 0.05) == pytest.approx(want, abs=0.06)


class TestPathBased:
    def test_subset(self, grid):
        rep = eval_path_based(grid.subgraph([0, 1, 6, 9]), grid)
        assert rep.distances.max() <= rep.tolerance

    def test_no_paths(self, grid):
        with pytest.raises(InvalidInputError):
            eval_path_based(RoadGraph(), grid)

    def test_signatures_cover_paths(self, grid):
        C = bent_grid(1)
        rep = eval_path_based(C, grid, k=2)
        assert set(rep.edge_signature) == set(C.edges)
        assert set(rep.vertex_signature) == set(C.vertices)
        for pid, d, edges, _ in rep.paths:
            assert all(rep.edge_signature[e] >= d for e in edges)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_exhaustive_g_path_oracle(self, seed, grid):
        G = bent_grid(seed)
        C = grid.subgraph([0, 1, 6, 7, 9])
        tau = 0.05
        rep = eval_path_based(C, G, k=3, tau=tau)
        paths = enumerate_link_paths(C, 3)
        for p, (_, d, _, _) in zip(paths, rep.paths):
            line = p.polyline()
            cands = simple_paths(G, p.vertices[0], p.vertices[-1])
            want = min(frechet_distance(line, q.polyline(), tau / 2) for q in cands)
            assert d == pytest.approx(want, abs=2 * tau)

    def test_d_percent(self):
        vals = list(range(1, 101))
        assert d_percent_distance(vals, 2) == 98
        assert d_percent_distance(vals, 15) == 85
        assert d_percent_distance([5.0], 15) == 5.0

    def test_summary_monotone(self, city):
        G, tracks, _ = city
        C = bent_grid(3, amp=40)
        s = eval_path_based(C, G, k=1).summary()
        assert s["min"] <= s["median"] <= s["max"]
        assert s["d15"] <= s["d10"] <= s["d5"] <= s["d2"] <= s["max"]


class TestAverageVertical:
    def test_parallel(self):
        assert average_vertical_distance([(0, 1), (10, 1)], [(0, 0), (10, 0)]) == pytest.approx(1.0)

    def test_identity(self):
        P = [(0, 0), (30, 40), (60, 0)]
        assert average_vertical_distance(P, P) == pytest.approx(0.0, abs=1e-9)

    def test_refinement_oracle(self):
        apex = PolyLine([(0, 0), (50, 40), (100, 0)])
        base = PolyLine([(0, 0), (100, 0)])
        pts = apex.sample(0.1)
        dense = np.mean([abs(y) for _, y in pts])
        assert average_vertical_distance(apex, base, 1.0) == pytest.approx(dense, rel=0.05)

    def test_degenerate(self):
        with pytest.raises(InvalidInputError):
            average_vertical_distance([(0, 0)], [(0, 0), (1, 0)])


class TestShortestPath:
    def test_identity(self, grid):
        rep = eval_shortest_path(grid, grid, n=100, seed=3)
        assert rep.found_fraction == 1.0
        assert np.all(rep.column("frechet_m") == 0) and np.all(rep.column("avg_vertical_m") == 0)

    def test_missing_arm_connectivity_oracle(self, grid):
        # drop every horizontal edge between columns 1 and 2: the right column is cut off
        C = grid.without_edges([1, 3, 5])
        rep = eval_shortest_path(C, grid, n=300, seed=9)
        comp = C.components()
        rng = np.random.default_rng(9)
        x0, y0, x1, y1 = grid.bbox()
        pts = rng.uniform((x0, y0, x0, y0), (x1, y1, x1, y1), size=(300, 4))
        snap = VertexLocator(C)
        want = np.mean([comp[snap(p[:2])] == comp[snap(p[2:])] for p in pts])
        assert rep.found_fraction == pytest.approx(want)
        assert rep.found_fraction < 1.0

    def test_nonnegative(self, grid):
        rep = eval_shortest_path(bent_grid(2), grid, n=50, seed=0)
        for col in ("frechet_m", "avg_vertical_m", "length_c_km", "length_g_km"):
            assert np.all(rep.column(col) >= 0)

    def test_seeded(self, grid):
        C = bent_grid(4)
        a = eval_shortest_path(C, grid, n=40, seed=5).rows()
        b = eval_shortest_path(C, grid, n=40, seed=5).rows()
        assert json.dumps(a) == json.dumps(b)


class TestGraphSampling:
    def test_identity(self, grid):
        rep = eval_graph_sampling(grid, grid, matched_dist=5.0, runs=200, seed=1)
        assert rep.precision == rep.recall == rep.f_score == 1.0

    def test_superset(self, grid):
        C = grid.subgraph([7])
        rep = eval_graph_sampling(C, grid, matched_dist=50.0, runs=300, seed=1)
        assert rep.precision == pytest.approx(1.0, abs=0.01)
        assert rep.recall < 1.0

    def test_monotone_in_matched_dist(self, grid):
        C = bent_grid(5, amp=30)
        prev = (0.0, 0.0)
        for md in (5, 10, 20, 40, 80):
            rep = eval_graph_sampling(C, grid, matched_dist=md, runs=100, seed=2, modified=False)
            assert rep.precision >= prev[0] - 1e-12 and rep.recall >= prev[1] - 1e-12
            prev = (rep.precision, rep.recall)

    def test_far_map_has_no_usable_runs(self, grid):
        with pytest.raises(InvalidInputError):
            eval_graph_sampling(grid.translated(5000, 0), grid, matched_dist=10.0, runs=5)

    def test_skipped_roots_recorded(self, grid):
        # half of C lies far from G
        C = RoadGraph(
            {0: (0, 0), 1: (500, 0), 2: (5000, 0), 3: (5500, 0)},
            [(0, 0, 1, None), (1, 2, 3, None)],
        )
        rep = eval_graph_sampling(C, grid, matched_dist=10.0, runs=50, seed=3)
        assert len(rep.runs) == 50 and rep.skipped_roots > 0

    def test_counts_consistent(self, grid):
        rep = eval_graph_sampling(bent_grid(6), grid, matched_dist=10.0, runs=50, seed=4)
        assert rep.matched_marbles + rep.spurious_marbles == sum(r["marbles"] for r in rep.runs)
        assert rep.matched_holes + rep.empty_holes == sum(r["holes"] for r in rep.runs)
        p, r = rep.precision, rep.recall
        assert rep.f_score == pytest.approx(2 * p * r / (p + r))

    @pytest.mark.parametrize("bad", [{"matched_dist": 0}, {"matched_dist": 5, "density": -1}, {"matched_dist": 5, "runs": 0}])
    def test_bad_parameters(self, grid, bad):
        with pytest.raises(InvalidInputError):
            eval_graph_sampling(grid, grid, **bad)


@settings(max_examples=5, deadline=None)
@given(st.floats(-1e5, 1e5), st.floats(-1e5, 1e5))
def test_translation_invariance(dx, dy):
    G = grid_graph(3, 3, 500.0)
    C = bent_grid(7)
    Gt, Ct = G.translated(dx, dy), C.translated(dx, dy)
    assert eval_directed_hausdorff(Ct, Gt).distance == pytest.approx(eval_directed_hausdorff(C, G).distance, abs=1e-6)
    a = eval_path_based(C, G, k=1).distances
    b = eval_path_based(Ct, Gt, k=1).distances
    assert np.allclose(a, b, atol=0.5)
    sa = eval_shortest_path(C, G, n=30, seed=1).summary()
    sb = eval_shortest_path(Ct, Gt, n=30, seed=1).summary()
    assert sa["found"] == sb["found"]
    assert sa["frechet_m_avg"] == pytest.approx(sb["frechet_m_avg"], abs=1e-6)
    ga = eval_graph_sampling(C, G, matched_dist=20.0, runs=40, seed=1)
    gb = eval_graph_sampling(Ct, Gt, matched_dist=20.0, runs=40, seed=1)
    assert ga.f_score == pytest.approx(gb.f_score, abs=0.02)


def test_report_files(tmp_path, grid):
    rep = eval_path_based(bent_grid(8), grid, k=1)
    write_rows_csv(rep.rows(), tmp_path / "p.csv", extra={"manifest_sha256": "abc"})
    write_summary_json(rep.summary(), tmp_path / "p.json")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "path_id,distance_m,length_m,edges,manifest_sha256"
    assert len(lines) == len(rep.paths) + 1
    data = json.loads((tmp_path / "p.json").read_text())
    assert data["max"] == rep.summary()["max"]
