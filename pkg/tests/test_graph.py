import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackmap import GraphStats, InvalidInputError, RoadGraph, enumerate_link_paths, graph_stats, nearest_vertex, shortest_path, validate_graph
from trackmap.graph import Edge, GraphBuilder, GraphPath, VertexLocator, graph_links
from trackmap.synthetic import grid_graph


def random_graph(seed, n=20, extra=12):
    """Connected-ish random planar-ish graph: a random tree plus extra chords."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1000, size=(n, 2))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v))
    for _ in range(extra):
        u, v = rng.choice(n, 2, replace=False)
        if (u, v) not in edges and (v, u) not in edges:
            edges.append((int(u), int(v)))
    verts = {i: tuple(p) for i, p in enumerate(pts)}
    return RoadGraph(verts, [(k, u, v, None) for k, (u, v) in enumerate(edges)])


def brute_shortest(g, s, t):
    """Length of the shortest simple path, by enumerating all of them."""
    best = math.inf

    def dfs(x, seen, length):
        nonlocal best
        if x == t:
            best = min(best, length)
            return
        for eid in g.incident(x):
            e = g.edge(eid)
            y = e.other(x)
            if y not in seen:
                dfs(y, seen | {y}, length + e.length)

    dfs(s, {s}, 0.0)
    return best


class TestValidate:
    def test_well_formed(self):
        g = RoadGraph({1: (0, 0), 2: (10, 0)}, [(1, 1, 2, None)])
        assert validate_graph(g) == []

    def test_dangling(self):
        g = RoadGraph({1: (0, 0), 2: (10, 0)}, [(1, 1, 9, [(0, 0), (10, 0)])])
        v = validate_graph(g)
        assert len(v) == 1 and v[0].rule == "dangling-endpoint" and v[0].ident == 1

    def test_geometry_mismatch(self):
        g = RoadGraph({1: (0, 0), 2: (10, 0)}, [(7, 1, 2, [(0, 0), (15, 0)])])
        v = validate_graph(g)
        assert [x.rule for x in v] == ["geometry-mismatch"]
        assert v[0].ident == 7


class TestStats:
    def test_square(self, square):
        assert graph_stats(square).as_tuple() == (4, 4, pytest.approx(0.4))

    def test_empty(self):
        assert graph_stats(RoadGraph()) == GraphStats(0, 0, 0.0)

    def test_counts_degree_two(self):
        g = RoadGraph({0: (0, 0), 1: (1, 0), 2: (2, 0)}, [(0, 0, 1, None), (1, 1, 2, None)])
        assert graph_stats(g).vertices == 3


class TestShortestPath:
    def test_grid_corners(self):
        g = grid_graph(2, 2, 100.0)
        p = shortest_path(g, 0, 3)
        assert p.length == pytest.approx(200.0)
        assert p.is_valid()

    def test_same_vertex(self, square):
        p = shortest_path(square, 2, 2)
        assert len(p) == 0 and p.length == 0.0

    def test_unknown_vertex(self, square):
        with pytest.raises(InvalidInputError):
            shortest_path(square, 0, 99)

    def test_disconnected(self):
        g = RoadGraph({0: (0, 0), 1: (1, 0), 2: (5, 5), 3: (6, 5)}, [(0, 0, 1, None), (1, 2, 3, None)])
        assert shortest_path(g, 0, 3) is None

    def test_tie_break(self, square):
        # both ways round the square are 200 m; edge ids (0, 1) < (3, 2)
        assert shortest_path(square, 0, 2).edge_ids == (0, 1)

    @pytest.mark.parametrize("seed", range(5))
    def test_brute_force_oracle(self, seed):
        g = random_graph(seed)
        rng = np.random.default_rng(100 + seed)
        for s, t in rng.integers(0, 20, size=(6, 2)):
            p = shortest_path(g, int(s), int(t))
            want = brute_shortest(g, int(s), int(t))
            assert p.length == pytest.approx(want)

    @pytest.mark.parametrize("seed", range(3))
    def test_symmetric_and_monotone_under_deletion(self, seed):
        g = random_graph(seed)
        d = g.without_edges([0, 5])
        for s, t in itertools.combinations(range(0, 20, 3), 2):
            a = shortest_path(g, s, t)
            assert a.length == pytest.approx(shortest_path(g, t, s).length)
            b = shortest_path(d, s, t)
            assert b is None or b.length >= a.length - 1e-9


class TestNearestVertex:
    def test_on_vertex(self, square):
        assert nearest_vertex(square, (100, 100)) == 2

    def test_tie(self):
        g = RoadGraph({7: (10, 0), 3: (-10, 0)})
        assert nearest_vertex(g, (0, 0)) == 3
        assert VertexLocator(g)((0, 0)) == 3

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            nearest_vertex(RoadGraph(), (0, 0))

    def test_linear_scan_oracle(self):
        g = random_graph(3, n=60)
        loc = VertexLocator(g)
        for p in np.random.default_rng(1).uniform(-100, 1100, size=(200, 2)):
            d = {v: math.dist(p, q) for v, q in g.vertices.items()}
            best = min(d.values())
            want = min(v for v, x in d.items() if x == best)
            assert nearest_vertex(g, p) == want == loc(p)


def y_graph():
    verts = {0: (0, 0), 1: (0, 100), 2: (-90, -50), 3: (90, -50)}
    return RoadGraph(verts, [(0, 0, 1, None), (1, 0, 2, None), (2, 0, 3, None)])


class TestLinkPaths:
    def test_y_k1(self):
        assert len(enumerate_link_paths(y_graph(), 1)) == 3

    def test_y_k2(self):
        paths = enumerate_link_paths(y_graph(), 2)
        assert len(paths) == 3
        assert {frozenset(p.edge_ids) for p in paths} == {frozenset(c) for c in itertools.combinations(range(3), 2)}

    def test_chain_is_one_link(self):
        verts = {0: (0, 0), 1: (10, 0), 2: (20, 0), 3: (30, 0)}
        g = RoadGraph(verts, [(0, 0, 1, None), (1, 1, 2, None), (2, 2, 3, None)])
        paths = enumerate_link_paths(g, 1)
        assert len(paths) == 1 and sorted(paths[0].edge_ids) == [0, 1, 2]

    def test_bad_k(self):
        with pytest.raises(InvalidInputError):
            enumerate_link_paths(y_graph(), 4)

    def test_ring(self, square):
        paths = enumerate_link_paths(square, 1)
        assert len(paths) == 1 and len(paths[0]) == 4

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("seed", range(3))
    def test_invariants(self, k, seed):
        g = random_graph(seed)
        paths = enumerate_link_paths(g, k)
        assert all(p.is_valid() for p in paths)
        covered = {e for p in paths for e in p.edge_ids}
        assert covered == set(g.edges)
        if k == 1:
            assert sum(p.length for p in paths) >= g.total_length() - 1e-6
        # no path appears twice up to reversal
        keys = [min(p.steps, p.reversed().steps) for p in paths]
        assert len(keys) == len(set(keys))

    def test_grid_links(self, grid):
        # every grid vertex has degree != 2 except the corners
        links = graph_links(grid)
        assert sum(len(l.steps) for l in links) == 12


class TestBuilder:
    def test_split_edge(self):
        b = GraphBuilder()
        u, v = b.add_vertex((0, 0)), b.add_vertex((10, 0))
        e = b.add_edge(u, v)
        vids = b.split_edge(e, [(0, 0.5)])
        g = b.freeze()
        assert validate_graph(g) == []
        assert len(g.edges) == 2 and g.degree(vids[0]) == 2

    def test_within(self):
        b = GraphBuilder()
        vs = [b.add_vertex((10 * i, 0)) for i in range(5)]
        for a, c in zip(vs, vs[1:]):
            b.add_edge(a, c)
        assert set(b.within({vs[0]: 0.0}, 25.0)) == {vs[0], vs[1], vs[2]}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_shortest_path_translation(seed, dx, dy):
    g = random_graph(seed, n=10, extra=5)
    h = g.translated(dx, dy)
    a, b = shortest_path(g, 0, 9), shortest_path(h, 0, 9)
    assert a.edge_ids == b.edge_ids


def test_graph_path_polyline():
    g = y_graph()
    p = GraphPath(g, [(1, False), (2, True)])
    assert p.vertices == (2, 0, 3)
    assert np.allclose(p.polyline().points, [(-90, -50), (0, 0), (90, -50)])
    assert p.reversed().vertices == (3, 0, 2)


def test_edge_other():
    e = Edge(0, 4, 5, None)
    assert e.other(4) == 5 and e.other(5) == 4
