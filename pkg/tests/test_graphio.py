import numpy as np
import pytest

from trackmap import DuplicateIdError, ParseError, RoadGraph, read_graph, write_graph
from trackmap.graphio import read_graph_dir, write_graph_dir


def test_round_trip_square(tmp_path, square):
    vf, ef = write_graph(square, tmp_path / "v.txt", tmp_path / "e.txt")
    g = read_graph(vf, ef)
    assert dict(g.vertices) == dict(square.vertices)
    for e in square.iter_edges():
        f = g.edge(e.id)
        assert (f.u, f.v) == (e.u, e.v)
        assert f.geometry == e.geometry


def test_round_trip_curved_edges(tmp_path):
    rng = np.random.default_rng(2)
    verts = {0: (0.1, 0.2), 1: (1000.123456789, -5.5)}
    inner = rng.uniform(0, 1000, size=(5, 2))
    g = RoadGraph(verts, [(3, 0, 1, [verts[0], *inner, verts[1]])])
    write_graph_dir(g, tmp_path)
    h = read_graph_dir(tmp_path)
    assert np.abs(h.edge(3).geometry.points - g.edge(3).geometry.points).max() <= 1e-6


def test_format_is_plain_csv(tmp_path, square):
    write_graph_dir(square, tmp_path)
    raw = (tmp_path / "vertices.txt").read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"0,0.0,0.0"
    assert (tmp_path / "edges.txt").read_text().splitlines()[0] == "0,0,1"


def test_edge_line_missing_field(tmp_path):
    (tmp_path / "v.txt").write_text("1,0,0\n2,10,0\n")
    (tmp_path / "e.txt").write_text("1,1,2\n2,1\n")
    with pytest.raises(ParseError) as exc:
        read_graph(tmp_path / "v.txt", tmp_path / "e.txt")
    assert exc.value.line == 2
    assert "line 2" in str(exc.value)


def test_edge_line_too_many_fields(tmp_path):
    (tmp_path / "v.txt").write_text("1,0,0\n2,10,0\n")
    (tmp_path / "e.txt").write_text("1,1,2,5 5,oops\n")
    with pytest.raises(ParseError):
        read_graph(tmp_path / "v.txt", tmp_path / "e.txt")


def test_duplicate_vertex(tmp_path):
    (tmp_path / "v.txt").write_text("5,0,0\n6,1,1\n5,2,2\n")
    (tmp_path / "e.txt").write_text("")
    with pytest.raises(DuplicateIdError) as exc:
        read_graph(tmp_path / "v.txt", tmp_path / "e.txt")
    assert exc.value.ident == 5 and exc.value.line == 3


def test_unknown_vertex_in_edge(tmp_path):
    (tmp_path / "v.txt").write_text("1,0,0\n")
    (tmp_path / "e.txt").write_text("1,1,2\n")
    with pytest.raises(ParseError):
        read_graph(tmp_path / "v.txt", tmp_path / "e.txt")


def test_odd_geometry(tmp_path):
    (tmp_path / "v.txt").write_text("1,0,0\n2,10,0\n")
    (tmp_path / "e.txt").write_text("1,1,2,5 5 6\n")
    with pytest.raises(ParseError):
        read_graph(tmp_path / "v.txt", tmp_path / "e.txt")
