"""Plain-text graph files.

Vertex file lines are ``id,x,y``.  Edge file lines are ``id,u,v`` with an
optional fourth field holding the interior geometry as space separated
``x y`` pairs; without it the edge is the straight segment u-v.
"""

from pathlib import Path

import numpy as np

from .errors import DuplicateIdError, ParseError
from .geometry import PolyLine
from .graph import Edge, RoadGraph


def _fmt(x):
    return repr(float(x))


def _parse_int(text, path, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad {what} {text!r}", path, lineno) from None


def _parse_float(text, path, lineno, what):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"bad {what} {text!r}", path, lineno) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite {what} {text!r}", path, lineno)
    return value


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                yield lineno, line


def read_vertices(path):
    verts = {}
    for lineno, line in _lines(path):
        fields = line.split(",")
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", path, lineno)
        vid = _parse_int(fields[0], path, lineno, "vertex id")
        if vid in verts:
            raise DuplicateIdError("vertex", vid, path, lineno)
        verts[vid] = (_parse_float(fields[1], path, lineno, "x"), _parse_float(fields[2], path, lineno, "y"))
    return verts


def read_edges(path, vertices):
    edges = []
    seen = set()
    for lineno, line in _lines(path):
        fields = line.split(",")
        if len(fields) not in (3, 4):
            raise ParseError(f"expected 3 or 4 fields, got {len(fields)}", path, lineno)
        eid = _parse_int(fields[0], path, lineno, "edge id")
        u = _parse_int(fields[1], path, lineno, "vertex id")
        v = _parse_int(fields[2], path, lineno, "vertex id")
        if eid in seen:
            raise DuplicateIdError("edge", eid, path, lineno)
        seen.add(eid)
        for x in (u, v):
            if x not in vertices:
                raise ParseError(f"edge {eid} references unknown vertex {x}", path, lineno)
        inner = []
        if len(fields) == 4 and fields[3].strip():
            nums = fields[3].split()
            if len(nums) % 2:
                raise ParseError("odd number of geometry coordinates", path, lineno)
            vals = [_parse_float(t, path, lineno, "coordinate") for t in nums]
            inner = list(zip(vals[0::2], vals[1::2]))
        pts = [vertices[u], *inner, vertices[v]]
        edges.append(Edge(eid, u, v, PolyLine(pts)))
    return edges


def read_graph(vertex_file, edge_file):
    verts = read_vertices(vertex_file)
    return RoadGraph(verts, read_edges(edge_file, verts))


def write_graph(graph, vertex_file, edge_file):
    """Write ``graph``; floats use repr so a read gives back the same values."""
    vertex_file, edge_file = Path(vertex_file), Path(edge_file)
    with open(vertex_file, "w", encoding="utf-8", newline="\n") as fh:
        for vid in sorted(graph.vertices):
            x, y = graph.vertices[vid]
            fh.write(f"{vid},{_fmt(x)},{_fmt(y)}\n")
    with open(edge_file, "w", encoding="utf-8", newline="\n") as fh:
        for e in graph.iter_edges():
            inner = e.geometry.points[1:-1]
            line = f"{e.id},{e.u},{e.v}"
            if len(inner):
                line += "," + " ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in inner)
            fh.write(line + "\n")
    return vertex_file, edge_file


def read_graph_dir(directory):
    d = Path(directory)
    return read_graph(d / "vertices.txt", d / "edges.txt")


def write_graph_dir(graph, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    return write_graph(graph, d / "vertices.txt", d / "edges.txt")
