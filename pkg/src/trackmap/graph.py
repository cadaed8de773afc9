"""Undirected geometric street graphs.

Vertices are embedded points; every edge carries a polyline whose first and
last points coincide with its endpoint embeddings.  :class:`RoadGraph` is
read-only once built; constructors assemble graphs with
:class:`GraphBuilder`.
"""

import heapq
import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .errors import InvalidInputError
from .geometry import PolyLine, as_polyline

# geometry endpoints farther than this from their vertex count as a mismatch
GEOMETRY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    geometry: PolyLine

    @property
    def length(self):
        return self.geometry.length

    def other(self, vertex):
        return self.v if vertex == self.u else self.u


@dataclass(frozen=True)
class Violation:
    rule: str
    ident: object
    detail: str = ""


@dataclass(frozen=True)
class GraphStats:
    vertices: int
    edges: int
    length_km: float

    def as_tuple(self):
        return (self.vertices, self.edges, self.length_km)


class GraphPath:
    """A walk through the graph as ``(edge id, forward)`` steps.

    ``forward`` means the edge is traversed from its ``u`` to its ``v``.
    A path with no steps sits at ``origin``.
    """

    __slots__ = ("graph", "steps", "origin")

    def __init__(self, graph, steps, origin=None):
        self.graph = graph
        self.steps = tuple(steps)
        if origin is None:
            if not self.steps:
                raise InvalidInputError("an empty path needs an origin vertex")
            e = graph.edge(self.steps[0][0])
            origin = e.u if self.steps[0][1] else e.v
        self.origin = origin

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        return f"GraphPath({list(self.edge_ids)}, origin={self.origin})"

    def __eq__(self, other):
        return isinstance(other, GraphPath) and self.steps == other.steps and self.origin == other.origin

    def __hash__(self):
        return hash((self.steps, self.origin))

    @property
    def edge_ids(self):
        return tuple(e for e, _ in self.steps)

    @property
    def vertices(self):
        out = [self.origin]
        for eid, fwd in self.steps:
            e = self.graph.edge(eid)
            out.append(e.v if fwd else e.u)
        return tuple(out)

    @property
    def length(self):
        return sum(self.graph.edge(e).length for e in self.edge_ids)

    def polyline(self):
        if not self.steps:
            return PolyLine([self.graph.vertex(self.origin)])
        parts = []
        for eid, fwd in self.steps:
            pts = self.graph.edge(eid).geometry.points
            parts.append(pts if fwd else pts[::-1])
        return PolyLine(np.vstack(parts))

    def is_valid(self):
        """Consecutive edges chain through shared vertices and no edge repeats."""
        if len(set(self.edge_ids)) != len(self.steps):
            return False
        at = self.origin
        for eid, fwd in self.steps:
            e = self.graph.edge(eid)
            start, end = (e.u, e.v) if fwd else (e.v, e.u)
            if start != at:
                return False
            at = end
        return True

    def reversed(self):
        if not self.steps:
            return self
        end = self.vertices[-1]
        return GraphPath(self.graph, [(e, not f) for e, f in reversed(self.steps)], origin=end)


class RoadGraph:
    """Read-only undirected geometric graph."""

    def __init__(self, vertices=None, edges=()):
        verts = {}
        for vid, p in (vertices or {}).items():
            verts[vid] = (float(p[0]), float(p[1]))
        self._vertices = MappingProxyType(verts)
        es = {}
        for e in edges:
            if not isinstance(e, Edge):
                eid, u, v, geom = e
                if geom is None:
                    geom = PolyLine([verts[u], verts[v]]) if u in verts and v in verts else PolyLine([])
                e = Edge(eid, u, v, as_polyline(geom))
            if e.id in es:
                raise InvalidInputError(f"duplicate edge id {e.id}")
            es[e.id] = e
        self._edges = MappingProxyType(es)
        adj = {vid: [] for vid in verts}
        for e in es.values():
            if e.u in adj:
                adj[e.u].append(e.id)
            if e.v in adj and e.v != e.u:
                adj[e.v].append(e.id)
        self._adj = MappingProxyType({k: tuple(sorted(v)) for k, v in adj.items()})

    @property
    def vertices(self):
        return self._vertices

    @property
    def edges(self):
        return self._edges

    def vertex(self, vid):
        return np.asarray(self._vertices[vid])

    def edge(self, eid):
        return self._edges[eid]

    def iter_edges(self):
        for eid in sorted(self._edges):
            yield self._edges[eid]

    def incident(self, vid):
        return self._adj.get(vid, ())

    def degree(self, vid):
        d = 0
        for eid in self._adj.get(vid, ()):
            e = self._edges[eid]
            d += 2 if e.u == e.v else 1
        return d

    def __len__(self):
        return len(self._vertices)

    def __repr__(self):
        return f"RoadGraph(vertices={len(self._vertices)}, edges={len(self._edges)})"

    def is_empty(self):
        return not self._vertices

    def total_length(self):
        return float(sum(e.length for e in self._edges.values()))

    def bbox(self):
        pts = self.all_points()
        if len(pts) == 0:
            raise InvalidInputError("empty graph has no bounding box")
        return (*pts.min(axis=0), *pts.max(axis=0))

    def all_points(self):
        parts = [np.asarray(list(self._vertices.values()), dtype=float).reshape(-1, 2)]
        parts += [e.geometry.points for e in self._edges.values()]
        return np.vstack(parts)

    def polylines(self):
        return [e.geometry for e in self.iter_edges() if e.geometry.is_curve()]

    def translated(self, dx, dy):
        return RoadGraph(
            {k: (p[0] + dx, p[1] + dy) for k, p in self._vertices.items()},
            [Edge(e.id, e.u, e.v, e.geometry.translated(dx, dy)) for e in self.iter_edges()],
        )

    def subgraph(self, edge_ids):
        keep = [self._edges[e] for e in sorted(edge_ids)]
        used = {x for e in keep for x in (e.u, e.v)}
        return RoadGraph({k: self._vertices[k] for k in sorted(used)}, keep)

    def without_edges(self, edge_ids):
        drop = set(edge_ids)
        return RoadGraph(dict(self._vertices), [e for e in self.iter_edges() if e.id not in drop])

    def components(self):
        """Map vertex id -> component label (smallest vertex id in the component)."""
        label = {}
        for start in sorted(self._vertices):
            if start in label:
                continue
            stack = [start]
            label[start] = start
            while stack:
                x = stack.pop()
                for eid in self._adj[x]:
                    y = self._edges[eid].other(x)
                    if y not in label:
                        label[y] = start
                        stack.append(y)
        return label


class GraphBuilder:
    """Mutable graph under construction; ``freeze()`` yields a RoadGraph."""

    def __init__(self):
        self.vertices = {}
        self.edges = {}
        self._next_vertex = 0
        self._next_edge = 0
        self._pairs = {}
        self.incident = {}

    def add_vertex(self, point):
        vid = self._next_vertex
        self._next_vertex += 1
        self.vertices[vid] = (float(point[0]), float(point[1]))
        self.incident[vid] = set()
        return vid

    def add_edge(self, u, v, points=None):
        """Add an edge; geometry endpoints are pinned to the vertex embeddings."""
        if points is None:
            pts = np.array([self.vertices[u], self.vertices[v]])
        else:
            pts = np.array(points, dtype=float).reshape(-1, 2)
            pts = np.vstack([self.vertices[u], pts, self.vertices[v]])
        line = PolyLine(pts)
        if not line.is_curve():
            return None
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = (u, v, line)
        key = (min(u, v), max(u, v))
        self._pairs[key] = self._pairs.get(key, 0) + 1
        self.incident[u].add(eid)
        self.incident[v].add(eid)
        return eid

    def remove_edge(self, eid):
        u, v, line = self.edges.pop(eid)
        key = (min(u, v), max(u, v))
        self._pairs[key] -= 1
        if not self._pairs[key]:
            del self._pairs[key]
        self.incident[u].discard(eid)
        self.incident[v].discard(eid)
        return u, v, line

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self._pairs

    def split_edge(self, eid, positions, snap=1e-6):
        """Split edge ``eid`` at ``positions``, a list of (segment, t) locations.

        Returns one vertex id per position, reusing an endpoint (or another
        split point) when within ``snap`` meters of it.
        """
        u, v, line = self.edges[eid]
        pts = line.points
        cum = line.cumulative
        total = line.length
        arcs = []
        for seg, t in positions:
            arcs.append(float(cum[seg] + t * (cum[seg + 1] - cum[seg])))
        order = sorted(range(len(arcs)), key=lambda k: arcs[k])
        result = [None] * len(arcs)
        cuts = []  # (arc, vertex id)
        for k in order:
            d = arcs[k]
            if d <= snap:
                result[k] = u
            elif total - d <= snap:
                result[k] = v
            elif cuts and d - cuts[-1][0] <= snap:
                result[k] = cuts[-1][1]
            else:
                p = line.point_at_arclength(d)
                vid = self.add_vertex(p)
                cuts.append((d, vid))
                result[k] = vid
        if not cuts:
            return result
        self.remove_edge(eid)
        bounds = [(0.0, u)] + cuts + [(total, v)]
        for (d0, a), (d1, b) in zip(bounds[:-1], bounds[1:]):
            inner = pts[(cum > d0) & (cum < d1)]
            self.add_edge(a, b, inner)
        return result

    def degree(self, vid):
        return sum(1 + (self.edges[e][0] == self.edges[e][1]) for e in self.incident[vid])

    def within(self, sources, limit):
        """Vertices reachable from ``sources`` (vertex -> start distance) within ``limit``."""
        dist = dict(sources)
        heap = [(d, v) for v, d in dist.items()]
        heapq.heapify(heap)
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist.get(x, math.inf):
                continue
            for eid in self.incident[x]:
                u, v, line = self.edges[eid]
                y = v if u == x else u
                nd = d + line.length
                if nd <= limit and nd < dist.get(y, math.inf):
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        return dist

    def freeze(self):
        return RoadGraph(self.vertices, [(eid, u, v, line) for eid, (u, v, line) in sorted(self.edges.items())])


def validate_graph(graph):
    """Check the RoadGraph invariants; returns a list of :class:`Violation`."""
    out = []
    for e in graph.iter_edges():
        missing = [x for x in (e.u, e.v) if x not in graph.vertices]
        if missing:
            out.append(Violation("dangling-endpoint", e.id, f"missing vertex {missing[0]}"))
            continue
        g = e.geometry
        if len(g) == 0:
            out.append(Violation("empty-geometry", e.id))
            continue
        d0 = math.dist(g.start, graph.vertices[e.u])
        d1 = math.dist(g.end, graph.vertices[e.v])
        if d0 > GEOMETRY_TOLERANCE or d1 > GEOMETRY_TOLERANCE:
            out.append(Violation("geometry-mismatch", e.id, f"endpoint offset {max(d0, d1):.6g} m"))
        if g.length == 0.0:
            rule = "zero-length-loop" if e.u == e.v else "zero-length-edge"
            out.append(Violation(rule, e.id))
    for vid, p in graph.vertices.items():
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            out.append(Violation("non-finite-vertex", vid))
    return out


def graph_stats(graph):
    """Vertex count (degree-two vertices included), edge count, total km."""
    return GraphStats(len(graph.vertices), len(graph.edges), graph.total_length() / 1000.0)


def _check_vertex(graph, vid):
    if vid not in graph.vertices:
        raise InvalidInputError(f"unknown vertex id {vid}")


def _edge_sequence(pred, graph, v):
    seq = []
    while pred[v] is not None:
        eid = pred[v]
        seq.append(eid)
        v = graph.edge(eid).other(v)
    return tuple(reversed(seq))


def shortest_path(graph, s, t):
    """Minimum-length path from s to t, or None when t is unreachable.

    Edge weights are geometric lengths.  Among equal-length paths the one
    with the lexicographically smallest edge-id sequence wins.
    """
    _check_vertex(graph, s)
    _check_vertex(graph, t)
    if s == t:
        return GraphPath(graph, (), origin=s)
    dist = {s: 0.0}
    pred = {s: None}
    done = set()
    heap = [(0.0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == t:
            break
        for eid in graph.incident(x):
            e = graph.edge(eid)
            y = e.other(x)
            if y in done:
                continue
            nd = d + e.length
            old = dist.get(y, math.inf)
            tie = math.isclose(nd, old, rel_tol=1e-12, abs_tol=1e-9)
            if tie:
                cand = _edge_sequence(pred, graph, x) + (eid,)
                if cand < _edge_sequence(pred, graph, y):
                    pred[y] = eid
                    dist[y] = min(old, nd)
            elif nd < old:
                dist[y] = nd
                pred[y] = eid
                heapq.heappush(heap, (nd, y))
    if t not in done:
        return None
    steps = []
    v = t
    while pred[v] is not None:
        e = graph.edge(pred[v])
        u = e.other(v)
        steps.append((e.id, e.u == u and e.v == v))
        v = u
    return GraphPath(graph, list(reversed(steps)), origin=s)


def shortest_path_length(graph, s, t):
    p = shortest_path(graph, s, t)
    return None if p is None else p.length


def nearest_vertex(graph, p):
    """Vertex closest to ``p``; ties go to the smaller id."""
    if graph.is_empty():
        raise InvalidInputError("graph has no vertices")
    ids = np.array(sorted(graph.vertices))
    pts = np.array([graph.vertices[i] for i in ids])
    d = np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
    return int(ids[int(np.argmin(d))])


class VertexLocator:
    """Repeated nearest-vertex queries with a k-d tree and the same tie rule."""

    def __init__(self, graph):
        from scipy.spatial import cKDTree

        if graph.is_empty():
            raise InvalidInputError("graph has no vertices")
        self.ids = np.array(sorted(graph.vertices))
        self.pts = np.array([graph.vertices[i] for i in self.ids])
        self.tree = cKDTree(self.pts)

    def __call__(self, p):
        d, _ = self.tree.query(p)
        near = self.tree.query_ball_point(p, d * (1 + 1e-12) + 1e-12)
        return int(self.ids[min(near)])


# -- link paths --------------------------------------------------------------


@dataclass(frozen=True)
class Link:
    """A maximal chain of edges whose interior vertices have degree two."""

    id: int
    a: int
    b: int
    steps: tuple  # (edge id, forward) from a to b


def graph_links(graph):
    """Decompose the graph into links between vertices of degree != 2.

    Cycles made only of degree-two vertices are anchored at their smallest
    vertex id.  Links are numbered in a deterministic order.
    """
    anchors = {v for v in graph.vertices if graph.degree(v) != 2}
    used = set()
    links = []

    def walk(start, eid):
        steps = []
        x = start
        while True:
            e = graph.edge(eid)
            used.add(eid)
            fwd = e.u == x
            steps.append((eid, fwd))
            y = e.v if fwd else e.u
            if y in anchors or y == start:
                return y, tuple(steps)
            nxt = [f for f in graph.incident(y) if f not in used]
            if not nxt:
                return y, tuple(steps)
            x, eid = y, nxt[0]

    for v in sorted(anchors):
        for eid in graph.incident(v):
            if eid in used:
                continue
            end, steps = walk(v, eid)
            links.append(Link(len(links), v, end, steps))
    for v in sorted(graph.vertices):
        for eid in graph.incident(v):
            if eid in used:
                continue
            anchors.add(v)
            end, steps = walk(v, eid)
            links.append(Link(len(links), v, end, steps))
    return links


def enumerate_link_paths(graph, k):
    """Every path of exactly k links, plus shorter maximal ones at dead ends.

    A link never repeats within a path; vertices may (the path is allowed to
    close a cycle).  Paths equal up to reversal are reported once.
    """
    if k not in (1, 2, 3):
        raise InvalidInputError("k must be 1, 2 or 3")
    links = graph_links(graph)
    at = {}
    for ln in links:
        at.setdefault(ln.a, []).append((ln.id, True))
        if ln.b != ln.a:
            at.setdefault(ln.b, []).append((ln.id, False))
        else:
            at.setdefault(ln.a, []).append((ln.id, False))

    def end_of(lid, fwd):
        ln = links[lid]
        return ln.b if fwd else ln.a

    def start_of(lid, fwd):
        ln = links[lid]
        return ln.a if fwd else ln.b

    def can_extend(seq):
        used = {l for l, _ in seq}
        tail = end_of(*seq[-1])
        head = start_of(*seq[0])
        if any(l not in used for l, _ in at.get(tail, ())):
            return True
        return any(l not in used for l, _ in at.get(head, ()))

    found = {}

    def extend(seq):
        if len(seq) == k:
            emit(seq)
            return
        used = {l for l, _ in seq}
        tail = end_of(*seq[-1])
        options = [(l, f) for l, f in at.get(tail, ()) if l not in used]
        if not options and not can_extend(seq):
            emit(seq)
            return
        for l, f in options:
            extend(seq + [(l, f)])

    def emit(seq):
        key = tuple(seq)
        rev = tuple((l, not f) for l, f in reversed(seq))
        canon = min(key, rev)
        if canon not in found:
            found[canon] = canon

    for ln in links:
        extend([(ln.id, True)])
        extend([(ln.id, False)])

    paths = []
    for canon in sorted(found):
        steps = []
        for lid, fwd in canon:
            ln = links[lid]
            if fwd:
                steps.extend(ln.steps)
            else:
                steps.extend((e, not f) for e, f in reversed(ln.steps))
        paths.append(GraphPath(graph, steps, origin=start_of(*canon[0])))
    return paths
