"""Graph sampling: marbles on C, holes on G, matched around random roots.

Each run picks a root location on C, spreads samples outward along C up to
``radius`` of graph distance (marbles) and does the same on G from the
closest location to the root (holes).  Marbles and holes closer than the
matched distance are paired by a maximum bipartite matching; unpaired
marbles are spurious and unpaired holes are missing road.
"""

import heapq
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree

from ..errors import InvalidInputError
from ..geometry import SegmentIndex
from .reports import GraphSamplingReport

# give up after this many roots per requested run
MAX_DRAWS_PER_RUN = 20


class _Sampler:
    """Graph-distance sampling on one graph."""

    def __init__(self, graph):
        self.graph = graph
        self.edges = [e for e in graph.iter_edges() if e.geometry.is_curve()]
        if not self.edges:
            raise InvalidInputError("graph has no edges to sample")
        self.lengths = np.array([e.length for e in self.edges])
        self.cum = np.concatenate(([0.0], np.cumsum(self.lengths)))
        self.index = SegmentIndex.from_polylines([e.geometry for e in self.edges])

    def random_location(self, rng):
        """Uniform location by length: (edge index, arc position)."""
        s = rng.uniform(0.0, self.cum[-1])
        k = int(np.clip(np.searchsorted(self.cum, s, side="right") - 1, 0, len(self.edges) - 1))
        return k, float(s - self.cum[k])

    def point(self, k, arc):
        return self.edges[k].geometry.point_at_arclength(arc)

    def locate(self, p):
        """Closest location on this graph: (distance, edge index, arc position)."""
        d, seg, t = self.index.nearest(np.asarray(p, dtype=float)[None, :])
        seg = int(seg[0])
        k = int(self.index.owner[seg])
        j = int(self.index.segno[seg])
        line = self.edges[k].geometry
        arc = line.cumulative[j] + float(t[0]) * (line.cumulative[j + 1] - line.cumulative[j])
        return float(d[0]), k, float(arc)

    def _distances(self, k, arc, radius):
        """Graph distance from the root to every vertex within ``radius``."""
        e = self.edges[k]
        dist = {}
        heap = [(arc, e.u), (e.length - arc, e.v)]
        heapq.heapify(heap)
        while heap:
            d, x = heapq.heappop(heap)
            if x in dist or d > radius:
                continue
            dist[x] = d
            for eid in self.graph.incident(x):
                f = self.graph.edge(eid)
                y = f.other(x)
                if y not in dist:
                    heapq.heappush(heap, (d + f.length, y))
        return dist

    def samples(self, k, arc, radius, density):
        """Points at graph distance 0, density, 2*density, ... up to radius."""
        dist = self._distances(k, arc, radius)
        chunks = []
        root = self.edges[k]
        steps = np.arange(-math.floor(radius / density), math.floor(radius / density) + 1) * density
        a = arc + steps
        a = a[(a >= 0.0) & (a <= root.length)]
        chunks.append(root.geometry.point_at_arclength(a))
        for j, e in enumerate(self.edges):
            if j == k:
                continue
            du, dv = dist.get(e.u, math.inf), dist.get(e.v, math.inf)
            if math.isinf(du) and math.isinf(dv):
                continue
            L = e.length
            # each position belongs to the side it is closer to (by graph distance)
            split = 0.5 * (dv + L - du) if math.isfinite(du) and math.isfinite(dv) else (L if math.isfinite(du) else 0.0)
            arcs = []
            if math.isfinite(du):
                first = (-du) % density
                top = min(radius - du, split, L)
                arcs.append(np.arange(first, top + 1e-9, density))
            if math.isfinite(dv):
                first = (-dv) % density
                top = min(radius - dv, L - split, L)
                back = np.arange(first, top + 1e-9, density)
                back = back[L - back > split] if math.isfinite(du) else back
                arcs.append(L - back)
            if arcs:
                a = np.concatenate(arcs)
                a = a[(a >= 0.0) & (a <= L)]
                if len(a):
                    chunks.append(e.geometry.point_at_arclength(a))
        return np.vstack(chunks) if chunks else np.zeros((0, 2))


def match_count(marbles, holes, matched_dist):
    """Size of a maximum matching between marbles and holes within ``matched_dist``."""
    if len(marbles) == 0 or len(holes) == 0:
        return 0
    near = cKDTree(marbles).query_ball_tree(cKDTree(holes), matched_dist)
    rows = np.repeat(np.arange(len(marbles)), [len(n) for n in near])
    cols = np.fromiter((c for n in near for c in n), dtype=int, count=len(rows))
    if len(rows) == 0:
        return 0
    m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(marbles), len(holes)))
    return int((maximum_bipartite_matching(m, perm_type="column") >= 0).sum())


def eval_graph_sampling(C, G, matched_dist, density=5.0, radius=300.0, runs=1000, seed=0, modified=True):
    """Precision / recall of C against G by local graph sampling.

    With ``modified`` (the default), roots whose closest G location is
    farther than ``matched_dist`` are skipped: such parts of C have no
    counterpart in G at all.  Skipped roots do not count toward ``runs``;
    their number is kept in the report.
    """
    for name, v in (("matched_dist", matched_dist), ("density", density), ("radius", radius)):
        if not v > 0:
            raise InvalidInputError(f"{name} must be positive")
    if runs < 1:
        raise InvalidInputError("runs must be at least 1")
    sc, sg = _Sampler(C), _Sampler(G)
    rng = np.random.default_rng(seed)
    totals = np.zeros(4, dtype=np.int64)
    rows = []
    skipped = 0
    for _ in range(runs * MAX_DRAWS_PER_RUN):
        if len(rows) == runs:
            break
        k, arc = sc.random_location(rng)
        root = sc.point(k, arc)
        gd, gk, garc = sg.locate(root)
        if modified and gd > matched_dist:
            skipped += 1
            continue
        marbles = sc.samples(k, arc, radius, density)
        holes = sg.samples(gk, garc, radius, density)
        if len(marbles) == 0 or len(holes) == 0:
            skipped += 1
            continue
        m = match_count(marbles, holes, matched_dist)
        totals += (m, len(marbles) - m, m, len(holes) - m)
        rows.append(
            {
                "run": len(rows),
                "root_x": float(root[0]),
                "root_y": float(root[1]),
                "root_edge": sc.edges[k].id,
                "marbles": len(marbles),
                "holes": len(holes),
                "matched": m,
            }
        )
    if not rows:
        raise InvalidInputError("no usable sampling runs; is C anywhere near G?")
    return GraphSamplingReport(*(int(x) for x in totals), rows, skipped, float(matched_dist))
