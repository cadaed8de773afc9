"""Density-grid map extraction.

Tracks are rasterized into a grid, blurred, thresholded and thinned to a
one-pixel skeleton, which is then traced into a vector graph.  The
multi-threshold variant unions the skeletons of a ladder of thresholds
before tracing, so faint roads survive next to busy ones.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize

from ..errors import InvalidInputError
from ..geometry import PolyLine, simplify
from ..graph import GraphBuilder, RoadGraph

_NEIGHBORS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass
class DensityGrid:
    """Per-cell track counts; row 0 is the southern edge."""

    counts: np.ndarray
    x0: float
    y0: float
    cell: float

    @property
    def shape(self):
        return self.counts.shape

    def center(self, rows, cols):
        rows = np.asarray(rows, dtype=float)
        cols = np.asarray(cols, dtype=float)
        return np.column_stack([self.x0 + (cols + 0.5) * self.cell, self.y0 + (rows + 0.5) * self.cell])

    def blurred(self, sigma):
        return ndimage.gaussian_filter(self.counts.astype(float), sigma, mode="constant")


def density_grid(tracks, cell=16.0, margin=3):
    """Count, for every cell, how many tracks pass through it."""
    lines = [PolyLine(getattr(t, "xy", t)) for t in tracks]
    lines = [ln for ln in lines if len(ln)]
    if not lines:
        raise InvalidInputError("no track points")
    pts = np.vstack([ln.points for ln in lines])
    lo = pts.min(axis=0) - margin * cell
    hi = pts.max(axis=0) + margin * cell
    ncols = int(math.ceil((hi[0] - lo[0]) / cell)) + 1
    nrows = int(math.ceil((hi[1] - lo[1]) / cell)) + 1
    counts = np.zeros((nrows, ncols), dtype=np.int32)
    for ln in lines:
        s = ln.sample(cell / 3.0) if ln.is_curve() else ln.points
        c = np.floor((s[:, 0] - lo[0]) / cell).astype(int)
        r = np.floor((s[:, 1] - lo[1]) / cell).astype(int)
        flat = np.unique(r * ncols + c)
        counts.flat[flat] += 1
    return DensityGrid(counts, float(lo[0]), float(lo[1]), float(cell))


# -- skeleton tracing ------------------------------------------------------


class _Sketch:
    """Small mutable graph used while cleaning up a traced skeleton."""

    def __init__(self):
        self.nodes = {}
        self.edges = {}
        self._next_node = 0
        self._next_edge = 0

    def add_node(self, p):
        k = self._next_node
        self._next_node += 1
        self.nodes[k] = np.asarray(p, dtype=float)
        return k

    def add_edge(self, u, v, pts):
        k = self._next_edge
        self._next_edge += 1
        self.edges[k] = (u, v, np.asarray(pts, dtype=float))
        return k

    def incident(self):
        inc = {n: [] for n in self.nodes}
        for k, (u, v, _) in sorted(self.edges.items()):
            inc[u].append(k)
            inc[v].append(k)
        return inc

    @staticmethod
    def length(pts):
        return float(np.hypot(*np.diff(pts, axis=0).T).sum()) if len(pts) > 1 else 0.0

    def prune_spurs(self, min_len):
        """Repeatedly drop dead-end edges shorter than ``min_len`` that hang off a junction."""
        changed = True
        while changed:
            changed = False
            inc = self.incident()
            for k in sorted(self.edges):
                u, v, pts = self.edges[k]
                du, dv = len(inc[u]), len(inc[v])
                if u == v or self.length(pts) >= min_len:
                    continue
                if (du == 1 and dv >= 3) or (dv == 1 and du >= 3):
                    del self.edges[k]
                    leaf = u if du == 1 else v
                    del self.nodes[leaf]
                    changed = True
                    break
        self.drop_isolated()

    def contract_short(self, min_len):
        """Merge junction pairs joined by an edge shorter than ``min_len``."""
        changed = True
        while changed:
            changed = False
            inc = self.incident()
            for k in sorted(self.edges):
                u, v, pts = self.edges[k]
                if u == v or self.length(pts) >= min_len or len(inc[u]) < 3 or len(inc[v]) < 3:
                    continue
                mid = (self.nodes[u] + self.nodes[v]) / 2.0
                del self.edges[k]
                self.nodes[u] = mid
                for j in inc[v]:
                    if j not in self.edges:
                        continue
                    a, b, q = self.edges[j]
                    a = u if a == v else a
                    b = u if b == v else b
                    self.edges[j] = (a, b, q)
                del self.nodes[v]
                for j in inc[u] + inc[v]:
                    if j in self.edges:
                        a, b, q = self.edges[j]
                        q = q.copy()
                        q[0], q[-1] = self.nodes[a], self.nodes[b]
                        self.edges[j] = (a, b, q)
                changed = True
                break
        self.drop_degenerate(min_len)

    def drop_degenerate(self, min_len):
        """Remove short self-loops and short parallel duplicates."""
        seen = {}
        for k in sorted(self.edges, key=lambda k: (self.length(self.edges[k][2]), k)):
            u, v, pts = self.edges[k]
            if u == v and self.length(pts) < 4 * min_len:
                del self.edges[k]
                continue
            key = (min(u, v), max(u, v))
            if key in seen and self.length(pts) < seen[key] + 2 * min_len:
                del self.edges[k]
                continue
            seen.setdefault(key, self.length(pts))
        self.drop_isolated()

    def drop_isolated(self):
        used = {x for u, v, _ in self.edges.values() for x in (u, v)}
        for n in list(self.nodes):
            if n not in used:
                del self.nodes[n]

    def dissolve_degree_two(self):
        changed = True
        while changed:
            changed = False
            inc = self.incident()
            for n in sorted(self.nodes):
                es = inc[n]
                if len(es) != 2 or es[0] == es[1]:
                    continue
                (a1, b1, p1), (a2, b2, p2) = self.edges[es[0]], self.edges[es[1]]
                if a1 == b1 or a2 == b2:
                    continue
                p1 = p1 if b1 == n else p1[::-1]
                p2 = p2 if a2 == n else p2[::-1]
                x = a1 if b1 == n else b1
                y = b2 if a2 == n else a2
                if x == n or y == n:
                    continue
                del self.edges[es[0]]
                del self.edges[es[1]]
                del self.nodes[n]
                self.add_edge(x, y, np.vstack([p1, p2[1:]]))
                changed = True
                break

    def to_graph(self, tolerance):
        b = GraphBuilder()
        ids = {n: b.add_vertex(self.nodes[n]) for n in sorted(self.nodes)}
        for k in sorted(self.edges):
            u, v, pts = self.edges[k]
            pts = simplify(pts, tolerance) if tolerance > 0 else pts
            b.add_edge(ids[u], ids[v], pts[1:-1])
        g = b.freeze()
        used = {x for e in g.iter_edges() for x in (e.u, e.v)}
        return RoadGraph({k: g.vertices[k] for k in sorted(used)}, list(g.iter_edges()))


def trace_skeleton(skel, grid):
    """Turn a one-pixel-wide skeleton bitmap into a :class:`_Sketch`."""
    skel = np.asarray(skel, dtype=bool)
    nb = ndimage.convolve(skel.astype(np.int32), np.ones((3, 3), dtype=np.int32), mode="constant") - 1
    nb[~skel] = 0
    node_mask = skel & (nb != 2)
    labels, nlab = ndimage.label(node_mask, structure=np.ones((3, 3)))
    sk = _Sketch()
    rows, cols = skel.shape

    def center(r, c):
        return grid.center([r], [c])[0]

    cluster_node = {}
    for lab in range(1, nlab + 1):
        rr, cc = np.nonzero(labels == lab)
        cluster_node[lab] = sk.add_node(grid.center(rr, cc).mean(axis=0))

    def neighbors(r, c):
        for dr, dc in _NEIGHBORS:
            y, x = r + dr, c + dc
            if 0 <= y < rows and 0 <= x < cols and skel[y, x]:
                yield y, x

    visited = set()

    def walk(start_node, prev, cur):
        pts = [sk.nodes[start_node], center(*cur)]
        while True:
            lab = labels[cur]
            if lab:
                pts[-1] = sk.nodes[cluster_node[lab]]
                return cluster_node[lab], pts
            visited.add(cur)
            nxt = [q for q in neighbors(*cur) if q != prev and q not in visited]
            # prefer a node pixel when the chain touches one
            nodes_first = sorted(nxt, key=lambda q: (labels[q] == 0, q))
            if not nodes_first:
                return None, pts
            prev, cur = cur, nodes_first[0]
            pts.append(center(*cur))

    node_pixels = np.argwhere(node_mask)
    for r, c in node_pixels:
        lab = labels[r, c]
        for q in neighbors(r, c):
            if labels[q] == lab or q in visited:
                continue
            if labels[q]:
                # two different clusters touching diagonally are one node
                continue
            end, pts = walk(cluster_node[lab], (r, c), q)
            if end is None:
                end = sk.add_node(pts[-1])
            sk.add_edge(cluster_node[lab], end, pts)
    # closed loops with no node pixel at all
    for r, c in np.argwhere(skel):
        if (r, c) in visited or labels[r, c]:
            continue
        n = sk.add_node(center(r, c))
        visited.add((r, c))
        first = next(iter(neighbors(r, c)), None)
        if first is None or first in visited:
            continue
        end, pts = walk(n, (r, c), first)
        pts.append(sk.nodes[n])
        sk.add_edge(n, n, pts)
    return sk


def skeleton_bitmap(density, threshold, multi_threshold=False):
    if not multi_threshold:
        return skeletonize(density >= threshold)
    union = np.zeros(density.shape, dtype=bool)
    level = threshold
    top = density.max()
    while level <= top:
        union |= skeletonize(density >= level)
        level *= 2.0
    return skeletonize(union)


def construct_kde(tracks, cell=16.0, blur=1.0, threshold=5.0, multi_threshold=False, spur=3.0):
    """Extract a map from the blurred track density.

    ``blur`` is the Gaussian sigma in cells and ``threshold`` the blurred
    track count a cell needs to count as road.  Dead-end spurs shorter than
    ``spur`` cells are pruned.
    """
    if not cell > 0 or not threshold > 0:
        raise InvalidInputError("cell and threshold must be positive")
    tracks = list(tracks)
    if not tracks:
        raise InvalidInputError("no tracks to construct from")
    grid = density_grid(tracks, cell)
    density = grid.blurred(blur) if blur > 0 else grid.counts.astype(float)
    if threshold > density.max():
        warnings.warn(f"threshold {threshold} exceeds the maximum density {density.max():.3f}; map is empty", stacklevel=2)
        return RoadGraph()
    skel = skeleton_bitmap(density, threshold, multi_threshold)
    sk = trace_skeleton(skel, grid)
    sk.dissolve_degree_two()
    sk.prune_spurs(spur * cell)
    sk.dissolve_degree_two()
    sk.contract_short(2.0 * cell)
    sk.dissolve_degree_two()
    return sk.to_graph(cell / 4.0)
