"""Track clarification by mutual attraction, then local incremental insertion.

Clarification pulls measurements of different tracks that travel the same
way toward each other, which tightens bundles of noisy tracks.  Insertion
then streams measurements and decides, one at a time, whether each one
merges into an existing edge (close by and heading the same way) or starts
new geometry.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidInputError
from ..geometry import angle_difference, bearing, bearings, point_segment_distance
from ..graph import GraphBuilder
from ..tracks import Track


def _headings(xy):
    if len(xy) < 2:
        return np.zeros(len(xy))
    b = bearings(xy)
    return np.append(b, b[-1])


def clarify_tracks(tracks, radius=30.0, iterations=5, damping=0.5, bearing_tol=45.0):
    """Attract measurements toward nearby same-direction measurements of other tracks.

    Each iteration moves every point a fraction ``damping`` of the way to
    the weighted centroid of itself (weight 1) and all compatible points of
    other tracks within ``radius`` (weight ``1 - d / radius``).
    """
    if not radius > 0:
        raise InvalidInputError("attraction radius must be positive")
    if iterations < 1:
        raise InvalidInputError("iterations must be at least 1")
    tracks = list(tracks)
    if len(tracks) < 2:
        return tracks
    sizes = [len(t.xy) for t in tracks]
    owner = np.repeat(np.arange(len(tracks)), sizes)
    xy = np.vstack([t.xy for t in tracks]).astype(float)
    bounds = np.cumsum([0] + sizes)
    for _ in range(iterations):
        heading = np.concatenate([_headings(xy[a:b]) for a, b in zip(bounds[:-1], bounds[1:])])
        pairs = cKDTree(xy).query_pairs(radius, output_type="ndarray")
        if len(pairs) == 0:
            break
        i, j = pairs[:, 0], pairs[:, 1]
        keep = (owner[i] != owner[j]) & (angle_difference(heading[i], heading[j]) <= bearing_tol)
        i, j = i[keep], j[keep]
        d = np.hypot(*(xy[i] - xy[j]).T)
        w = 1.0 - d / radius
        wsum = np.ones(len(xy))
        acc = xy.copy()
        np.add.at(wsum, i, w)
        np.add.at(wsum, j, w)
        np.add.at(acc, i, w[:, None] * xy[j])
        np.add.at(acc, j, w[:, None] * xy[i])
        centroid = acc / wsum[:, None]
        xy = xy + damping * (centroid - xy)
    out = []
    for t, a, b in zip(tracks, bounds[:-1], bounds[1:]):
        out.append(Track(t.id, xy[a:b], t.t, t.heading, t.speed) if isinstance(t, Track) else xy[a:b])
    return out


class _EdgeGrid:
    """Uniform grid over edge segments, kept in sync with a GraphBuilder."""

    def __init__(self, builder, size):
        self.builder = builder
        self.size = size
        self.cells = {}
        self.where = {}

    def _cells_of(self, pts):
        keys = set()
        s = self.size
        for a, b in zip(pts[:-1], pts[1:]):
            x0, x1 = sorted((a[0], b[0]))
            y0, y1 = sorted((a[1], b[1]))
            for cx in range(math.floor(x0 / s), math.floor(x1 / s) + 1):
                for cy in range(math.floor(y0 / s), math.floor(y1 / s) + 1):
                    keys.add((cx, cy))
        return keys

    def add(self, eid):
        keys = self._cells_of(self.builder.edges[eid][2].points)
        self.where[eid] = keys
        for k in keys:
            self.cells.setdefault(k, set()).add(eid)

    def remove(self, eid):
        for k in self.where.pop(eid, ()):
            self.cells[k].discard(eid)

    def near(self, lo, hi):
        s = self.size
        out = set()
        for cx in range(math.floor(lo[0] / s), math.floor(hi[0] / s) + 1):
            for cy in range(math.floor(lo[1] / s), math.floor(hi[1] / s) + 1):
                out |= self.cells.get((cx, cy), set())
        return sorted(out)


class LocalInserter:
    """Stateful local insertion; feed tracks with :meth:`add_track`."""

    def __init__(self, proximity=20.0, bearing_tol=45.0):
        if not proximity > 0:
            raise InvalidInputError("proximity must be positive")
        self.proximity = proximity
        self.bearing_tol = bearing_tol
        self.builder = GraphBuilder()
        self.grid = _EdgeGrid(self.builder, max(proximity * 2.0, 1.0))
        self.own = set()

    # -- graph edits keeping the grid current -------------------------------

    def _add_edge(self, u, v, inner=None):
        eid = self.builder.add_edge(u, v, inner)
        if eid is not None:
            self.grid.add(eid)
            self.own.add(eid)
        return eid

    def _split(self, eid, seg, t):
        before = set(self.builder.edges)
        vid = self.builder.split_edge(eid, [(seg, t)])[0]
        if eid not in self.builder.edges:
            self.grid.remove(eid)
            was_own = eid in self.own
            self.own.discard(eid)
            for new in set(self.builder.edges) - before:
                self.grid.add(new)
                if was_own:
                    self.own.add(new)
        return vid

    # -- queries ------------------------------------------------------------

    def _match(self, p, heading):
        """Nearest compatible (edge, segment, t) within proximity, or None."""
        r = self.proximity
        best = None
        for eid in self.grid.near(p - r, p + r):
            if eid in self.own:
                continue
            pts = self.builder.edges[eid][2].points
            a, b = pts[:-1], pts[1:]
            d = point_segment_distance(p[None, :], a, b)
            axis = bearings(pts)
            ok = (d <= r) & (np.minimum(angle_difference(axis, heading), angle_difference(axis + 180.0, heading)) <= self.bearing_tol)
            if not ok.any():
                continue
            k = int(np.flatnonzero(ok)[np.argmin(d[ok])])
            if best is None or d[k] < best[0]:
                ab = b[k] - a[k]
                t = float(np.clip(np.dot(p - a[k], ab) / np.dot(ab, ab), 0.0, 1.0))
                best = (float(d[k]), eid, k, t)
        return None if best is None else best[1:]

    def _crossings(self, p, q):
        """Proper crossings of segment p-q with existing edges at a steep angle."""
        lo = np.minimum(p, q)
        hi = np.maximum(p, q)
        axis_pq = bearing(p, q)
        hits = []
        for eid in self.grid.near(lo, hi):
            pts = self.builder.edges[eid][2].points
            a, b = pts[:-1], pts[1:]
            r = q - p
            s = b - a
            denom = r[0] * s[:, 1] - r[1] * s[:, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = ((a[:, 0] - p[0]) * s[:, 1] - (a[:, 1] - p[1]) * s[:, 0]) / denom
                u = ((a[:, 0] - p[0]) * r[1] - (a[:, 1] - p[1]) * r[0]) / denom
            ok = (denom != 0) & (t > 1e-9) & (t < 1 - 1e-9) & (u > 1e-9) & (u < 1 - 1e-9)
            for k in np.flatnonzero(ok):
                axis = bearing(a[k], b[k])
                steep = min(angle_difference(axis, axis_pq), angle_difference(axis + 180.0, axis_pq))
                if steep > self.bearing_tol:
                    hits.append((float(t[k]), eid, int(k), float(u[k])))
        hits.sort()
        # one crossing per edge: later splits would invalidate segment numbers
        seen, out = set(), []
        for h in hits:
            if h[1] not in seen:
                seen.add(h[1])
                out.append(h)
        return out

    def _on_edge(self, p, tol=1e-6):
        """Vertex at ``p`` if it touches an existing edge, else None."""
        for eid in self.grid.near(p - tol, p + tol):
            pts = self.builder.edges[eid][2].points
            a, b = pts[:-1], pts[1:]
            d = point_segment_distance(p[None, :], a, b)
            k = int(np.argmin(d))
            if d[k] <= tol:
                ab = b[k] - a[k]
                t = float(np.clip(np.dot(p - a[k], ab) / np.dot(ab, ab), 0.0, 1.0))
                return self._split(eid, k, t)
        return None

    def _link(self, u, v):
        """Join u and v by a straight edge, cutting in at steep crossings."""
        if u == v or self.builder.has_edge(u, v):
            return
        p = np.asarray(self.builder.vertices[u])
        q = np.asarray(self.builder.vertices[v])
        at = u
        for _, eid, k, t in self._crossings(p, q):
            if eid not in self.builder.edges:
                continue
            w = self._split(eid, k, t)
            if w != at:
                self._add_edge(at, w)
                at = w
        if at != v and not self.builder.has_edge(at, v):
            self._add_edge(at, v)

    # -- streaming ----------------------------------------------------------

    def add_track(self, xy, heading=None):
        xy = np.asarray(xy, dtype=float)
        if len(xy) < 2:
            return
        if heading is None or np.any(np.isnan(heading)):
            heading = _headings(xy)
        self.own = set()
        prev = None  # ("v", vid) or ("e", eid, seg, t)
        last = xy[0]
        for p, h in zip(xy, heading):
            step = math.hypot(*(p - last))
            last = p
            m = self._match(p, h)
            if m is not None:
                eid, seg, t = m
                if prev is not None and prev[0] == "v":
                    w = self._split(eid, seg, t)
                    self._link(prev[1], w)
                elif prev is not None and not self._connected(prev[1:], m, step + 2.0 * self.proximity):
                    if prev[1] in self.builder.edges:
                        w0 = self._split(*prev[1:])
                        # the split may have renumbered the current edge
                        m = self._match(p, h)
                        if m is not None:
                            eid, seg, t = m
                            w1 = self._split(eid, seg, t)
                            self._link(w0, w1)
                            prev = ("v", w1)
                            continue
                prev = ("e", eid, seg, t)
                continue
            v = self._on_edge(p)
            if v is None:
                v = self.builder.add_vertex(p)
            if prev is not None:
                if prev[0] == "v":
                    self._link(prev[1], v)
                elif prev[1] in self.builder.edges:
                    w = self._split(*prev[1:])
                    self._link(w, v)
            prev = ("v", v)
        self.own = set()

    def _position(self, eid, seg, t):
        """Arc length of an edge location from each end of the edge."""
        line = self.builder.edges[eid][2]
        cum = line.cumulative
        d = cum[seg] + t * (cum[seg + 1] - cum[seg])
        return d, line.length - d

    def _connected(self, loc1, loc2, limit):
        """Whether two edge locations are joined by a graph path of length <= limit."""
        e1, e2 = loc1[0], loc2[0]
        if e1 not in self.builder.edges or e2 not in self.builder.edges:
            return False
        if e1 == e2:
            return True
        u1, v1, _ = self.builder.edges[e1]
        u2, v2, _ = self.builder.edges[e2]
        a1, b1 = self._position(*loc1)
        a2, b2 = self._position(*loc2)
        reach = self.builder.within({u1: a1, v1: b1} if u1 != v1 else {u1: min(a1, b1)}, limit)
        best = min(reach.get(u2, math.inf) + a2, reach.get(v2, math.inf) + b2)
        return best <= limit

    def graph(self):
        return self.builder.freeze()


def construct_incremental_local(tracks, proximity=20.0, bearing=45.0):
    """Stream tracks through local merge-or-extend decisions."""
    tracks = list(tracks)
    if not tracks:
        raise InvalidInputError("no tracks to construct from")
    ins = LocalInserter(proximity, bearing)
    for tr in tracks:
        if isinstance(tr, Track):
            ins.add_track(tr.xy, tr.heading)
        else:
            ins.add_track(tr)
    return ins.graph()
