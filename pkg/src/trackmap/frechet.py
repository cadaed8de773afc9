"""Continuous Fréchet distance via free-space diagrams.

Two layers live here:

* the classic two-curve decision procedure (reachable intervals on the cell
  boundaries of the free-space diagram) and the bisection on top of it;
* a free-space *surface* sweep of one curve against every edge of a graph,
  with reachability carried across shared vertices.  It answers "how far
  along the curve can a monotone matching to some graph path get" and is
  the basis for both map matching and the partial matching used by the
  incremental constructor.
"""

import heapq
import math

import numpy as np

from .errors import InvalidInputError
from .geometry import PolyLine, SegmentIndex, as_polyline

_EPS_PARAM = 1e-12
# relative slack on eps so that contacts at exactly eps count as free
_EPS_SLACK = 1e-9


def free_interval(p, a, b, eps):
    """Parameters t in [0, 1] with |a + t (b - a) - p| <= eps, as (lo, hi) or None."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    fx, fy = a[0] - p[0], a[1] - p[1]
    A = dx * dx + dy * dy
    C = fx * fx + fy * fy - eps * eps * (1.0 + _EPS_SLACK)
    if A == 0.0:
        return (0.0, 1.0) if C <= 0.0 else None
    B = 2.0 * (fx * dx + fy * dy)
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    lo = max((-B - sq) / (2.0 * A), 0.0)
    hi = min((-B + sq) / (2.0 * A), 1.0)
    if lo > hi:
        return None
    return lo, hi


def _linear_interval(c0, c1, lower, upper):
    """s in [0, 1] with lower <= c0 + c1 s <= upper."""
    if c1 == 0.0:
        return (0.0, 1.0) if lower <= c0 <= upper else None
    s1 = (lower - c0) / c1
    s2 = (upper - c0) / c1
    if s1 > s2:
        s1, s2 = s2, s1
    lo, hi = max(s1, 0.0), min(s2, 1.0)
    return (lo, hi) if lo <= hi else None


def segment_band_interval(p0, p1, a, b, eps):
    """Parameters s in [0, 1] for which p0 + s (p1 - p0) lies within eps of segment a-b.

    Distance from a linearly moving point to a convex set is convex, so the
    answer is one interval: the union of the two endpoint disks and the
    rectangular band around the segment interior.
    """
    parts = [free_interval(a, p0, p1, eps), free_interval(b, p0, p1, eps)]
    ux, uy = b[0] - a[0], b[1] - a[1]
    L2 = ux * ux + uy * uy
    if L2 > 0.0:
        L = math.sqrt(L2)
        wx, wy = p0[0] - a[0], p0[1] - a[1]
        vx, vy = p1[0] - p0[0], p1[1] - p0[1]
        proj = _linear_interval((wx * ux + wy * uy) / L2, (vx * ux + vy * uy) / L2, 0.0, 1.0)
        perp = _linear_interval((ux * wy - uy * wx) / L, (ux * vy - uy * vx) / L, -eps, eps)
        if proj and perp:
            lo, hi = max(proj[0], perp[0]), min(proj[1], perp[1])
            if lo <= hi:
                parts.append((lo, hi))
    parts = [x for x in parts if x is not None]
    if not parts:
        return None
    return min(x[0] for x in parts), max(x[1] for x in parts)


def _curve_points(P):
    P = as_polyline(P)
    if len(P) == 0:
        raise InvalidInputError("empty polyline")
    return P.points


def frechet_decision(P, Q, eps):
    """True iff the Fréchet distance between P and Q is at most ``eps``."""
    if eps < 0:
        raise InvalidInputError("eps must be non-negative")
    P = _curve_points(P)
    Q = _curve_points(Q)
    n, m = len(P), len(Q)
    if math.dist(P[0], Q[0]) > eps or math.dist(P[-1], Q[-1]) > eps:
        return False
    if n == 1 or m == 1:
        pt, other = (P[0], Q) if n == 1 else (Q[0], P)
        return bool(np.all(np.hypot(*(other - pt).T) <= eps))

    # LF[i][j]: free part of Q segment j seen from P vertex i
    # BF[i][j]: free part of P segment i seen from Q vertex j
    LF = [[free_interval(P[i], Q[j], Q[j + 1], eps) for j in range(m - 1)] for i in range(n)]
    BF = [[free_interval(Q[j], P[i], P[i + 1], eps) for j in range(m)] for i in range(n - 1)]

    LR = [[None] * (m - 1) for _ in range(n)]
    BR = [[None] * m for _ in range(n - 1)]
    for j in range(m - 1):
        iv = LF[0][j]
        if iv is None or iv[0] > 0.0:
            break
        LR[0][j] = iv
        if iv[1] < 1.0:
            break
    for i in range(n - 1):
        iv = BF[i][0]
        if iv is None or iv[0] > 0.0:
            break
        BR[i][0] = iv
        if iv[1] < 1.0:
            break

    for i in range(n - 1):
        for j in range(m - 1):
            left, bottom = LR[i][j], BR[i][j]
            if left is None and bottom is None:
                continue
            right_free, top_free = LF[i + 1][j], BF[i][j + 1]
            if right_free is not None:
                if bottom is not None:
                    LR[i + 1][j] = right_free
                else:
                    lo = max(right_free[0], left[0])
                    if lo <= right_free[1]:
                        LR[i + 1][j] = (lo, right_free[1])
            if top_free is not None:
                if left is not None:
                    BR[i][j + 1] = top_free
                else:
                    lo = max(top_free[0], bottom[0])
                    if lo <= top_free[1]:
                        BR[i][j + 1] = (lo, top_free[1])
    last = LR[n - 1][m - 2]
    return last is not None and last[1] >= 1.0


def frechet_distance(P, Q, tol=0.1):
    """Fréchet distance within ``tol``, by bisection over :func:`frechet_decision`.

    The bracket starts at [max endpoint distance, max pairwise vertex
    distance].  The returned value never underestimates the true distance.
    """
    if tol <= 0:
        raise InvalidInputError("tolerance must be positive")
    Pp = _curve_points(P)
    Qp = _curve_points(Q)
    lo = max(math.dist(Pp[0], Qp[0]), math.dist(Pp[-1], Qp[-1]))
    if frechet_decision(Pp, Qp, lo):
        return lo
    hi = float(np.hypot(Pp[:, None, 0] - Qp[None, :, 0], Pp[:, None, 1] - Qp[None, :, 1]).max())
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if frechet_decision(Pp, Qp, mid):
            hi = mid
        else:
            lo = mid
    return hi


class GraphFreeSpace:
    """Free-space surface of a curve against all edges of a geometric graph.

    ``edges`` is a sequence of ``(u, v, points)`` with ``points`` the edge
    polyline from vertex u to vertex v.  Each edge is walked in both
    directions; reachability enters an edge only at its start vertex or
    where the sweep begins, and leaves it only at its end vertex.
    """

    def __init__(self, edges):
        self.edges = []
        for u, v, pts in edges:
            line = as_polyline(pts)
            if not line.is_curve():
                continue
            self.edges.append((u, v, line.points))
        if not self.edges:
            raise InvalidInputError("graph has no edges")
        self.index = SegmentIndex.from_polylines([e[2] for e in self.edges])
        # directed copies: 2k forward, 2k + 1 reversed
        self._out = {}
        for k, (u, v, _) in enumerate(self.edges):
            self._out.setdefault(u, []).append(2 * k)
            self._out.setdefault(v, []).append(2 * k + 1)

    @classmethod
    def from_graph(cls, graph):
        return cls((e.u, e.v, e.geometry.points) for e in graph.iter_edges())

    def _de_points(self, de):
        pts = self.edges[de >> 1][2]
        return pts if de % 2 == 0 else pts[::-1]

    def _de_end(self, de):
        u, v, _ = self.edges[de >> 1]
        return v if de % 2 == 0 else u

    def _candidates(self, p0, p1, eps):
        """Directed cells (de, h) whose segment is within eps of p0-p1."""
        hits = self.index.near_segment(p0, p1, eps)
        cells = set()
        for s in hits:
            k = int(self.index.owner[s])
            j = int(self.index.segno[s])
            nseg = len(self.edges[k][2]) - 1
            cells.add((2 * k, j))
            cells.add((2 * k + 1, nseg - 1 - j))
        return cells

    def near_intervals(self, curve, eps):
        """Merged curve-parameter intervals where the curve lies within eps of the graph."""
        pts = as_polyline(curve).points
        out = []
        for i in range(len(pts) - 1):
            p0, p1 = pts[i], pts[i + 1]
            for s in self.index.near_segment(p0, p1, eps):
                iv = segment_band_interval(p0, p1, self.index.a[s], self.index.b[s], eps)
                if iv is not None:
                    out.append((i + iv[0], i + iv[1]))
        out.sort()
        merged = []
        for lo, hi in out:
            if merged and lo <= merged[-1][1] + _EPS_PARAM:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [tuple(x) for x in merged]

    def reach(self, curve, eps, start=0.0):
        """Largest curve parameter reachable from ``start``.

        The matching may begin at any graph point within eps of
        curve(start).  Returns ``start`` itself when nothing is reachable,
        and ``len(curve) - 1`` when the whole remainder matches.
        """
        pts = as_polyline(curve).points
        n = len(pts)
        if n < 2:
            raise InvalidInputError("curve needs at least 2 distinct points")
        col = min(int(math.floor(start)), n - 2)
        s0 = start - col
        best = start
        left = None
        while col <= n - 2:
            p0, p1 = pts[col], pts[col + 1]
            cells = self._candidates(p0, p1, eps)
            if not cells:
                return best
            if left is None:
                origin = p0 + s0 * (p1 - p0)
                left = {}
                for de, h in cells:
                    dp = self._de_points(de)
                    # the start often sits exactly eps away (a near-interval
                    # endpoint), so allow a little more slack here
                    iv = free_interval(origin, dp[h], dp[h + 1], eps * (1.0 + 1e-7))
                    if iv is not None:
                        left[(de, h)] = iv[0]
            right, reached = self._sweep_column(p0, p1, eps, cells, left, s0)
            if reached is not None:
                best = max(best, col + reached)
            if not right:
                return best
            if col == n - 2:
                return float(n - 1)
            left = right
            col += 1
            s0 = 0.0
        return best

    def matches(self, curve, eps):
        """True iff some graph path is within Fréchet distance eps of the whole curve."""
        pts = as_polyline(curve).points
        return self.reach(pts, eps, 0.0) >= len(pts) - 1 - 1e-9

    def _sweep_column(self, p0, p1, eps, cells, left, s0):
        """Propagate reachability through one column of the surface.

        Horizontal boundaries (graph points against the curve segment) carry
        the smallest reachable curve parameter; they are settled in
        increasing order, Dijkstra-style, since every transition is a
        max() and never decreases the value.
        """
        hfree_cache = {}

        def hfree(key, point):
            if key not in hfree_cache:
                hfree_cache[key] = free_interval(point, p0, p1, eps)
            return hfree_cache[key]

        def node_of(de, h):
            dp = self._de_points(de)
            if h == len(dp) - 1:
                end = self._de_end(de)
                return ("v", end), dp[h]
            return ("p", de, h), dp[h]

        right = {}
        reached = None
        heap = []
        best_node = {}
        counter = 0

        def push(node, value):
            nonlocal counter
            if value < best_node.get(node, math.inf):
                best_node[node] = value
                counter += 1
                heapq.heappush(heap, (value, counter, node))

        def set_right(de, h, a, b, lower):
            iv = free_interval(p1, a, b, eps)
            if iv is None:
                return
            lo = max(iv[0], lower)
            if lo <= iv[1] and lo < right.get((de, h), math.inf):
                right[(de, h)] = lo

        def enter_bottom(de, h, x):
            nonlocal reached
            if (de, h) not in cells:
                return
            dp = self._de_points(de)
            a, b = dp[h], dp[h + 1]
            node, tp = node_of(de, h + 1)
            tf = hfree(node, tp)
            if tf is not None:
                lo = max(tf[0], x)
                if lo <= tf[1]:
                    push(node, lo)
            set_right(de, h, a, b, 0.0)
            iv = segment_band_interval(p0, p1, a, b, eps)
            if iv is not None and iv[1] >= x:
                reached = iv[1] if reached is None else max(reached, iv[1])

        for (de, h), r0 in sorted(left.items()):
            if (de, h) not in cells:
                continue
            dp = self._de_points(de)
            a, b = dp[h], dp[h + 1]
            node, tp = node_of(de, h + 1)
            tf = hfree(node, tp)
            if tf is not None:
                lo = max(tf[0], s0)
                if lo <= tf[1]:
                    push(node, lo)
            set_right(de, h, a, b, r0)
            sub_a = a + r0 * (b - a)
            iv = segment_band_interval(p0, p1, sub_a, b, eps)
            if iv is not None and iv[1] >= s0:
                reached = iv[1] if reached is None else max(reached, iv[1])

        while heap:
            x, _, node = heapq.heappop(heap)
            if x > best_node.get(node, math.inf):
                continue
            if node[0] == "v":
                for de in self._out.get(node[1], ()):
                    enter_bottom(de, 0, x)
            else:
                enter_bottom(node[1], node[2], x)
        return right, reached


def map_match_distance(path, space, tol=0.5):
    """Smallest eps (within ``tol``) at which ``path`` matches some path of the graph.

    ``space`` is a :class:`GraphFreeSpace`.  The bracket runs from the
    largest vertex-to-graph distance (a lower bound) to the best "stand
    still at one graph point" leash length (an upper bound).
    """
    if tol <= 0:
        raise InvalidInputError("tolerance must be positive")
    line = as_polyline(path)
    if not line.is_curve():
        raise InvalidInputError("path must have positive length")
    pts = line.points
    dist, seg, t = space.index.nearest(pts)
    lo = float(dist.max())
    if space.matches(pts, lo):
        return lo
    a, b = space.index.a[seg], space.index.b[seg]
    anchors = a + t[:, None] * (b - a)
    hi = float(np.hypot(pts[None, :, 0] - anchors[:, None, 0], pts[None, :, 1] - anchors[:, None, 1]).max(axis=1).min())
    hi = max(hi, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if space.matches(pts, mid):
            hi = mid
        else:
            lo = mid
    return hi


__all__ = [
    "GraphFreeSpace",
    "PolyLine",
    "free_interval",
    "frechet_decision",
    "frechet_distance",
    "map_match_distance",
    "segment_band_interval",
]
