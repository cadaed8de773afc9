"""Planar geometric primitives.

All coordinates are projected meters.  Bearings follow the GPS heading
convention: degrees, north = 0, clockwise positive.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError

# consecutive points closer than this are treated as the same point
ZERO_LENGTH = 1e-9


class PolyLine:
    """An immutable polygonal curve.

    Consecutive duplicate points are removed on construction, so every
    segment has positive length.  A curve that collapses to a single point
    is representable but rejected by the curve operations.
    """

    __slots__ = ("_points", "_cum")

    def __init__(self, points):
        if isinstance(points, PolyLine):
            self._points = points._points
            self._cum = points._cum
            return
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInputError(f"expected an (n, 2) array of points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("polyline coordinates must be finite")
        if len(pts) > 1:
            step = np.hypot(*np.diff(pts, axis=0).T)
            keep = np.concatenate(([True], step > ZERO_LENGTH))
            pts = pts[keep]
        pts = np.ascontiguousarray(pts)
        pts.flags.writeable = False
        cum = np.zeros(len(pts))
        if len(pts) > 1:
            cum[1:] = np.cumsum(np.hypot(*np.diff(pts, axis=0).T))
        cum.flags.writeable = False
        self._points = pts
        self._cum = cum

    @property
    def points(self):
        return self._points

    @property
    def cumulative(self):
        """Arc length at each vertex."""
        return self._cum

    @property
    def length(self):
        return float(self._cum[-1]) if len(self._cum) else 0.0

    @property
    def start(self):
        return self._points[0]

    @property
    def end(self):
        return self._points[-1]

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __repr__(self):
        return f"PolyLine(n={len(self)}, length={self.length:.3f})"

    def __eq__(self, other):
        if not isinstance(other, PolyLine):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(np.all(self._points == other._points))

    def __hash__(self):
        return hash(self._points.tobytes())

    def is_curve(self):
        return len(self._points) >= 2

    def reversed(self):
        return PolyLine(self._points[::-1])

    def translated(self, dx, dy):
        return PolyLine(self._points + np.array([dx, dy]))

    def segments(self):
        """Return (starts, ends) arrays of shape (n-1, 2)."""
        return self._points[:-1], self._points[1:]

    def point_at_param(self, s):
        """Point at vertex parameter ``s`` in [0, n-1] (segment i spans [i, i+1])."""
        n = len(self._points)
        if s <= 0:
            return self._points[0].copy()
        if s >= n - 1:
            return self._points[-1].copy()
        i = int(math.floor(s))
        f = s - i
        return self._points[i] + f * (self._points[i + 1] - self._points[i])

    def param_to_arclength(self, s):
        n = len(self._points)
        if s <= 0:
            return 0.0
        if s >= n - 1:
            return self.length
        i = int(math.floor(s))
        return float(self._cum[i] + (s - i) * (self._cum[i + 1] - self._cum[i]))

    def point_at_arclength(self, d):
        pts, cum = self._points, self._cum
        d = np.clip(np.asarray(d, dtype=float), 0.0, self.length)
        idx = np.clip(np.searchsorted(cum, d, side="right") - 1, 0, len(pts) - 2)
        seg = cum[idx + 1] - cum[idx]
        f = (d - cum[idx]) / seg
        return pts[idx] + f[..., None] * (pts[idx + 1] - pts[idx])

    def subcurve_param(self, a, b):
        """Sub-curve between vertex parameters a <= b, endpoints included."""
        if b < a:
            raise InvalidInputError("subcurve_param requires a <= b")
        inner = [self._points[i] for i in range(int(math.floor(a)) + 1, int(math.ceil(b)))]
        return PolyLine([self.point_at_param(a), *inner, self.point_at_param(b)])

    def sample(self, pitch, include_vertices=True):
        """Points spaced ``pitch`` apart in arc length, both endpoints kept.

        With ``include_vertices`` every vertex is also present, so the
        sample is a refinement of the curve.
        """
        if pitch <= 0:
            raise InvalidInputError("sampling pitch must be positive")
        if len(self._points) < 2:
            return self._points.copy()
        if include_vertices:
            out = [self._points[:1]]
            for a, b in zip(self._points[:-1], self._points[1:]):
                k = max(1, int(math.ceil(math.hypot(*(b - a)) / pitch)))
                t = np.arange(1, k + 1)[:, None] / k
                out.append(a + t * (b - a))
            return np.vstack(out)
        k = max(1, int(math.ceil(self.length / pitch)))
        return self.point_at_arclength(np.linspace(0.0, self.length, k + 1))

    def resample(self, count):
        """``count`` points uniformly spaced in arc length."""
        if count < 2:
            raise InvalidInputError("resample needs at least 2 points")
        if len(self._points) < 2:
            return np.repeat(self._points[:1], count, axis=0)
        return self.point_at_arclength(np.linspace(0.0, self.length, count))


def as_polyline(obj):
    return obj if isinstance(obj, PolyLine) else PolyLine(obj)


def bearing(p, q):
    """Heading of the displacement p -> q in degrees (north = 0, clockwise)."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    return math.degrees(math.atan2(dx, dy)) % 360.0


def bearings(points):
    """Vectorized :func:`bearing` for consecutive rows of ``points``."""
    d = np.diff(np.asarray(points, dtype=float), axis=0)
    return np.degrees(np.arctan2(d[:, 0], d[:, 1])) % 360.0


def angle_difference(a, b):
    """Smallest absolute difference between two headings, in [0, 180]."""
    d = np.abs((np.asarray(a) - np.asarray(b)) % 360.0)
    return np.minimum(d, 360.0 - d)


def signed_turn(a, b):
    """Signed heading change from a to b in (-180, 180]; positive is a right turn."""
    return (np.asarray(b) - np.asarray(a) + 180.0) % 360.0 - 180.0


def point_segment_distance(p, a, b):
    """Euclidean distance from points ``p`` to segments ``a``-``b`` (broadcasting)."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    ap = p - a
    denom = np.einsum("...i,...i->...", ab, ab)
    num = np.einsum("...i,...i->...", ap, ab)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    diff = ap - t[..., None] * ab
    return np.hypot(diff[..., 0], diff[..., 1])


def point_to_polyline_distance(p, line):
    """Minimum distance from point ``p`` to any segment of ``line``."""
    line = as_polyline(line)
    if not line.is_curve():
        raise InvalidInputError("polyline needs at least 2 distinct points")
    a, b = line.segments()
    return float(point_segment_distance(np.asarray(p, dtype=float)[None, :], a, b).min())


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(a, b, c, d):
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    return False


def segment_segment_distance(a, b, c, d):
    if segments_intersect(a, b, c, d):
        return 0.0
    return float(min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    ))


def segment_segment_distances(a, b, c, d):
    """Vectorized segment-to-segment distance between segment a-b and segments c-d."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.atleast_2d(np.asarray(c, dtype=float))
    d = np.atleast_2d(np.asarray(d, dtype=float))
    dist = np.minimum.reduce([
        point_segment_distance(a[None, :], c, d),
        point_segment_distance(b[None, :], c, d),
        point_segment_distance(c, a[None, :], b[None, :]),
        point_segment_distance(d, a[None, :], b[None, :]),
    ])

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    o1 = orient(a[None, :], b[None, :], c)
    o2 = orient(a[None, :], b[None, :], d)
    o3 = orient(c, d, a[None, :])
    o4 = orient(c, d, b[None, :])
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    return np.where(crossing, 0.0, dist)


def discrete_frechet(P, Q):
    """Discrete Fréchet distance between two vertex sequences.

    Couplings advance along P, Q or both one vertex at a time.  Computed by
    the usual dynamic program, one anti-diagonal at a time.
    """
    P = np.asarray(P.points if isinstance(P, PolyLine) else P, dtype=float).reshape(-1, 2)
    Q = np.asarray(Q.points if isinstance(Q, PolyLine) else Q, dtype=float).reshape(-1, 2)
    n, m = len(P), len(Q)
    if n == 0 or m == 0:
        raise InvalidInputError("discrete Fréchet needs non-empty sequences")
    d = np.hypot(P[:, None, 0] - Q[None, :, 0], P[:, None, 1] - Q[None, :, 1])
    ca = np.full((n, m), np.inf)
    ca[0, 0] = d[0, 0]
    for k in range(1, n + m - 1):
        i = np.arange(max(0, k - m + 1), min(k, n - 1) + 1)
        j = k - i
        best = np.full(len(i), np.inf)
        ok = i > 0
        best[ok] = np.minimum(best[ok], ca[i[ok] - 1, j[ok]])
        ok = j > 0
        best[ok] = np.minimum(best[ok], ca[i[ok], j[ok] - 1])
        ok = (i > 0) & (j > 0)
        best[ok] = np.minimum(best[ok], ca[i[ok] - 1, j[ok] - 1])
        ca[i, j] = np.maximum(best, d[i, j])
    return float(ca[n - 1, m - 1])


class SegmentIndex:
    """Nearest-segment queries over a fixed collection of segments.

    Each segment is cut into pieces no longer than ``piece`` meters and the
    piece midpoints go into a k-d tree.  A candidate set is then exact:
    the true nearest segment has a piece midpoint within
    ``d_nearest_midpoint + piece / 2`` of the query.
    """

    def __init__(self, starts, ends, piece=None):
        self.a = np.asarray(starts, dtype=float).reshape(-1, 2)
        self.b = np.asarray(ends, dtype=float).reshape(-1, 2)
        if len(self.a) == 0:
            raise InvalidInputError("cannot index an empty segment set")
        lengths = np.hypot(*(self.b - self.a).T)
        if piece is None:
            piece = float(np.clip(lengths.sum() / 5000.0, 1.0, 25.0))
        self.piece = piece
        counts = np.maximum(1, np.ceil(lengths / piece).astype(int))
        owner = np.repeat(np.arange(len(self.a)), counts)
        offs = np.concatenate([(np.arange(c) + 0.5) / c for c in counts])
        mids = self.a[owner] + offs[:, None] * (self.b - self.a)[owner]
        self._owner = owner
        self._half = (lengths / counts)[owner] / 2.0
        self._max_half = float(self._half.max())
        self._tree = cKDTree(mids)

    def __len__(self):
        return len(self.a)

    @classmethod
    def from_polylines(cls, polylines, piece=None):
        """Index all segments; returns (index, owner, segment number) arrays."""
        starts, ends, owner, segno = [], [], [], []
        for k, line in enumerate(polylines):
            pts = line.points if isinstance(line, PolyLine) else np.asarray(line, dtype=float)
            if len(pts) < 2:
                continue
            starts.append(pts[:-1])
            ends.append(pts[1:])
            owner.append(np.full(len(pts) - 1, k))
            segno.append(np.arange(len(pts) - 1))
        if not starts:
            raise InvalidInputError("no segments to index")
        index = cls(np.vstack(starts), np.vstack(ends), piece=piece)
        index.owner = np.concatenate(owner)
        index.segno = np.concatenate(segno)
        return index

    def nearest(self, points):
        """Nearest segment for each query point.

        Returns (distance, segment index, t) where t in [0, 1] locates the
        closest point along the segment.
        """
        q = np.atleast_2d(np.asarray(points, dtype=float))
        d0, _ = self._tree.query(q)
        radius = d0 + self._max_half + 1e-9
        groups = self._tree.query_ball_point(q, radius)
        sizes = np.fromiter((len(g) for g in groups), dtype=int, count=len(groups))
        qi = np.repeat(np.arange(len(q)), sizes)
        cand = self._owner[np.concatenate([np.asarray(g, dtype=int) for g in groups])] if len(qi) else np.zeros(0, int)
        a, b = self.a[cand], self.b[cand]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        t = np.clip(np.einsum("ij,ij->i", q[qi] - a, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
        dist = np.hypot(*(q[qi] - (a + t[:, None] * ab)).T)
        # lexsort: by query, then distance, then segment index for determinism
        order = np.lexsort((cand, dist, qi))
        first = np.ones(len(order), dtype=bool)
        first[1:] = qi[order][1:] != qi[order][:-1]
        pick = order[first]
        return dist[pick], cand[pick], t[pick]

    def distance(self, points):
        return self.nearest(points)[0]

    def near_segment(self, p, q, radius):
        """Indices of segments within ``radius`` of segment p-q, sorted."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        mid = (p + q) / 2.0
        half = math.hypot(*(q - p)) / 2.0
        pieces = self._tree.query_ball_point(mid, radius + half + self._max_half + 1e-9)
        if not pieces:
            return np.zeros(0, dtype=int)
        cand = np.unique(self._owner[np.asarray(pieces, dtype=int)])
        dist = segment_segment_distances(p, q, self.a[cand], self.b[cand])
        return cand[dist <= radius]


def directed_hausdorff(A, B, delta=1.0):
    """Sampled directed Hausdorff distance from polyline set A to set B.

    Every polyline of A is sampled at arc-length pitch ``delta`` (vertices
    included); the result underestimates the exact value by at most
    ``delta / 2``.
    """
    A = [as_polyline(a) for a in A]
    B = [as_polyline(b) for b in B]
    if not A or not B:
        raise InvalidInputError("directed Hausdorff needs non-empty sets")
    if delta <= 0:
        raise InvalidInputError("sampling pitch must be positive")
    samples = np.vstack([a.sample(delta) for a in A])
    return float(_distance_to_set(samples, B).max())


def _distance_to_set(points, polylines):
    curves = [b for b in polylines if b.is_curve()]
    if curves:
        d = SegmentIndex.from_polylines(curves).distance(points)
    else:
        d = np.full(len(points), np.inf)
    for b in polylines:
        if not b.is_curve():
            d = np.minimum(d, np.hypot(*(points - b.points[0]).T))
    return d


def simplify(points, tolerance):
    """Douglas-Peucker simplification keeping both endpoints."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return pts
    keep = np.zeros(len(pts), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        d = point_segment_distance(pts[i + 1:j], pts[i], pts[j])
        k = int(np.argmax(d))
        if d[k] > tolerance:
            k += i + 1
            keep[k] = True
            stack.append((i, k))
            stack.append((k, j))
    return pts[keep]
