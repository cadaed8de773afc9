"""Intersection-first map construction.

Turns are spotted where a vehicle changes direction while moving slowly.
Turns of the same kind that happen close together are clustered, and each
cluster becomes an intersection node.  Tracks are then cut at the nodes
they pass, and the pieces joining the same pair of nodes are averaged into
one road.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from ..errors import InvalidInputError
from ..geometry import PolyLine, bearing, signed_turn
from ..graph import GraphBuilder
from ..tracks import KMH, Track, derive_kinematics

# arc length on each side of a measurement used to measure its heading change
TURN_WINDOW = 100.0
BUNDLE_POINTS = 32


@dataclass(frozen=True)
class Turn:
    track: int
    index: int
    x: float
    y: float
    heading_in: float
    change: float  # signed, positive = right
    speed: float

    @property
    def kind(self):
        """Incoming heading in one of 8 compass sectors, and the turn side."""
        sector = int(((self.heading_in + 22.5) % 360.0) // 45.0)
        return sector, "R" if self.change > 0 else "L"


def _as_track(tr, k):
    if isinstance(tr, Track):
        return tr
    xy = np.asarray(tr, dtype=float)
    return Track(str(k), xy, np.arange(len(xy), dtype=float))


def _smooth(xy, d, radius):
    """Mean of the measurements within ``radius`` meters of arc length."""
    lo = np.searchsorted(d, d - radius, side="left")
    hi = np.searchsorted(d, d + radius, side="right")
    csum = np.vstack([np.zeros((1, 2)), np.cumsum(xy, axis=0)])
    return (csum[hi] - csum[lo]) / (hi - lo)[:, None]


def _corner(smooth, d, window, fallback):
    """Where the straight legs before and after arc position d meet.

    Shallow turns make the intersection ill-conditioned; the raw
    measurement is used for them, and whenever the legs meet far away.
    """
    a0, a1, b0, b1 = smooth.point_at_arclength(
        np.clip([d - window, d - window / 2.0, d + window / 2.0, d + window], 0.0, smooth.length)
    )
    u, v = a1 - a0, b1 - b0
    denom = u[0] * v[1] - u[1] * v[0]
    nu, nv = np.hypot(*u), np.hypot(*v)
    if nu == 0 or nv == 0 or abs(denom) < math.sin(math.radians(30.0)) * nu * nv:
        return float(fallback[0]), float(fallback[1])
    t = ((b0[0] - a0[0]) * v[1] - (b0[1] - a0[1]) * v[0]) / denom
    p = a0 + t * u
    if np.hypot(*(p - fallback)) > window / 2.0:
        return float(fallback[0]), float(fallback[1])
    return float(p[0]), float(p[1])


def _window_points(line, d, window):
    """Points ``window`` meters behind and ahead of arc position d (clamped)."""
    back = line.point_at_arclength(np.maximum(d - window, 0.0))
    ahead = line.point_at_arclength(np.minimum(d + window, line.length))
    return back, ahead


def detect_turns(tracks, turn_angle=15.0, speed_max=40.0, window=TURN_WINDOW):
    """Turn measurements in every track.

    Headings are read off a copy of the track smoothed over half a window.
    The heading change at a measurement compares the direction from the
    point ``window`` meters back to the direction toward the point
    ``window`` meters ahead; the turn itself sits at the raw measurement.  A candidate only counts as a turn if no
    same-side candidate within one window has a larger change.  Speed is
    the average over the same window.
    """
    out = []
    for k, tr in enumerate(tracks):
        tr = _as_track(tr, k)
        if len(tr) < 3:
            continue
        xy = tr.xy
        line = PolyLine(xy)
        if not line.is_curve():
            continue
        seg = np.hypot(*np.diff(xy, axis=0).T)
        d = np.concatenate(([0.0], np.cumsum(seg)))
        smooth = PolyLine(_smooth(xy, d, window / 2.0))
        if not smooth.is_curve():
            continue
        ds = np.interp(d, d, smooth.cumulative) if len(smooth) == len(xy) else d * smooth.length / line.length
        back, ahead = _window_points(smooth, ds, window)
        centre = smooth.point_at_arclength(ds)
        inside = (d >= window / 2.0) & (d <= line.length - window / 2.0)
        h_in = np.array([bearing(b, p) if np.hypot(*(p - b)) > 0 else np.nan for b, p in zip(back, centre)])
        h_out = np.array([bearing(p, a) if np.hypot(*(a - p)) > 0 else np.nan for p, a in zip(centre, ahead)])
        change = signed_turn(h_in, h_out)
        # window-averaged speed
        lo = np.searchsorted(d, d - window, side="left")
        hi = np.searchsorted(d, d + window, side="right") - 1
        dt = tr.t[hi] - tr.t[lo]
        with np.errstate(divide="ignore", invalid="ignore"):
            speed = np.where(dt > 0, (d[hi] - d[lo]) / dt * KMH, np.nan)
        given = tr.speed
        speed = np.where(np.isnan(speed), given, speed)
        cand = inside & (np.abs(change) >= turn_angle) & np.isfinite(change)
        mag = np.where(cand, np.abs(change), 0.0)
        # keep only the strongest same-side candidate within one window
        for i in np.flatnonzero(cand):
            near = cand & (np.abs(d - d[i]) <= window) & (np.sign(change) == np.sign(change[i]))
            j = np.flatnonzero(near)
            if j[np.argmax(mag[j])] != i:
                continue
            if np.isfinite(speed[i]) and speed[i] <= speed_max:
                x, y = _corner(smooth, ds[i], window, xy[i])
                out.append(Turn(k, int(i), x, y, float(h_in[i]), float(change[i]), float(speed[i])))
    return out


def _cluster(points, radius, weights=None):
    """Centroid-linkage clusters of ``points`` cut at ``radius``; returns labels."""
    if len(points) == 1:
        return np.zeros(1, dtype=int)
    z = linkage(points, method="centroid")
    return fcluster(z, t=radius, criterion="distance") - 1


@dataclass(frozen=True)
class Intersection:
    x: float
    y: float
    support: int
    kinds: tuple


def detect_intersections(tracks, turn_angle=15.0, speed_max=40.0, proximity=25.0, min_support=2, window=TURN_WINDOW):
    """Intersection nodes from clustered turns.

    Turns are clustered per turn kind, then cluster centers of any kind
    lying within ``proximity`` of each other are merged into one node.
    """
    turns = detect_turns(tracks, turn_angle, speed_max, window)
    if not turns:
        return []
    by_kind = {}
    for t in turns:
        by_kind.setdefault(t.kind, []).append(t)
    centers = []
    for kind in sorted(by_kind):
        group = by_kind[kind]
        pts = np.array([(t.x, t.y) for t in group])
        labels = _cluster(pts, proximity)
        for lab in np.unique(labels):
            members = pts[labels == lab]
            centers.append((members.mean(axis=0), len(members), kind))
    pts = np.array([c[0] for c in centers])
    labels = _cluster(pts, proximity)
    nodes = []
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        w = np.array([centers[i][1] for i in idx], dtype=float)
        p = (pts[idx] * w[:, None]).sum(axis=0) / w.sum()
        support = int(w.sum())
        if support >= min_support:
            kinds = tuple(sorted({centers[i][2] for i in idx}))
            nodes.append(Intersection(float(p[0]), float(p[1]), support, kinds))
    nodes.sort(key=lambda n: (n.x, n.y))
    return nodes


def _terminals(lines, proximity, nodes):
    """Cluster track end points that are not already near an intersection."""
    ends = np.array([p for ln in lines for p in (ln.start, ln.end)])
    if len(ends) == 0:
        return np.zeros((0, 2))
    if len(nodes):
        d = np.hypot(ends[:, None, 0] - nodes[None, :, 0], ends[:, None, 1] - nodes[None, :, 1]).min(axis=1)
        ends = ends[d > proximity]
    if len(ends) == 0:
        return np.zeros((0, 2))
    labels = _cluster(ends, proximity)
    return np.array([ends[labels == lab].mean(axis=0) for lab in np.unique(labels)])


def _visits(line, nodes, proximity):
    """(arc position, node) for every pass of the track near a node, in order."""
    pts = line.sample(max(proximity / 5.0, 1.0), include_vertices=False)
    d = np.linspace(0.0, line.length, len(pts))
    out = []
    for j, q in enumerate(nodes):
        dist = np.hypot(*(pts - q).T)
        near = dist <= proximity
        if not near.any():
            continue
        # contiguous runs of nearby samples; take each run's closest sample
        edges = np.flatnonzero(np.diff(np.concatenate(([0], near.astype(int), [0]))))
        for a, b in zip(edges[0::2], edges[1::2]):
            k = a + int(np.argmin(dist[a:b]))
            out.append((float(d[k]), j))
    out.sort()
    return out


def _bundle(pieces, proximity):
    """Group same-pair pieces whose mean pointwise distance is within proximity."""
    groups = []
    for p in pieces:
        for g in groups:
            ref = g[0]
            if np.mean(np.hypot(*(ref - p).T)) <= proximity:
                g.append(p)
                break
        else:
            groups.append([p])
    return groups


def construct_tracebundle(tracks, turn_angle=15.0, speed_max=40.0, proximity=25.0, min_support=2, window=TURN_WINDOW):
    """Detect intersections from turns, then bundle the tracks between them."""
    tracks = [_as_track(t, k) for k, t in enumerate(tracks)]
    if not tracks:
        raise InvalidInputError("no tracks to construct from")
    tracks = [derive_kinematics(t) if np.isnan(t.speed).any() or np.isnan(t.heading).any() else t for t in tracks]
    inters = detect_intersections(tracks, turn_angle, speed_max, proximity, min_support, window)
    if not inters:
        warnings.warn("no intersections detected; building a graph from track end points only", stacklevel=2)
    inodes = np.array([(n.x, n.y) for n in inters]).reshape(-1, 2)
    lines = [PolyLine(t.xy) for t in tracks]
    lines = [ln for ln in lines if ln.is_curve()]
    terms = _terminals(lines, proximity, inodes)
    nodes = np.vstack([inodes, terms])

    pieces = {}
    for ln in lines:
        visits = _visits(ln, nodes, proximity)
        for (d0, a), (d1, b) in zip(visits[:-1], visits[1:]):
            if a == b or d1 - d0 <= 0:
                continue
            sub = ln.point_at_arclength(np.linspace(d0, d1, BUNDLE_POINTS))
            if a > b:
                a, b, sub = b, a, sub[::-1]
            pieces.setdefault((a, b), []).append(sub)

    builder = GraphBuilder()
    vid = {}
    for (a, b) in sorted(pieces):
        for group in _bundle(pieces[(a, b)], proximity):
            if len(group) < min_support:
                continue
            mean = np.mean(group, axis=0)
            for j in (a, b):
                if j not in vid:
                    vid[j] = builder.add_vertex(nodes[j])
            builder.add_edge(vid[a], vid[b], mean[1:-1])
    return builder.freeze().subgraph(builder.edges)
