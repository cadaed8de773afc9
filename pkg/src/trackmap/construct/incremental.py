"""Incremental map construction by partial Fréchet map matching.

Tracks are inserted one at a time.  Parts of a track that can be matched
to the current map within epsilon are absorbed; the remaining parts become
new edges glued to the map at their attachment points.
"""

import numpy as np

from ..errors import InvalidInputError
from ..frechet import GraphFreeSpace
from ..geometry import PolyLine
from ..graph import GraphBuilder

# parameter slack when comparing positions along a track
_STEP = 1e-6


def _track_line(track):
    xy = getattr(track, "xy", track)
    return PolyLine(xy)


def _portions(space, pts, eps):
    """Split a track into ("matched" | "unmatched", a, b) parameter ranges."""
    n = len(pts)
    end = float(n - 1)
    near = space.near_intervals(pts, eps)
    out = []
    cur = 0.0
    while cur < end - _STEP:
        inside = [iv for iv in near if iv[0] - _STEP <= cur <= iv[1] + _STEP]
        if inside:
            b = space.reach(pts, eps, cur)
            if b > cur + _STEP:
                out.append(("matched", cur, b))
                cur = b
                continue
        # unmatched until the track comes near the map again
        nxt = [iv[0] for iv in near if iv[0] > cur + _STEP]
        b = min(nxt) if nxt else end
        if inside and not nxt:
            b = end
        out.append(("unmatched", cur, b))
        cur = b
    merged = []
    for kind, a, b in out:
        if merged and merged[-1][0] == kind:
            merged[-1] = (kind, merged[-1][1], b)
        else:
            merged.append((kind, a, b))
    return merged


def insert_track(builder, pts, eps, snap):
    """Insert one track (an (n, 2) array) into ``builder``."""
    line = PolyLine(pts)
    if not line.is_curve():
        return
    pts = line.points
    if not builder.edges:
        u = builder.add_vertex(pts[0])
        v = builder.add_vertex(pts[-1])
        builder.add_edge(u, v, pts[1:-1])
        return
    eids = sorted(builder.edges)
    space = GraphFreeSpace([builder.edges[e] for e in eids])
    portions = _portions(space, pts, eps)
    pieces = [(a, b) for kind, a, b in portions if kind == "unmatched"]
    if not pieces:
        return
    end = float(len(pts) - 1)

    # attachment points on the map as it was before this track
    queries, slots = [], []
    for k, (a, b) in enumerate(pieces):
        if a > _STEP:
            queries.append(line.point_at_param(a))
            slots.append((k, 0))
        if b < end - _STEP:
            queries.append(line.point_at_param(b))
            slots.append((k, 1))
    attach = {}
    if queries:
        _, seg, t = space.index.nearest(np.array(queries))
        by_edge = {}
        for (slot, s, tt) in zip(slots, seg, t):
            eid = eids[int(space.index.owner[s])]
            by_edge.setdefault(eid, []).append((slot, (int(space.index.segno[s]), float(tt))))
        for eid in sorted(by_edge):
            items = by_edge[eid]
            vids = builder.split_edge(eid, [pos for _, pos in items], snap=snap)
            for (slot, _), vid in zip(items, vids):
                attach[slot] = vid

    for k, (a, b) in enumerate(pieces):
        sub = line.subcurve_param(a, b).points
        if (k, 0) in attach:
            u = attach[(k, 0)]
            inner = sub
        else:
            u = builder.add_vertex(sub[0])
            inner = sub[1:]
        if (k, 1) in attach:
            v = attach[(k, 1)]
        else:
            v = builder.add_vertex(inner[-1])
            inner = inner[:-1]
        if u == v and PolyLine(np.vstack([builder.vertices[u], inner, builder.vertices[v]])).length < 1e-6:
            continue
        builder.add_edge(u, v, inner)


def construct_incremental_frechet(tracks, epsilon=80.0):
    """Build a map by inserting tracks in the given order.

    ``tracks`` may hold Track objects or bare (n, 2) point arrays.
    """
    tracks = list(tracks)
    if not tracks:
        raise InvalidInputError("no tracks to construct from")
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    snap = max(1e-6, min(2.0, 0.05 * epsilon))
    builder = GraphBuilder()
    for tr in tracks:
        insert_track(builder, _track_line(tr).points, epsilon, snap)
    return builder.freeze()
