"""Shortest-path comparison: route the same random trips in both maps."""

import numpy as np

from ..errors import InvalidInputError
from ..geometry import SegmentIndex, as_polyline, discrete_frechet
from ..graph import VertexLocator, shortest_path
from .reports import ShortestPathReport


def average_vertical_distance(P, Q, delta=1.0):
    """Mean distance from the samples of P (pitch ``delta``) to the polyline Q.

    One-sided on purpose: it scores the constructed route against the
    reference route.  Use ``symmetric_vertical_distance`` for the average
    of both directions.
    """
    P = as_polyline(P)
    Q = as_polyline(Q)
    if not P.is_curve() or not Q.is_curve():
        raise InvalidInputError("average vertical distance needs two curves of positive length")
    if delta <= 0:
        raise InvalidInputError("sampling pitch must be positive")
    return _vertical(P, Q, delta)


def symmetric_vertical_distance(P, Q, delta=1.0):
    return 0.5 * (average_vertical_distance(P, Q, delta) + average_vertical_distance(Q, P, delta))


def _vertical(P, Q, delta):
    # routes can collapse to a single vertex when both endpoints snap together
    pts = P.sample(delta) if P.is_curve() else P.points[:1]
    if Q.is_curve():
        return float(SegmentIndex.from_polylines([Q]).distance(pts).mean())
    return float(np.hypot(*(pts - Q.points[0]).T).mean())


def _overlap_box(C, G):
    cx0, cy0, cx1, cy1 = C.bbox()
    gx0, gy0, gx1, gy1 = G.bbox()
    box = (max(cx0, gx0), max(cy0, gy0), min(cx1, gx1), min(cy1, gy1))
    if box[0] > box[2] or box[1] > box[3]:
        # disjoint maps: fall back to the union so pairs are still drawn
        box = (min(cx0, gx0), min(cy0, gy0), max(cx1, gx1), max(cy1, gy1))
    return box


def _dense(line, pitch):
    return line.sample(pitch) if line.is_curve() else line.points[:1]


def eval_shortest_path(C, G, n=500, seed=0, delta=1.0, frechet_pitch=5.0, symmetric=False):
    """Route ``n`` random origin/destination pairs in both maps and compare.

    Points are drawn uniformly in the intersection of the two bounding
    boxes and snapped to the nearest vertex of each map.  A pair is found
    when both maps connect their snapped vertices.

    The discrete Frechet distance is taken between the two routes resampled
    every ``frechet_pitch`` meters, so that it does not depend on where each
    map happens to place its shape points.
    """
    if C.is_empty() or G.is_empty():
        raise InvalidInputError("both graphs must have vertices")
    if n < 1:
        raise InvalidInputError("need at least one pair")
    if not frechet_pitch > 0:
        raise InvalidInputError("resampling pitch must be positive")
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = _overlap_box(C, G)
    pts = rng.uniform((x0, y0, x0, y0), (x1, y1, x1, y1), size=(n, 4))
    snap_c, snap_g = VertexLocator(C), VertexLocator(G)
    vert = _vertical if not symmetric else lambda P, Q, d: 0.5 * (_vertical(P, Q, d) + _vertical(Q, P, d))
    pairs = []
    for i, (ax, ay, bx, by) in enumerate(pts):
        pc = shortest_path(C, snap_c((ax, ay)), snap_c((bx, by)))
        pg = shortest_path(G, snap_g((ax, ay)), snap_g((bx, by)))
        rec = {"pair_id": i, "found": pc is not None and pg is not None}
        if rec["found"]:
            lc, lg = pc.polyline(), pg.polyline()
            rec["frechet_m"] = discrete_frechet(_dense(lc, frechet_pitch), _dense(lg, frechet_pitch))
            rec["avg_vertical_m"] = vert(lc, lg, delta)
            rec["length_c_km"] = pc.length / 1000.0
            rec["length_g_km"] = pg.length / 1000.0
        else:
            rec.update(frechet_m=float("nan"), avg_vertical_m=float("nan"), length_c_km=float("nan"), length_g_km=float("nan"))
        pairs.append(rec)
    return ShortestPathReport(n, pairs)
