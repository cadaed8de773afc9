"""Synthetic grid cities with known ground truth."""

import numpy as np

from .errors import InvalidInputError
from .graph import RoadGraph
from .tracks import KMH, Track


def grid_graph(rows, cols, spacing):
    """Grid with vertex ``r*cols + c`` at ``(c*spacing, r*spacing)``.

    Horizontal edges are numbered first (row by row), then vertical ones.
    """
    if rows < 2 or cols < 2:
        raise InvalidInputError("grid needs at least 2 rows and 2 columns")
    if not spacing > 0:
        raise InvalidInputError("grid spacing must be positive")
    verts = {r * cols + c: (c * spacing, r * spacing) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols - 1):
            edges.append((len(edges), r * cols + c, r * cols + c + 1, None))
    for r in range(rows - 1):
        for c in range(cols):
            edges.append((len(edges), r * cols + c, (r + 1) * cols + c, None))
    return RoadGraph(verts, edges)


def boundary_vertices(rows, cols):
    return [r * cols + c for r in range(rows) for c in range(cols) if r in (0, rows - 1) or c in (0, cols - 1)]


def random_route(rows, cols, rng):
    """A random shortest lattice route between two distinct boundary vertices.

    Returns the list of visited grid vertex ids.
    """
    ends = boundary_vertices(rows, cols)
    a, b = rng.choice(len(ends), size=2, replace=False)
    a, b = ends[a], ends[b]
    r0, c0 = divmod(a, cols)
    r1, c1 = divmod(b, cols)
    moves = [(0, np.sign(c1 - c0))] * abs(c1 - c0) + [(np.sign(r1 - r0), 0)] * abs(r1 - r0)
    moves = [moves[i] for i in rng.permutation(len(moves))]
    route = [a]
    r, c = r0, c0
    for dr, dc in moves:
        r, c = r + int(dr), c + int(dc)
        route.append(r * cols + c)
    return route


def turn_vertices(route):
    """Route vertices where the direction of travel changes."""
    out = []
    for a, b, c in zip(route[:-2], route[1:-1], route[2:]):
        if b - a != c - b:
            out.append(b)
    return out


def _sample_route(points, step):
    """Points every ``step`` meters along the route; corners are kept too."""
    seg = np.hypot(*np.diff(points, axis=0).T)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    arcs = np.arange(0.0, total, step)
    arcs = np.union1d(np.append(arcs, total), cum)
    idx = np.clip(np.searchsorted(cum, arcs, side="right") - 1, 0, len(seg) - 1)
    f = (arcs - cum[idx]) / seg[idx]
    return arcs, points[idx] + f[:, None] * (points[idx + 1] - points[idx])


def gen_synthetic(
    rows=3,
    cols=3,
    spacing=500.0,
    n_tracks=200,
    noise=5.0,
    dt=3.0,
    speed=30.0,
    seed=0,
    return_routes=False,
):
    """Grid ground truth plus noisy tracks along random shortest routes.

    Vehicles move at constant ``speed`` (km/h) and report every ``dt``
    seconds; route corners are always reported as well, so noise-free
    tracks lie exactly on the graph.  ``noise`` is the per-coordinate
    Gaussian standard deviation in meters.
    """
    if n_tracks < 0:
        raise InvalidInputError("n_tracks must be non-negative")
    if dt <= 0 or speed <= 0 or noise < 0:
        raise InvalidInputError("dt and speed must be positive, noise non-negative")
    graph = grid_graph(rows, cols, spacing)
    rng = np.random.default_rng(seed)
    v = speed / KMH
    width = len(str(max(n_tracks - 1, 0)))
    tracks, routes = [], []
    for k in range(n_tracks):
        route = random_route(rows, cols, rng)
        pts = np.array([graph.vertices[i] for i in route])
        arcs, xy = _sample_route(pts, v * dt)
        if noise > 0:
            xy = xy + rng.normal(0.0, noise, size=xy.shape)
        tracks.append(Track(f"{k:0{width}d}", xy, arcs / v))
        routes.append(route)
    if return_routes:
        return graph, tracks, routes
    return graph, tracks
