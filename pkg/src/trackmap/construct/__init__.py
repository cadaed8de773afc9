"""Map construction algorithms.

Use :func:`construct` with a :class:`ConstructParams` to pick an algorithm
by name, or call the per-family functions directly.
"""

from .incremental import construct_incremental_frechet
from .kde import DensityGrid, construct_kde, density_grid
from .kmeans import construct_kmeans
from .local import clarify_tracks, construct_incremental_local
from .params import ALGORITHMS, ConstructParams
from .tracebundle import construct_tracebundle, detect_intersections, detect_turns


def construct(tracks, params=None):
    """Build a RoadGraph from ``tracks`` with the algorithm named in ``params``."""
    p = params or ConstructParams()
    tracks = list(tracks)
    if p.algorithm == "incremental":
        return construct_incremental_frechet(tracks, p.epsilon)
    if p.algorithm == "local":
        if p.clarify:
            tracks = clarify_tracks(tracks, p.attraction_radius, p.iterations, p.damping, p.bearing)
        return construct_incremental_local(tracks, p.proximity, p.bearing)
    if p.algorithm == "kde":
        return construct_kde(tracks, p.cell, p.blur, p.threshold, p.multi_threshold)
    if p.algorithm == "kmeans":
        return construct_kmeans(tracks, p.seed_spacing, p.bearing, p.proximity)
    return construct_tracebundle(tracks, p.turn_angle, p.speed_max, p.proximity, p.min_support)


__all__ = [
    "ALGORITHMS",
    "ConstructParams",
    "DensityGrid",
    "clarify_tracks",
    "construct",
    "construct_incremental_frechet",
    "construct_incremental_local",
    "construct_kde",
    "construct_kmeans",
    "construct_tracebundle",
    "density_grid",
    "detect_intersections",
    "detect_turns",
]
