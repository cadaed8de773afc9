"""Directed Hausdorff distance from a constructed map to the ground truth."""

import numpy as np

from ..errors import InvalidInputError
from ..geometry import SegmentIndex
from .reports import HausdorffReport


def _require_edges(graph, name):
    if graph.is_empty() or not graph.edges:
        raise InvalidInputError(f"{name} graph is empty")


def eval_directed_hausdorff(C, G, delta=1.0):
    """Max over points of C of the distance to G, sampled every ``delta`` meters.

    Also reports each C edge's own directed distance, which locates where C
    strays from G.
    """
    _require_edges(C, "constructed")
    _require_edges(G, "ground-truth")
    if delta <= 0:
        raise InvalidInputError("sampling pitch must be positive")
    index = SegmentIndex.from_polylines(G.polylines())
    per_edge = {}
    for e in C.iter_edges():
        pts = e.geometry.sample(delta)
        per_edge[e.id] = float(index.distance(pts).max())
    return HausdorffReport(max(per_edge.values()), per_edge, delta)


def hausdorff_distance(C, G, delta=1.0):
    return eval_directed_hausdorff(C, G, delta).distance


def per_edge_array(report):
    return np.array([report.per_edge[k] for k in sorted(report.per_edge)])
