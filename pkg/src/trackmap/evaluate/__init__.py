"""Measures comparing a constructed map C against a ground-truth map G."""

from .hausdorff import eval_directed_hausdorff, hausdorff_distance
from .pathbased import eval_path_based, link_one_distances, map_match_min_frechet
from .reports import (
    GraphSamplingReport,
    HausdorffReport,
    PathBasedReport,
    ShortestPathReport,
    d_percent_distance,
    write_rows_csv,
    write_summary_csv,
    write_summary_json,
)
from .sampling import eval_graph_sampling, match_count
from .shortestpath import average_vertical_distance, eval_shortest_path, symmetric_vertical_distance

MEASURES = ("hausdorff", "pathbased", "shortestpath", "graphsampling")

__all__ = [
    "MEASURES",
    "GraphSamplingReport",
    "HausdorffReport",
    "PathBasedReport",
    "ShortestPathReport",
    "average_vertical_distance",
    "d_percent_distance",
    "eval_directed_hausdorff",
    "eval_graph_sampling",
    "eval_path_based",
    "eval_shortest_path",
    "hausdorff_distance",
    "link_one_distances",
    "map_match_min_frechet",
    "match_count",
    "symmetric_vertical_distance",
    "write_rows_csv",
    "write_summary_csv",
    "write_summary_json",
]
