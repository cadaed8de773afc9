"""Build road maps from GPS tracks and compare them against a reference map."""

from .errors import DuplicateIdError, InvalidInputError, ParseError
from .geometry import (
    PolyLine,
    directed_hausdorff,
    discrete_frechet,
    point_to_polyline_distance,
)
from .frechet import frechet_decision, frechet_distance
from .graph import (
    GraphPath,
    GraphStats,
    RoadGraph,
    enumerate_link_paths,
    graph_stats,
    nearest_vertex,
    shortest_path,
    validate_graph,
)
from .graphio import read_graph, write_graph

from .tracks import Track, dataset_stats, load_tracks, write_tracks
from .synthetic import gen_synthetic, grid_graph
from .construct import ConstructParams, construct
from .evaluate import (
    eval_directed_hausdorff,
    eval_graph_sampling,
    eval_path_based,
    eval_shortest_path,
)
from .bench import BenchmarkConfig, run_benchmark

__version__ = "0.1.0"
