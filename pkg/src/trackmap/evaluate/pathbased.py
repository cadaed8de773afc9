"""Path-based distance: Frechet map matching of every short link path of C onto G."""

from ..errors import InvalidInputError
from ..frechet import GraphFreeSpace, map_match_distance
from ..geometry import as_polyline
from ..graph import enumerate_link_paths
from .reports import PathBasedReport


def _space(G):
    if isinstance(G, GraphFreeSpace):
        return G
    if G.is_empty() or not G.edges:
        raise InvalidInputError("ground-truth graph is empty")
    return GraphFreeSpace.from_graph(G)


def map_match_min_frechet(path, G, tau=0.5, both_directions=True):
    """Smallest leash (within ``tau``) matching ``path`` to some path of G.

    ``G`` may be a RoadGraph or a prepared GraphFreeSpace (reuse one when
    matching many paths).  Since maps are undirected, both orientations of
    the path are tried and the smaller value is returned.
    """
    space = _space(G)
    line = as_polyline(path)
    best = map_match_distance(line, space, tau)
    if both_directions:
        best = min(best, map_match_distance(line.reversed(), space, tau))
    return best


def eval_path_based(C, G, k=3, tau=0.5, both_directions=True, paths=None):
    """Match every link path of C (``k`` links long) onto G.

    ``paths`` overrides the enumeration, which is handy for tests.  Each
    vertex and edge of C gets a local signature: the largest distance over
    the evaluated paths that contain it.
    """
    if C.is_empty() or not C.edges:
        raise InvalidInputError("constructed graph is empty")
    space = _space(G)
    if paths is None:
        paths = enumerate_link_paths(C, k)
    paths = [p for p in paths if p.length > 0]
    if not paths:
        raise InvalidInputError("constructed graph has no paths to evaluate")
    rows = []
    vsig, esig = {}, {}
    for pid, p in enumerate(paths):
        d = map_match_min_frechet(p.polyline(), space, tau, both_directions)
        rows.append((pid, d, p.edge_ids, p.length))
        for v in p.vertices:
            vsig[v] = max(vsig.get(v, 0.0), d)
        for e in p.edge_ids:
            esig[e] = max(esig.get(e, 0.0), d)
    return PathBasedReport(k, tau, rows, vsig, esig)


def link_one_distances(C, G, tau=0.5):
    """Per-edge map-matching distance of every link-1 path (edge id -> meters)."""
    rep = eval_path_based(C, G, k=1, tau=tau)
    out = {}
    for _, d, edges, _ in rep.paths:
        for e in edges:
            out[e] = d
    return out

