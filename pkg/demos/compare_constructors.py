"""
Five ways to build a map from the same tracks
==============================================

We drive 200 noisy trips around a 3x3 grid city, build a map with every
constructor, and score each map against the true grid with all four
measures.  Runs in about a minute.
"""

import time

from trackmap import graph_stats
from trackmap.construct import ALGORITHMS, ConstructParams, construct
from trackmap.evaluate import eval_directed_hausdorff, eval_graph_sampling, eval_path_based, eval_shortest_path
from trackmap.synthetic import gen_synthetic
from trackmap.tracks import dataset_stats

# ground truth G and the tracks, 5 m GPS noise
G, tracks = gen_synthetic(noise=5.0, seed=1)
print(dataset_stats(tracks))
print("truth:", graph_stats(G))
print()

header = f"{'algorithm':<12} {'V':>4} {'E':>4} {'km':>6} {'hausd':>6} {'pb max':>7} {'pb 5%':>6} {'sp found':>8} {'sp frechet':>10} {'F@10':>5} {'s':>5}"
print(header)
print("-" * len(header))
for algo in ALGORITHMS:
    t0 = time.perf_counter()
    C = construct(tracks, ConstructParams(algorithm=algo))
    s = graph_stats(C)
    h = eval_directed_hausdorff(C, G).distance
    pb = eval_path_based(C, G, k=2).summary()
    sp = eval_shortest_path(C, G, n=200, seed=2).summary()
    f = eval_graph_sampling(C, G, matched_dist=10, runs=300, seed=3).f_score
    took = time.perf_counter() - t0
    print(
        f"{algo:<12} {s.vertices:>4} {s.edges:>4} {s.length_km:>6.2f} {h:>6.1f} {pb['max']:>7.1f} {pb['d5']:>6.1f} "
        f"{sp['found_fraction']:>8.1%} {sp['frechet_m_avg']:>10.1f} {f:>5.2f} {took:>5.1f}"
    )

# Things to notice:
#  - the Hausdorff and path-based numbers agree on which maps sit close to the streets,
#    but path-based is never smaller, because it also asks that the order of points match
#  - found% drops for maps that miss connections, even when their geometry is good
#  - the shortest-path Frechet values are large for every map, TraceBundle included:
#    a grid has many routes of equal length, and C and G need not pick the same one
