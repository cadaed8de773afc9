"""Command line entry point: ``trackmap stats|construct|eval|synth|bench``.

Exit status is 0 on success, 1 when the command fails at run time (missing
file, unusable data) and 2 on a usage error.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bench import BenchmarkConfig, run_benchmark, sha256_file
from .construct import construct
from .construct.params import ALGORITHMS, DEFAULT_PROXIMITY, ConstructParams
from .errors import InvalidInputError
from .evaluate import (
    MEASURES,
    eval_directed_hausdorff,
    eval_graph_sampling,
    eval_path_based,
    eval_shortest_path,
    write_rows_csv,
    write_summary_json,
)
from .evaluate.reports import fmt3
from .graph import graph_stats
from .graphio import read_graph_dir, write_graph_dir
from .synthetic import gen_synthetic
from .tracks import dataset_stats, load_tracks, write_tracks

_D = ConstructParams()


class UsageError(Exception):
    """Flags that parse but make no sense together (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2 on usage errors; keep that but make
    # --help output show every default
    def __init__(self, *args, **kw):
        kw.setdefault("formatter_class", argparse.ArgumentDefaultsHelpFormatter)
        super().__init__(*args, **kw)


def _add_construct_flags(p):
    g = p.add_argument_group("construction parameters")
    g.add_argument("--algo", choices=ALGORITHMS, default=_D.algorithm, help="constructor family")
    g.add_argument("--epsilon", type=float, default=_D.epsilon, help="incremental: Frechet matching threshold (m)")
    g.add_argument(
        "--proximity",
        type=float,
        default=None,
        help="merge radius in m; per-algorithm default " + ", ".join(f"{k} {v:g}" for k, v in DEFAULT_PROXIMITY.items()),
    )
    g.add_argument("--bearing", type=float, default=_D.bearing, help="heading tolerance (degrees)")
    g.add_argument("--no-clarify", action="store_true", help="local: skip the track clarification pass")
    g.add_argument("--attraction-radius", type=float, default=_D.attraction_radius, help="local: clarification radius (m)")
    g.add_argument("--iterations", type=int, default=_D.iterations, help="local: clarification iterations")
    g.add_argument("--damping", type=float, default=_D.damping, help="local: clarification step damping")
    g.add_argument("--cell", type=float, default=_D.cell, help="kde: raster cell size (m)")
    g.add_argument("--blur", type=float, default=_D.blur, help="kde: Gaussian blur sigma (cells)")
    g.add_argument("--threshold", type=float, default=_D.threshold, help="kde: density threshold (tracks per cell)")
    g.add_argument("--multi-threshold", action="store_true", help="kde: union of skeletons at several thresholds")
    g.add_argument("--seed-spacing", type=float, default=_D.seed_spacing, help="kmeans: seed spacing along tracks (m)")
    g.add_argument("--turn-angle", type=float, default=_D.turn_angle, help="tracebundle: minimum heading change (degrees)")
    g.add_argument("--speed-max", type=float, default=_D.speed_max, help="tracebundle: maximum turning speed (km/h)")
    g.add_argument("--min-support", type=int, default=_D.min_support, help="tracebundle: turns/tracks needed per node and road")


def params_from_args(a):
    try:
        return _params(a)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def _params(a):
    return ConstructParams(
        algorithm=a.algo,
        epsilon=a.epsilon,
        proximity=a.proximity,
        bearing=a.bearing,
        clarify=not a.no_clarify,
        attraction_radius=a.attraction_radius,
        iterations=a.iterations,
        damping=a.damping,
        cell=a.cell,
        blur=a.blur,
        threshold=a.threshold,
        multi_threshold=a.multi_threshold,
        seed_spacing=a.seed_spacing,
        turn_angle=a.turn_angle,
        speed_max=a.speed_max,
        min_support=a.min_support,
    )


def _add_common(p, suppress=False):
    def d(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--threads", type=int, default=d(1), help="worker cap")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False), help="log progress to stderr")


def build_parser():
    parser = _Parser(prog="trackmap", description="Build road maps from GPS tracks and score them against a reference map.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(parser)
    # the same flags are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("stats", help="dataset statistics of a track directory")
    p.add_argument("tracks", help="directory of trip_*.txt files")
    p.add_argument("--policy", choices=("drop", "error"), default="drop", help="what to do with bad timestamps")

    p = add("construct", help="build a map from tracks")
    p.add_argument("tracks", help="directory of trip_*.txt files")
    p.add_argument("out", help="output directory for vertices.txt, edges.txt, manifest.txt")
    _add_construct_flags(p)

    p = add("eval", help="score map C against ground truth G")
    p.add_argument("C", help="directory with the constructed map")
    p.add_argument("G", help="directory with the ground-truth map")
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--out", help="write per-path/pair/run rows here (CSV)")
    p.add_argument("--summary", help="write the summary here (JSON)")
    p.add_argument("--delta", type=float, default=1.0, help="sampling pitch for Hausdorff / vertical distance (m)")
    p.add_argument("--k", type=int, default=3, choices=(1, 2, 3), help="pathbased: links per path")
    p.add_argument("--tau", type=float, default=0.5, help="pathbased: bisection tolerance (m)")
    p.add_argument("--n", type=int, default=500, help="shortestpath: number of pairs")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--matched-dist", type=float, default=10.0, help="graphsampling: max marble-hole distance (m)")
    p.add_argument("--density", type=float, default=5.0, help="graphsampling: sample spacing (m)")
    p.add_argument("--radius", type=float, default=300.0, help="graphsampling: graph-distance radius (m)")
    p.add_argument("--runs", type=int, default=1000, help="graphsampling: number of roots")
    p.add_argument("--unmodified", action="store_true", help="graphsampling: keep roots with no nearby G")

    p = add("synth", help="write a synthetic grid city and its tracks")
    p.add_argument("out", help="output directory (truth/ and tracks/ are created)")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--spacing", type=float, default=500.0, help="block size (m)")
    p.add_argument("--n-tracks", type=int, default=200)
    p.add_argument("--noise", type=float, default=5.0, help="GPS noise sigma per coordinate (m)")
    p.add_argument("--dt", type=float, default=3.0, help="sampling interval (s)")
    p.add_argument("--speed", type=float, default=30.0, help="vehicle speed (km/h)")
    p.add_argument("--seed", type=int, default=0)

    p = add("bench", help="run a benchmark described by a JSON config")
    p.add_argument("config", help="benchmark config (JSON)")
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument("--seed", type=int, help="override the config's master seed")
    return parser


def _emit(args, data, title=None):
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True, default=float))
        return
    if title:
        print(title)
    width = max(len(k) for k in data) if data else 0
    for k, v in data.items():
        print(f"  {k:<{width}}  {fmt3(v)}")


def _require_dir(path):
    if not Path(path).is_dir():
        raise FileNotFoundError(f"no such directory: {path}")


def cmd_stats(args):
    _require_dir(args.tracks)
    tracks = load_tracks(args.tracks, policy=args.policy)
    s = dataset_stats(tracks)
    _emit(args, {"tracks": s.tracks, "sampling_rate_s": s.sampling_rate_s, "length_km": s.length_km, "speed_kmh": s.speed_kmh}, "dataset")
    return 0


def cmd_construct(args):
    _require_dir(args.tracks)
    params = params_from_args(args)
    tracks = load_tracks(args.tracks)
    C = construct(tracks, params)
    out = Path(args.out)
    write_graph_dir(C, out)
    extra = {"vertices_sha256": sha256_file(out / "vertices.txt"), "edges_sha256": sha256_file(out / "edges.txt")}
    (out / "manifest.txt").write_text(params.to_manifest(extra), encoding="utf-8", newline="\n")
    s = graph_stats(C)
    _emit(args, {"vertices": s.vertices, "edges": s.edges, "length_km": s.length_km}, f"map written to {out}")
    return 0


def cmd_eval(args):
    for p in (args.C, args.G):
        _require_dir(p)
    C, G = read_graph_dir(args.C), read_graph_dir(args.G)
    m = args.measure
    for name in ("delta", "tau", "matched_dist", "density", "radius"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if args.n < 1 or args.runs < 1:
        raise UsageError("--n and --runs must be at least 1")
    if m == "hausdorff":
        rep = eval_directed_hausdorff(C, G, args.delta)
    elif m == "pathbased":
        rep = eval_path_based(C, G, args.k, args.tau)
    elif m == "shortestpath":
        rep = eval_shortest_path(C, G, args.n, args.seed, args.delta)
    else:
        rep = eval_graph_sampling(
            C, G, args.matched_dist, args.density, args.radius, args.runs, args.seed, modified=not args.unmodified
        )
    if args.out:
        write_rows_csv(rep.rows(), args.out)
    if args.summary:
        write_summary_json(rep.summary(), args.summary)
    _emit(args, rep.summary(), m)
    return 0


def cmd_synth(args):
    G, tracks = gen_synthetic(
        args.rows, args.cols, args.spacing, args.n_tracks, args.noise, args.dt, args.speed, args.seed
    )
    out = Path(args.out)
    write_graph_dir(G, out / "truth")
    write_tracks(tracks, out / "tracks")
    s = graph_stats(G)
    _emit(args, {"vertices": s.vertices, "edges": s.edges, "length_km": s.length_km, "tracks": len(tracks)}, f"synthetic city written to {out}")
    return 0


def cmd_bench(args):
    if not Path(args.config).is_file():
        raise FileNotFoundError(f"no such file: {args.config}")
    cfg = BenchmarkConfig.from_json(args.config)
    if args.out:
        cfg.output = Path(args.out)
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.threads = args.threads
    res = run_benchmark(cfg)
    if args.json:
        print(json.dumps({"output": str(res.output), "cells": len(res.rows), "failures": res.failures}, indent=2))
    else:
        print(f"summary written to {res.output / 'summary.csv'}")
        for f in res.failures:
            print("  failed:", " / ".join(x for x in f if x))
    return 0 if res.ok else 1


COMMANDS = {"stats": cmd_stats, "construct": cmd_construct, "eval": cmd_eval, "synth": cmd_synth, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"trackmap: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"trackmap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
