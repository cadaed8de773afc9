"""Benchmark runner: build maps with several algorithms and score each one.

A benchmark is described by a JSON file::

    {
      "seed": 7,
      "output": "bench-out",
      "threads": 1,
      "datasets": [
        {"name": "grid", "synthetic": {"rows": 3, "cols": 3, "noise": 5}},
        {"name": "city", "tracks": "city/trips", "ground_truth": "city/osm"}
      ],
      "algorithms": [
        {"algorithm": "kde", "cell": 16},
        {"algorithm": "kde", "name": "kde-multi", "multi_threshold": true},
        {"algorithm": "groundtruth"}
      ],
      "measures": [
        {"measure": "hausdorff"},
        {"measure": "graphsampling", "matched_dist": 10}
      ]
    }

Relative paths are resolved against the config file.  ``ground_truth`` is
a directory holding ``vertices.txt`` and ``edges.txt``.  The pseudo
algorithm ``groundtruth`` scores G against itself, which is a handy sanity
row.  Measures accept the keyword arguments of their ``eval_*`` function,
plus an optional ``name`` when the same measure appears twice.

Outputs go to ``<output>/<dataset>/<algorithm>/``: the map
(``vertices.txt``, ``edges.txt``), ``manifest.txt``, and per measure
``<name>.csv`` and ``<name>.summary.json``.  ``<output>/summary.csv``
collects one row per (dataset, algorithm, measure).  Everything written
is deterministic for a fixed master seed.
"""

import hashlib
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .construct import construct
from .construct.params import ALGORITHMS, ConstructParams
from .errors import InvalidInputError
from .evaluate import (
    MEASURES,
    eval_directed_hausdorff,
    eval_graph_sampling,
    eval_path_based,
    eval_shortest_path,
    write_rows_csv,
    write_summary_csv,
    write_summary_json,
)
from .graph import graph_stats
from .graphio import read_graph_dir, write_graph_dir
from .synthetic import gen_synthetic
from .tracks import load_tracks, write_tracks

log = logging.getLogger(__name__)

GROUND_TRUTH = "groundtruth"

_EVAL = {
    "hausdorff": eval_directed_hausdorff,
    "pathbased": eval_path_based,
    "shortestpath": eval_shortest_path,
    "graphsampling": eval_graph_sampling,
}
_SEEDED = {"shortestpath", "graphsampling"}


def task_seed(master, *names):
    """Stable 63-bit seed for a task; adding tasks never shifts the others."""
    h = hashlib.sha256("/".join([str(master), *names]).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big") >> 1


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class AlgorithmSpec:
    name: str
    params: ConstructParams = None  # None for the ground-truth pseudo algorithm

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        algo = d.pop("algorithm", None)
        name = d.pop("name", algo)
        if algo == GROUND_TRUTH:
            return cls(name, None)
        if algo not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {algo!r}")
        return cls(name, ConstructParams(algorithm=algo, **d))


@dataclass
class MeasureSpec:
    name: str
    measure: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        measure = d.pop("measure", None)
        if measure not in MEASURES:
            raise InvalidInputError(f"unknown measure {measure!r}; choose from {', '.join(MEASURES)}")
        if measure == "graphsampling" and "matched_dist" not in d:
            raise InvalidInputError("graphsampling needs matched_dist")
        name = d.pop("name", measure)
        return cls(name, measure, d)


@dataclass
class DatasetSpec:
    name: str
    tracks: Path = None
    ground_truth: Path = None
    synthetic: dict = None


@dataclass
class BenchmarkConfig:
    datasets: list
    algorithms: list
    measures: list
    output: Path
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.datasets:
            raise InvalidInputError("benchmark needs at least one dataset")
        if not self.algorithms or not self.measures:
            raise InvalidInputError("benchmark needs at least one algorithm and one measure")
        for group in (self.datasets, self.algorithms, self.measures):
            names = [x.name for x in group]
            if len(set(names)) != len(names):
                raise InvalidInputError(f"duplicate names in config: {names}")

    @classmethod
    def from_dict(cls, data, base="."):
        base = Path(base)
        datasets = []
        for d in data.get("datasets", []):
            if "name" not in d:
                raise InvalidInputError("every dataset needs a name")
            if "synthetic" in d:
                datasets.append(DatasetSpec(d["name"], synthetic=dict(d["synthetic"])))
            else:
                if "tracks" not in d or "ground_truth" not in d:
                    raise InvalidInputError(f"dataset {d['name']!r} needs tracks and ground_truth (or synthetic)")
                datasets.append(DatasetSpec(d["name"], base / d["tracks"], base / d["ground_truth"]))
        return cls(
            datasets=datasets,
            algorithms=[AlgorithmSpec.from_dict(a) for a in data.get("algorithms", [])],
            measures=[MeasureSpec.from_dict(m) for m in data.get("measures", [])],
            output=base / data.get("output", "bench-out"),
            seed=int(data.get("seed", 0)),
            threads=int(data.get("threads", 1)),
        )

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data, path.parent)


@dataclass
class BenchmarkResult:
    output: Path
    rows: list
    failures: list

    @property
    def ok(self):
        """False only when every cell failed."""
        return any(r["status"] == "ok" for r in self.rows)


def _load_dataset(spec, seed, out):
    if spec.synthetic is not None:
        opts = {"seed": task_seed(seed, spec.name, "synthetic"), **spec.synthetic}
        G, tracks = gen_synthetic(**opts)
        write_tracks(tracks, out / "tracks")
    else:
        tracks = load_tracks(spec.tracks)
        G = read_graph_dir(spec.ground_truth)
    write_graph_dir(G, out / "truth")
    return G, tracks


def _run_measure(m, C, G, seed):
    opts = dict(m.options)
    if m.measure in _SEEDED:
        opts.setdefault("seed", seed)
    return _EVAL[m.measure](C, G, **opts)


def _cell(config, ds, algo, G, tracks, out):
    """Construct one map and score it with every measure; returns summary rows."""
    d = out / ds.name / algo.name
    base = {"dataset": ds.name, "algorithm": algo.name}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            C = G if algo.params is None else construct(tracks, algo.params)
        for w in caught:
            log.warning("%s/%s: %s", ds.name, algo.name, w.message)
        write_graph_dir(C, d)
        extra = {
            "dataset": ds.name,
            "vertices_sha256": sha256_file(d / "vertices.txt"),
            "edges_sha256": sha256_file(d / "edges.txt"),
        }
        text = algo.params.to_manifest(extra) if algo.params else f"algorithm={GROUND_TRUTH}\n" + "".join(
            f"{k}={v}\n" for k, v in extra.items()
        )
        (d / "manifest.txt").write_text(text, encoding="utf-8", newline="\n")
        manifest = sha256_file(d / "manifest.txt")
        # score what was written, not what is in memory
        C = read_graph_dir(d)
    except Exception as exc:  # a failing constructor must not sink the other cells
        log.error("%s/%s construction failed: %s", ds.name, algo.name, exc)
        return [{**base, "measure": m.name, "status": f"construct failed: {exc}"} for m in config.measures]
    stats = graph_stats(C)
    base.update(vertices=stats.vertices, edges=stats.edges, length_km=stats.length_km)
    rows = []
    for m in config.measures:
        seed = task_seed(config.seed, ds.name, algo.name, m.name)
        try:
            rep = _run_measure(m, C, G, seed)
        except Exception as exc:
            log.error("%s/%s/%s failed: %s", ds.name, algo.name, m.name, exc)
            rows.append({**base, "measure": m.name, "status": f"failed: {exc}"})
            continue
        tag = {"manifest_sha256": manifest}
        write_rows_csv(rep.rows(), d / f"{m.name}.csv", extra=tag)
        summary = rep.summary()
        write_summary_json(summary, d / f"{m.name}.summary.json", extra={**tag, "seed": seed})
        summary.pop("measure", None)
        rows.append({**base, "measure": m.name, "status": "ok", **summary})
    return rows


def run_benchmark(config):
    """Run every (dataset, algorithm, measure) cell and write the report bundle."""
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    rows, failures = [], []
    jobs = []
    for ds in config.datasets:
        try:
            G, tracks = _load_dataset(ds, config.seed, out / ds.name)
        except Exception as exc:
            log.error("dataset %s unusable: %s", ds.name, exc)
            rows.append({"dataset": ds.name, "algorithm": "", "measure": "", "status": f"dataset failed: {exc}"})
            failures.append((ds.name, "", str(exc)))
            continue
        for algo in config.algorithms:
            jobs.append((ds, algo, G, tracks))
    with ThreadPoolExecutor(max_workers=max(1, config.threads)) as pool:
        results = list(pool.map(lambda j: _cell(config, *j, out), jobs))
    for cell_rows in results:
        for r in cell_rows:
            rows.append(r)
            if r["status"] != "ok":
                failures.append((r["dataset"], r["algorithm"], r["status"]))
    # config order, whatever order the cells finished in
    rank = {}
    for group in (config.datasets, config.algorithms, config.measures):
        rank.update({x.name: k for k, x in enumerate(group)})
    rows.sort(key=lambda r: (rank.get(r["dataset"], -1), rank.get(r["algorithm"], -1), rank.get(r["measure"], -1)))
    write_summary_csv(rows, out / "summary.csv")
    return BenchmarkResult(out, rows, failures)
