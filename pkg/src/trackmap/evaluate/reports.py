"""Report containers for the comparison measures, plus CSV/JSON writers.

Each report exposes ``rows()`` (one dict per path, pair or run, in a fixed
column order) and ``summary()`` (a flat dict).  Detail rows keep full float
precision; summaries written with :func:`write_summary_csv` use 3 decimals.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

D_PERCENTS = (2, 5, 10, 15)


def d_percent_distance(values, d):
    """Largest value left after discarding the d% largest ones."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return math.nan
    drop = int(math.floor(len(v) * d / 100.0))
    return float(v[len(v) - 1 - drop]) if drop < len(v) else float(v[0])


def describe(values):
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        return {"min": math.nan, "max": math.nan, "avg": math.nan, "std": math.nan}
    return {"min": float(v.min()), "max": float(v.max()), "avg": float(v.mean()), "std": float(v.std())}


@dataclass
class HausdorffReport:
    distance: float
    per_edge: dict  # edge id -> directed Hausdorff of that edge to G
    delta: float

    def rows(self):
        return [{"edge_id": e, "distance_m": d} for e, d in sorted(self.per_edge.items())]

    def summary(self):
        return {"measure": "hausdorff", "distance_m": self.distance, "edges": len(self.per_edge), "delta_m": self.delta}


@dataclass
class PathBasedReport:
    k: int
    tolerance: float
    paths: list  # (path id, distance, edge ids, length m)
    vertex_signature: dict = field(default_factory=dict)
    edge_signature: dict = field(default_factory=dict)

    @property
    def distances(self):
        return np.array([p[1] for p in self.paths], dtype=float)

    def d_percent(self, d):
        return d_percent_distance(self.distances, d)

    def rows(self):
        out = []
        for pid, dist, edges, length in self.paths:
            out.append({"path_id": pid, "distance_m": dist, "length_m": length, "edges": " ".join(str(e) for e in edges)})
        return out

    def summary(self):
        v = self.distances
        s = {
            "measure": "pathbased",
            "k": self.k,
            "paths": len(v),
            "min": float(v.min()),
            "max": float(v.max()),
            "median": float(np.median(v)),
            "avg": float(v.mean()),
        }
        for d in D_PERCENTS:
            s[f"d{d}"] = self.d_percent(d)
        return s


@dataclass
class ShortestPathReport:
    requested: int
    pairs: list  # dicts with pair_id, found, frechet_m, avg_vertical_m, length_c_km, length_g_km

    @property
    def found(self):
        return [p for p in self.pairs if p["found"]]

    @property
    def found_fraction(self):
        return len(self.found) / self.requested if self.requested else 0.0

    def column(self, name):
        return np.array([p[name] for p in self.found], dtype=float)

    def rows(self):
        return [dict(p) for p in self.pairs]

    def summary(self):
        s = {"measure": "shortestpath", "requested": self.requested, "found": len(self.found), "found_fraction": self.found_fraction}
        for col in ("frechet_m", "avg_vertical_m", "length_c_km", "length_g_km"):
            for k, v in describe(self.column(col)).items():
                s[f"{col}_{k}"] = v
        return s


@dataclass
class GraphSamplingReport:
    matched_marbles: int
    spurious_marbles: int
    matched_holes: int
    empty_holes: int
    runs: list  # per-run dicts
    skipped_roots: int = 0
    matched_dist: float = math.nan

    @property
    def precision(self):
        n = self.matched_marbles + self.spurious_marbles
        return self.matched_marbles / n if n else 0.0

    @property
    def recall(self):
        n = self.matched_holes + self.empty_holes
        return self.matched_holes / n if n else 0.0

    @property
    def f_score(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    @property
    def spurious(self):
        return 1.0 - self.precision

    @property
    def missing(self):
        return 1.0 - self.recall

    def rows(self):
        return [dict(r) for r in self.runs]

    def summary(self):
        return {
            "measure": "graphsampling",
            "matched_dist_m": self.matched_dist,
            "runs": len(self.runs),
            "skipped_roots": self.skipped_roots,
            "matched_marbles": self.matched_marbles,
            "spurious_marbles": self.spurious_marbles,
            "matched_holes": self.matched_holes,
            "empty_holes": self.empty_holes,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
        }


def _cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_rows_csv(rows, path, extra=None):
    """Write detail rows; ``extra`` columns (e.g. a manifest hash) are appended."""
    rows = list(rows)
    extra = extra or {}
    header = list(rows[0].keys()) if rows else []
    header += [k for k in extra if k not in header]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            full = {**r, **extra}
            w.writerow([_cell(full.get(k, "")) for k in header])
    return path


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_summary_json(summary, path, extra=None):
    data = {k: _json_value(v) for k, v in {**summary, **(extra or {})}.items()}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def fmt3(v):
    if isinstance(v, bool) or not isinstance(v, (float, np.floating)):
        return str(v)
    return "nan" if math.isnan(v) else f"{v:.3f}"


def write_summary_csv(rows, path):
    """Combined summary table; floats rounded to 3 decimals."""
    header = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt3(r.get(k, "")) for k in header])
    return path
