import csv
import json

import pytest

from trackmap import graph_stats
from trackmap.bench import BenchmarkConfig, run_benchmark, sha256_file, task_seed
from trackmap.errors import InvalidInputError
from trackmap.graphio import read_graph_dir

MEASURES = [
    {"measure": "hausdorff"},
    {"measure": "pathbased", "k": 2},
    {"measure": "shortestpath", "n": 40},
    {"measure": "graphsampling", "matched_dist": 10, "runs": 40},
]


def config(tmp_path, algorithms, measures=MEASURES, **kw):
    data = {
        "seed": 5,
        "output": "out",
        "datasets": [{"name": "grid", "synthetic": {"n_tracks": 80, "noise": 3}}],
        "algorithms": algorithms,
        "measures": measures,
        **kw,
    }
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(data))
    return BenchmarkConfig.from_json(path)


def read_summary(out):
    with open(out / "summary.csv", newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("bench")
    cfg = config(tmp, [{"algorithm": "tracebundle"}, {"algorithm": "kde"}, {"algorithm": "groundtruth"}])
    return run_benchmark(cfg)


def test_layout(bundle):
    out = bundle.output
    for algo in ("tracebundle", "kde", "groundtruth"):
        d = out / "grid" / algo
        for name in ("vertices.txt", "edges.txt", "manifest.txt"):
            assert (d / name).is_file()
        for m in ("hausdorff", "pathbased", "shortestpath", "graphsampling"):
            assert (d / f"{m}.csv").is_file() and (d / f"{m}.summary.json").is_file()
    assert len(read_summary(out)) == 12
    assert bundle.ok and not bundle.failures


def test_identity_row(bundle):
    rows = {r["measure"]: r for r in read_summary(bundle.output) if r["algorithm"] == "groundtruth"}
    assert rows["hausdorff"]["distance_m"] == "0.000"
    assert rows["pathbased"]["max"] == "0.000"
    assert rows["shortestpath"]["found_fraction"] == "1.000"
    assert rows["shortestpath"]["frechet_m_max"] == "0.000"
    assert rows["graphsampling"]["f_score"] == "1.000"


def test_reports_reference_manifest(bundle):
    d = bundle.output / "grid" / "kde"
    digest = sha256_file(d / "manifest.txt")
    with open(d / "hausdorff.csv", newline="") as fh:
        assert all(r["manifest_sha256"] == digest for r in csv.DictReader(fh))
    assert json.loads((d / "graphsampling.summary.json").read_text())["manifest_sha256"] == digest
    manifest = (d / "manifest.txt").read_text()
    assert f"vertices_sha256={sha256_file(d / 'vertices.txt')}" in manifest


def test_summary_matches_written_maps(bundle):
    for r in read_summary(bundle.output):
        s = graph_stats(read_graph_dir(bundle.output / r["dataset"] / r["algorithm"]))
        assert int(r["vertices"]) == s.vertices and int(r["edges"]) == s.edges
        assert float(r["length_km"]) == pytest.approx(s.length_km, abs=5e-4)


def test_deterministic(tmp_path):
    runs = []
    for k in range(2):
        cfg = config(tmp_path, [{"algorithm": "kde"}], output=f"out{k}")
        runs.append(run_benchmark(cfg).output)
    files = sorted(p.relative_to(runs[0]) for p in runs[0].rglob("*.csv"))
    assert files
    for f in files:
        assert (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes()


def test_failing_cell_is_isolated(tmp_path):
    # this threshold leaves KDE with an empty map, which no measure can score
    cfg = config(tmp_path, [{"algorithm": "kde", "threshold": 1000}, {"algorithm": "groundtruth"}], measures=MEASURES[:1])
    res = run_benchmark(cfg)
    status = {r["algorithm"]: r["status"] for r in read_summary(res.output)}
    assert status["groundtruth"] == "ok"
    assert status["kde"] != "ok"
    assert res.ok


def test_all_cells_failed(tmp_path):
    cfg = config(tmp_path, [{"algorithm": "kde", "threshold": 1000}], measures=MEASURES[:1])
    assert not run_benchmark(cfg).ok


def test_unreadable_dataset(tmp_path):
    data = {
        "datasets": [{"name": "gone", "tracks": "missing", "ground_truth": "missing"}],
        "algorithms": [{"algorithm": "kde"}],
        "measures": [{"measure": "hausdorff"}],
        "output": "out",
    }
    (tmp_path / "b.json").write_text(json.dumps(data))
    res = run_benchmark(BenchmarkConfig.from_json(tmp_path / "b.json"))
    assert not res.ok
    assert read_summary(res.output)[0]["status"].startswith("dataset failed")


@pytest.mark.parametrize(
    "bad",
    [
        {"algorithms": []},
        {"measures": [{"measure": "bogus"}]},
        {"measures": [{"measure": "graphsampling"}]},
        {"algorithms": [{"algorithm": "kde"}, {"algorithm": "kde"}]},
    ],
)
def test_config_validation(tmp_path, bad):
    with pytest.raises(InvalidInputError):
        config(tmp_path, **{"algorithms": [{"algorithm": "kde"}], **bad})


def test_task_seed_is_stable():
    assert task_seed(1, "a", "b") == task_seed(1, "a", "b")
    assert task_seed(1, "a", "b") != task_seed(1, "a", "c")
    assert task_seed(1, "a", "b") != task_seed(2, "a", "b")
