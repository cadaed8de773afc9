import warnings

import numpy as np
import pytest

from conftest import make_track, straight
from trackmap import InvalidInputError, directed_hausdorff, graph_stats, validate_graph
from trackmap.construct import (
    ConstructParams,
    clarify_tracks,
    construct,
    construct_incremental_frechet,
    construct_incremental_local,
    construct_kde,
    construct_kmeans,
    construct_tracebundle,
    detect_intersections,
    detect_turns,
)
from trackmap.construct.kmeans import cluster_seeds
from trackmap.evaluate import eval_directed_hausdorff
from trackmap.synthetic import gen_synthetic


def vertical(x=500.0, n=21, length=1000.0):
    return np.column_stack([np.full(n, x), np.linspace(-length / 2, length / 2, n)])


@pytest.fixture(scope="module")
def small_clean():
    return gen_synthetic(n_tracks=60, noise=0.0, seed=21)


class TestParams:
    def test_defaults(self):
        p = ConstructParams(algorithm="tracebundle")
        assert (p.turn_angle, p.speed_max, p.proximity) == (15.0, 40.0, 25.0)
        assert ConstructParams(algorithm="local").proximity == 20.0
        assert ConstructParams(algorithm="kmeans").proximity == 50.0
        assert ConstructParams().epsilon == 80.0

    def test_manifest_round_trip(self):
        p = ConstructParams(algorithm="kde", cell=12.5, multi_threshold=True)
        assert ConstructParams.from_manifest(p.to_manifest({"note": "x"})) == p

    @pytest.mark.parametrize("bad", [{"cell": 0}, {"bearing": 180}, {"algorithm": "nope"}, {"iterations": 0}])
    def test_rejects(self, bad):
        with pytest.raises(InvalidInputError):
            ConstructParams(**bad)


class TestIncremental:
    def test_single_track_is_one_chain(self):
        g = construct_incremental_frechet([make_track(0, straight())], 80)
        assert graph_stats(g).as_tuple() == (2, 1, pytest.approx(1.0))

    def test_duplicate_track_adds_nothing(self):
        one = construct_incremental_frechet([make_track(0, straight())], 80)
        two = construct_incremental_frechet([make_track(0, straight()), make_track(1, straight())], 80)
        assert graph_stats(one) == graph_stats(two)

    def test_parallel_tracks_two_eps_apart(self):
        g = construct_incremental_frechet([make_track(0, straight(0)), make_track(1, straight(160))], 80)
        assert len(g.edges) == 2
        assert len(set(g.components().values())) == 2

    def test_branch_splits_edge(self):
        # the second track follows the first for 500 m, then turns north
        a = straight()
        b = np.vstack([straight(n=11, length=500), [(500, 100), (500, 500)]])
        g = construct_incremental_frechet([make_track(0, a), make_track(1, b)], 20)
        assert validate_graph(g) == []
        assert sorted(g.degree(v) for v in g.vertices) == [1, 1, 1, 3]

    def test_idempotent_on_own_edges(self, small_clean):
        G, tracks = small_clean
        g = construct_incremental_frechet(tracks[:15], 40)
        again = construct_incremental_frechet(tracks[:15] + [make_track("x", e.geometry.points) for e in g.iter_edges()], 40)
        assert len(again.edges) == len(g.edges)

    def test_noise_free_fidelity(self, small_clean):
        G, tracks = small_clean
        C = construct_incremental_frechet(tracks, 80)
        assert validate_graph(C) == []
        assert eval_directed_hausdorff(C, G).distance <= 1.0


class TestClarify:
    def test_single_track_unchanged(self):
        tr = make_track(0, straight())
        assert clarify_tracks([tr])[0] == tr

    def test_separation_decreases(self):
        a, b = make_track(0, straight(0)), make_track(1, straight(10))
        seps = [np.mean(np.abs(np.subtract(*(t.xy[:, 1] for t in clarify_tracks([a, b], radius=20, iterations=k))))) for k in range(1, 6)]
        assert seps[0] < 10 and all(x > y for x, y in zip(seps, seps[1:]))

    def test_locality(self):
        a, v = make_track(0, straight()), make_track(1, vertical())
        out = clarify_tracks([a, v], radius=30)
        far = np.hypot(a.xy[:, 0] - 500, a.xy[:, 1]) > 60
        assert np.array_equal(out[0].xy[far], a.xy[far])

    def test_counts_preserved(self, city):
        _, tracks, _ = city
        out = clarify_tracks(tracks[:30])
        assert [len(t) for t in out] == [len(t) for t in tracks[:30]]


class TestLocal:
    def test_single_track_chain(self):
        g = construct_incremental_local([make_track(0, straight())])
        assert graph_stats(g).as_tuple()[:2] == (21, 20)

    def test_identical_track_merges(self):
        g = construct_incremental_local([make_track(0, straight()), make_track(1, straight())])
        assert graph_stats(g).as_tuple()[:2] == (21, 20)

    def test_perpendicular_crossing(self):
        g = construct_incremental_local([make_track(0, straight(n=11)), make_track(1, vertical(n=11))])
        assert validate_graph(g) == []
        hubs = [v for v in g.vertices if g.degree(v) == 4]
        assert len(hubs) == 1
        assert np.allclose(g.vertex(hubs[0]), (500, 0))

    def test_noise_free_fidelity(self, small_clean):
        G, tracks = small_clean
        C = construct_incremental_local(tracks)
        assert eval_directed_hausdorff(C, G).distance <= 1.0


class TestKDE:
    def test_straight_line(self):
        tracks = [make_track(k, straight(n=101)) for k in range(50)]
        g = construct_kde(tracks, threshold=10)
        assert sorted(g.degree(v) for v in g.vertices) == [1, 1]
        assert directed_hausdorff(g.polylines(), [straight()], 1.0) <= 16 * np.sqrt(2)

    def test_threshold_above_support(self):
        tracks = [make_track(k, straight(n=101)) for k in range(50)]
        with pytest.warns(UserWarning):
            g = construct_kde(tracks, threshold=51)
        assert g.is_empty()

    def test_cross(self):
        tracks = [make_track(k, straight(n=101)) for k in range(50)]
        tracks += [make_track(50 + k, vertical(n=101)) for k in range(50)]
        g = construct_kde(tracks, threshold=10)
        assert [g.degree(v) for v in g.vertices if g.degree(v) > 2] == [4]

    def test_multi_threshold_superset(self, city):
        G, tracks, _ = city
        one = construct_kde(tracks, threshold=20)
        many = construct_kde(tracks, threshold=20, multi_threshold=True)
        assert many.total_length() >= one.total_length() - 50

    def test_noise_free_fidelity(self, small_clean):
        G, tracks = small_clean
        assert eval_directed_hausdorff(construct_kde(tracks), G).distance <= 16 * np.sqrt(2)


class TestKMeans:
    def test_straight_track(self):
        centers, _ = cluster_seeds([straight(n=11, length=500)], 50)
        assert abs(len(centers) - 10) <= 1
        g = construct_kmeans([make_track(0, straight(n=11, length=500))], 50)
        assert abs(len(g.vertices) - 10) <= 1
        assert sorted(g.degree(v) for v in g.vertices)[:2] == [1, 1]
        assert validate_graph(g) == []

    def test_opposite_directions_stay_apart(self):
        fwd = make_track(0, straight(n=11, length=500))
        back = make_track(1, straight(n=11, length=500)[::-1])
        g = construct_kmeans([fwd, back], 50, bearing=45)
        assert len(set(g.components().values())) == 2

    def test_no_isolated_vertices(self, city):
        _, tracks, _ = city
        g = construct_kmeans(tracks[:40])
        assert validate_graph(g) == []
        assert all(g.degree(v) > 0 for v in g.vertices)

    def test_noise_free_fidelity(self, small_clean):
        G, tracks = small_clean
        assert eval_directed_hausdorff(construct_kmeans(tracks), G).distance <= 26.0


class TestTraceBundle:
    def test_straight_track_has_no_turns(self):
        tr = make_track(0, straight())
        assert detect_turns([tr]) == []
        assert detect_intersections([tr]) == []

    @pytest.mark.parametrize("speed, turns", [(20, 1), (60, 0)])
    def test_speed_gate(self, speed, turns):
        pts = np.vstack([np.column_stack([np.arange(0, 500, 5.0), np.zeros(100)]), np.column_stack([np.full(100, 500.0), np.arange(0, 500, 5.0)])])
        assert len(detect_turns([make_track(0, pts, speed)])) == turns

    def test_turn_kind(self):
        pts = np.vstack([np.column_stack([np.arange(0, 500, 5.0), np.zeros(100)]), np.column_stack([np.full(100, 500.0), np.arange(0, 500, 5.0)])])
        (t,) = detect_turns([make_track(0, pts, 20)])
        # heading east, turning north is a left turn
        assert t.kind == (2, "L")
        assert np.hypot(t.x - 500, t.y) < 10

    def test_no_intersections_warns(self):
        with pytest.warns(UserWarning, match="no intersections"):
            construct_tracebundle([make_track(k, straight()) for k in range(3)])

    def test_noise_free_fidelity(self, small_clean):
        G, tracks = small_clean
        assert eval_directed_hausdorff(construct_tracebundle(tracks), G).distance <= 25.0


@pytest.mark.parametrize("algo", ["incremental", "local", "kde", "kmeans", "tracebundle"])
def test_noisy_output_valid_and_deterministic(algo, city):
    _, tracks, _ = city
    p = ConstructParams(algorithm=algo)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = construct(tracks[:80], p)
        b = construct(tracks[:80], p)
    assert validate_graph(a) == []
    assert dict(a.vertices) == dict(b.vertices)
    assert [e.geometry for e in a.iter_edges()] == [e.geometry for e in b.iter_edges()]
