import numpy as np
import pytest

from trackmap import InvalidInputError, directed_hausdorff, graph_stats
from trackmap.synthetic import boundary_vertices, gen_synthetic, grid_graph, random_route, turn_vertices


def test_grid_stats():
    assert graph_stats(grid_graph(3, 3, 500)).as_tuple() == (9, 12, pytest.approx(6.0))


def test_grid_bad_dimensions():
    with pytest.raises(InvalidInputError):
        grid_graph(1, 3, 500)
    with pytest.raises(InvalidInputError):
        grid_graph(3, 3, 0)


def test_noise_free_tracks_lie_on_grid(clean_city):
    G, tracks = clean_city
    assert directed_hausdorff([t.xy for t in tracks], G.polylines(), 1.0) == pytest.approx(0.0, abs=1e-9)


def test_deterministic():
    a = gen_synthetic(n_tracks=20, seed=5)
    b = gen_synthetic(n_tracks=20, seed=5)
    assert all(x == y for x, y in zip(a[1], b[1]))


def test_sampling_interval_and_speed():
    _, tracks = gen_synthetic(n_tracks=5, noise=0, dt=2.0, speed=36.0, seed=1)
    for tr in tracks:
        step = np.hypot(*np.diff(tr.xy, axis=0).T)
        # 10 m/s for 2 s, except the extra corner samples
        assert step.max() <= 20.0 + 1e-9
        assert np.allclose(step / np.diff(tr.t), 10.0)


def test_routes_are_shortest_between_boundary_vertices():
    rng = np.random.default_rng(0)
    ends = set(boundary_vertices(4, 5))
    for _ in range(50):
        r = random_route(4, 5, rng)
        assert r[0] in ends and r[-1] in ends and r[0] != r[-1]
        (r0, c0), (r1, c1) = divmod(r[0], 5), divmod(r[-1], 5)
        assert len(r) - 1 == abs(r1 - r0) + abs(c1 - c0)


def test_turn_vertices():
    # 0 -> 1 -> 2 -> 5 on a 3x3 grid turns at 2
    assert turn_vertices([0, 1, 2, 5]) == [2]
    assert turn_vertices([0, 1, 2]) == []
