import warnings

import numpy as np
import pytest

from trackmap.graph import RoadGraph
from trackmap.synthetic import gen_synthetic, grid_graph
from trackmap.tracks import Track


def make_track(tid, pts, speed_kmh=30.0):
    """Track moving along ``pts`` at constant speed."""
    pts = np.asarray(pts, dtype=float)
    d = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))))
    return Track(str(tid), pts, d / (speed_kmh / 3.6))


def straight(y=0.0, n=21, length=1000.0):
    return np.column_stack([np.linspace(0.0, length, n), np.full(n, y)])


@pytest.fixture
def square():
    # unit square ring, side 100 m
    verts = {0: (0, 0), 1: (100, 0), 2: (100, 100), 3: (0, 100)}
    return RoadGraph(verts, [(0, 0, 1, None), (1, 1, 2, None), (2, 2, 3, None), (3, 3, 0, None)])


@pytest.fixture(scope="session")
def grid():
    return grid_graph(3, 3, 500.0)


@pytest.fixture(scope="session")
def city():
    """3x3 grid, 200 tracks with 5 m noise, plus the routes driven."""
    return gen_synthetic(noise=5.0, seed=11, return_routes=True)


@pytest.fixture(scope="session")
def clean_city():
    return gen_synthetic(noise=0.0, seed=12)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


# verdict lines from the acceptance suite, printed after the test summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip("."))):
        terminalreporter.write_line(line)
