import numpy as np
import pytest

from trajedi.grid import CalibrationParams, build_grid
from trajedi.model import Trajectory


def traj(tid, points):
    return Trajectory(tid, [tuple(map(float, p)) for p in points])


@pytest.fixture
def unit_grid():
    # 10x10 unit cells, anchors at half-integers
    return build_grid((0, 0, 10, 10), 10)


@pytest.fixture
def unit_params(unit_grid):
    return CalibrationParams.defaults(unit_grid)


def random_coords(rng, n, scale=10.0):
    return rng.uniform(0, scale, size=(n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.VERDICTS):
            terminalreporter.write_line(test_acceptance.VERDICTS[number])
