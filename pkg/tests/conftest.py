import numpy as np
import pytest

from nlkg import Params, RadialGrid, State
from nlkg.groundstate import polish, solve_sp, standing_wave

P2 = Params(1.0, 2.0, 0.5, 2)
P3 = Params(1.0, 2.0, 0.4, 3)

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def gaussian_mix(grid, rng, terms=3, width=(0.4, 2.0), complex_amp=True):
    """Random superposition of centred Gaussians (smooth, decays well inside R)."""
    out = np.zeros(grid.npts, dtype=complex)
    for _ in range(terms):
        a = rng.uniform(-1.0, 1.0)
        if complex_amp:
            a = a + 1j * rng.uniform(-1.0, 1.0)
        s = rng.uniform(*width)
        out += a * np.exp(-((grid.r / s) ** 2))
    return out


def random_state(grid, seed):
    rng = np.random.default_rng(seed)
    return State.from_arrays(grid, *(gaussian_mix(grid, rng) for _ in range(4)))


@pytest.fixture(scope="session")
def grid2():
    return RadialGrid(2, 20.0, 4096)


@pytest.fixture(scope="session")
def grid3():
    return RadialGrid(3, 20.0, 4096)


@pytest.fixture(scope="session")
def gs2(grid2):
    return solve_sp(P2, grid2)


@pytest.fixture(scope="session")
def gs3(grid3):
    return solve_sp(P3, grid3)


@pytest.fixture(scope="session")
def dyn_grid2():
    return RadialGrid(2, 60.0, 2048)


@pytest.fixture(scope="session")
def gs2_dyn(gs2, dyn_grid2):
    return polish(gs2, dyn_grid2)


@pytest.fixture(scope="session")
def sw2_dyn(gs2_dyn):
    return standing_wave(gs2_dyn)
