import numpy as np
import pytest

import frachs

# reference configuration used throughout: n=3, s=0.75, q=3, half-length 30
N_DEFAULT = 2048
L_DEFAULT = 30.0


@pytest.fixture(scope="session")
def params():
    return frachs.ProblemParams(n=3, s=0.75, q=3.0)


@pytest.fixture(scope="session")
def grid():
    return frachs.make_grid(L_DEFAULT, N_DEFAULT)


@pytest.fixture(scope="session")
def ground(params, grid):
    return frachs.solve_ground(params, grid, tol=1e-10)


@pytest.fixture(scope="session")
def grid_small():
    return frachs.make_grid(L_DEFAULT, 1024)


@pytest.fixture(scope="session")
def ground_small(params, grid_small):
    return frachs.solve_ground(params, grid_small, tol=1e-10)


@pytest.fixture(scope="session")
def radial_spectrum(ground):
    return frachs.sector_spectrum(ground, 0, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
