"""Shared fixtures: the three default chain models and desk-size grids."""

import numpy as np
import pytest

from chainwaves import ChainModel, PsiFamily, default_half_length, make_grid


@pytest.fixture(scope="session")
def model1():
    """Nearest-neighbor chain, unit coefficients."""
    return ChainModel((1.0,), (1.0,))


@pytest.fixture(scope="session")
def model2():
    """Two-neighbor chain, unit coefficients, quadratic forces only."""
    return ChainModel((1.0, 1.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def model2_cubic():
    """Two-neighbor chain with a cubic higher-order force family."""
    return ChainModel((1.0, 1.0), (1.0, 1.0), PsiFamily.cubic((0.1, 0.1)))


@pytest.fixture(scope="session")
def grid1(model1):
    return make_grid(default_half_length(model1), 1024)


@pytest.fixture(scope="session")
def grid1_fine(model1):
    return make_grid(default_half_length(model1), 2048)


@pytest.fixture(scope="session")
def grid2(model2):
    return make_grid(default_half_length(model2), 1024)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
