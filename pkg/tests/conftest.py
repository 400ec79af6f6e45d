import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def complex_grid(rng):
    return rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))


@pytest.fixture
def coil_stack(rng):
    return rng.standard_normal((4, 48, 48)) + 1j * rng.standard_normal((4, 48, 48))
