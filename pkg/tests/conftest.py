import numpy as np
import pytest

from dirac_rmatrix.catalog import e_selfdual, oscillator, sl


@pytest.fixture(scope="session")
def sl2():
    return sl(2)


@pytest.fixture(scope="session")
def sl3():
    return sl(3)


@pytest.fixture(scope="session")
def e4():
    return e_selfdual(4)


@pytest.fixture(scope="session")
def osc():
    return oscillator(1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def rand_c(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
