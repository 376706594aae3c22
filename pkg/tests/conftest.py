import numpy as np
import pytest

from ftlab.system import get_system


@pytest.fixture(scope="session")
def psys():
    return get_system("p-system-gamma2")


@pytest.fixture(scope="session")
def asys():
    return get_system("appendix-a-quadratic")


@pytest.fixture(scope="session")
def lin():
    return get_system("linear-advection2")


@pytest.fixture(scope="session")
def burgers():
    return get_system("decoupled-burgers")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
