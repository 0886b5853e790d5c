import numpy as np
import pytest

from carnot.algebra import engel_algebra, free_step_two_algebra, heisenberg_algebra


@pytest.fixture(scope="session")
def h1():
    return heisenberg_algebra(1)


@pytest.fixture(scope="session")
def h2():
    return heisenberg_algebra(2)


@pytest.fixture(scope="session")
def engel():
    return engel_algebra()


@pytest.fixture(scope="session")
def free32():
    return free_step_two_algebra(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
