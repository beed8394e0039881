import math

import numpy as np
import pytest

from dfindex.domains import ball_domain
from dfindex.worm import WormParams, worm_domain


@pytest.fixture(scope="session")
def ball():
    return ball_domain()


@pytest.fixture(scope="session")
def ball_sd():
    return ball_domain(signed=True)


@pytest.fixture(scope="session")
def worm_euclid():
    return worm_domain(WormParams(gamma=math.pi, t=1.2), metric="euclidean")


@pytest.fixture(scope="session")
def worm_kahler():
    return worm_domain(WormParams(gamma=math.pi, t=1.2), metric="worm_kahler")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
