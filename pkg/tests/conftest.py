import cmath
import math

import numpy as np
import pytest

from siegel_lie import AnalyticMap, Spectrum, normalize

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def golden_lambda():
    return cmath.exp(2j * math.pi * GOLDEN)


@pytest.fixture(scope="session")
def golden_map(golden_lambda):
    return AnalyticMap.quadratic_1d(golden_lambda, 15)


@pytest.fixture(scope="session")
def golden_result(golden_map):
    return normalize(golden_map)


@pytest.fixture(scope="session")
def half_map():
    return AnalyticMap.quadratic_1d(0.5, 15)


def rotation_pair(rng):
    """Two rotation numbers drawn away from low-order resonances."""
    while True:
        w = rng.uniform(0.05, 0.95, size=2)
        if min(abs(w[0] - w[1]), abs(w[0] + w[1] - 1)) > 0.05:
            return Spectrum.rotation(*w)
