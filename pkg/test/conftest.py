import numpy as np
import pytest

from dominter.pointfield import UniformDensity
from dominter.propagation import LinkParams

# Reference link: nu = 4, P_t = 1, P_0 = 1e-12, so R_max = 1e3 in two dimensions.
# N_max = 100 gives D_0 = 40 dB and N_max = 50 gives D_0 = 33.98 dB.


@pytest.fixture
def link4():
    return LinkParams(nu=4, p_t=1.0, p_0=1e-12)


@pytest.fixture
def dense(link4):
    return UniformDensity(100.0 / (np.pi * 1e6))


@pytest.fixture
def sparse(link4):
    return UniformDensity(50.0 / (np.pi * 1e6))


@pytest.fixture
def rng():
    return np.random.default_rng(20080901)


@pytest.fixture
def standard_error():
    # binomial standard error, floored at one count so that p = 0 still gets a width
    def se(p, n):
        return np.sqrt(np.maximum(p * (1 - p), 1.0 / n) / n)

    return se
