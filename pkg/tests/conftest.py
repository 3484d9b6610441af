import numpy as np
import pytest

from kdvblab import PeriodicGrid, constant_field, continue_branch, kdvbf
from kdvblab.waves import WaveProfile

EPS_SET = [0.005, 0.01, 0.02, 0.04]


@pytest.fixture(scope="session")
def model():
    return kdvbf(1.0, 1.0)


@pytest.fixture(scope="session")
def branch():
    result = continue_branch(1.0, 1.0, EPS_SET)
    assert not result.truncated, result.failure
    return result


@pytest.fixture(scope="session")
def wave_eps02(branch):
    return branch.profiles[2]


@pytest.fixture(scope="session")
def zero_wave():
    """The trivial profile phi = 0 at the critical speed, on a fine grid."""
    grid = PeriodicGrid(256, 2 * np.pi)
    return WaveProfile(phi=constant_field(grid, 0.0), c=-1.0, L=grid.L,
                       eps=0.0, residual=0.0)


def rng(seed=0):
    return np.random.default_rng(seed)


def match_sorted(values):
    """Order a complex multiset robustly to near-ties in the real part.

    Conjugate pairs share their real part only up to eigensolver noise, so a
    strict lexicographic sort can misalign two copies of the same multiset.
    """
    v = np.asarray(values)
    order = np.lexsort((v.imag, np.round(v.real, 6)))
    return v[order]
