import numpy as np
import pytest

from pfcbench.spectral import Grid2D, SpectralOps


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def ops32():
    return SpectralOps(Grid2D(L=2 * np.pi, N=32))


@pytest.fixture
def ops16():
    return SpectralOps(Grid2D(L=1.7, N=16))


def random_field(ops, rng, amp=1.0):
    return ops.field(amp * rng.standard_normal((ops.grid.N, ops.grid.N)))


def random_mean_zero(ops, rng, amp=1.0):
    return ops.mean_zero(random_field(ops, rng, amp))
