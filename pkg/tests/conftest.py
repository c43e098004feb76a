import numpy as np
import pytest

from wptsim.harvester import RectennaParams
from wptsim.signals import FrequencyGrid


def brute_force_moments(amplitudes, grid, samples_per_period=None):
    """Mean of y^2 and y^4 over one period, y(t) evaluated tone by tone with cosines."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    k_max = grid.carrier_index + grid.n_tones - 1
    n = samples_per_period or 8 * k_max + 8
    t = np.arange(n) / (n * grid.delta_f)
    y = np.zeros(n)
    for a, f in zip(amplitudes, grid.frequencies):
        y += np.sqrt(2) * np.abs(a) * np.cos(2 * np.pi * f * t + np.angle(a))
    return np.mean(y**2), np.mean(y**4)


@pytest.fixture
def params():
    return RectennaParams()


@pytest.fixture
def small_grid():
    return FrequencyGrid(40.0, 1.0, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
