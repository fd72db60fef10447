"""Shared fixtures and field builders."""

import numpy as np
import pytest

from chflow.profiles import band_limited_noise
from chflow.spectral import Grid


@pytest.fixture
def grid_pi():
    return Grid(np.pi, 64)


@pytest.fixture
def grid20():
    return Grid(20.0, 256)


def random_fields(grid, count, kmax_frac=0.25, amp=1.0, start_seed=0):
    return [
        band_limited_noise(grid, seed=start_seed + i, kmax_frac=kmax_frac, amp=amp)
        for i in range(count)
    ]
