import numpy as np
import pytest

from fbmlab.fbm.driver import sample_driver
from fbmlab.fbm.grid import TimeGrid
from fbmlab.fbm.kernels import history_length


def make_driver(grid: TimeGrid, hursts, seed: int, count: int, tail_tol: float = 1e-4):
    """A batched driver with fine history on [-T, 0] and far cells beyond, as the experiments draw it."""
    L = max(history_length(h, grid.T, tail_tol) for h in hursts)
    L = max(L, grid.T) if L > 0 else 0.0
    return sample_driver(grid, L, seed, np.arange(count), near_history=grid.T)


def standard_error(samples) -> float:
    samples = np.asarray(samples, dtype=float)
    return float(samples.std(ddof=1) / np.sqrt(samples.size))


@pytest.fixture
def grid64():
    return TimeGrid(1.0, 64)


@pytest.fixture
def small_driver(grid64):
    return make_driver(grid64, [0.75, 0.9], seed=11, count=16)
