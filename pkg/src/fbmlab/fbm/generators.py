"""
Fractional Brownian path generators.

``mvn_path`` discretizes the moving-average representation on a shared
Brownian driver (coupled across H); ``cholesky_path`` and ``circulant_path``
sample the exact finite-dimensional law and serve as oracles.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from scipy import signal
from scipy.linalg import lapack

from fbmlab.errors import ConfigError, NumericalError
from fbmlab.fbm import kernels
from fbmlab.fbm.driver import DriverPath
from fbmlab.fbm.grid import HurstParam, TimeGrid, as_hurst
from fbmlab.util.streams import standard_normals

__all__ = [
    "FbmPath",
    "mvn_path",
    "cholesky_path",
    "circulant_path",
    "MVN",
    "CHOLESKY",
    "CIRCULANT",
    "MAX_ORACLE_STEPS",
]

logger = logging.getLogger(__name__)

MVN = "coupled-mvn"
CHOLESKY = "exact-cholesky"
CIRCULANT = "exact-circulant"

MAX_ORACLE_STEPS = 4096


@dataclass(frozen=True)
class FbmPath:
    """Sampled B_H(t_i), i = 0..N; leading axes index replicates."""

    grid: TimeGrid
    H: HurstParam
    values: np.ndarray
    provenance: str
    seed: int | None = None
    history_length: float | None = None

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.values.shape[:-1]

    def replicate(self, index: int) -> "FbmPath":
        if not self.batch_shape:
            raise IndexError("path holds a single replicate")
        return replace(self, values=self.values[index])

    def dict(self) -> dict:
        return {
            "grid": self.grid.dict(),
            "H": self.H.H,
            "provenance": self.provenance,
            "seed": self.seed,
            "history_length": self.history_length,
        }


# ----------------------------------------------------------------------
# Coupled Mandelbrot–Van Ness construction
# ----------------------------------------------------------------------
def _fine_sums(increments: np.ndarray, weights: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """sum_m weights[p - m] * increments[m] at p = offsets (zero where p < 0)."""
    flat = increments.reshape(-1, increments.shape[-1])
    conv = signal.fftconvolve(flat, weights[np.newaxis, :], axes=-1)
    out = np.zeros((flat.shape[0], offsets.size))
    valid = offsets >= 0
    out[:, valid] = conv[:, offsets[valid]]
    return out.reshape(increments.shape[:-1] + (offsets.size,))


def mvn_path(driver: DriverPath, H: HurstParam | float) -> FbmPath:
    """
    B_H(t_k) = c_H [ sum over cells before t_k of the cell-averaged kernel
    (t_k - q)^(H-1/2) - (-q)^(H-1/2) times the cell increment ].

    Fine cells form a Toeplitz sum evaluated by FFT convolution; far cells use
    a dense weight matrix.  At H = 1/2 the path is the driver's running sum.
    """
    hp = as_hurst(H)
    grid = driver.grid
    if hp.is_brownian:
        values = driver.running_sum()
    else:
        c = kernels.ch_coefficient(hp)
        n_near = driver.n_near
        n_cells = driver.increments.shape[-1]
        weights = kernels.lag_weights(n_cells, hp.alpha)
        offsets = np.arange(grid.N + 1) + n_near - 1
        sums = _fine_sums(driver.increments, weights, offsets)
        scale = c * grid.step**hp.beta / hp.alpha
        values = scale * (sums - sums[..., :1])
        if driver.n_far:
            edges = driver.far_edges
            far_w = kernels.cell_average_weights(
                edges[np.newaxis, :-1], edges[np.newaxis, 1:], grid.nodes[:, np.newaxis], hp
            )
            values = values + c * (driver.far_increments @ far_w.T)
        values[..., 0] = 0.0
    return FbmPath(
        grid=grid,
        H=hp,
        values=values,
        provenance=MVN,
        seed=driver.seed,
        history_length=driver.history_length,
    )


# ----------------------------------------------------------------------
# Exact-law oracles
# ----------------------------------------------------------------------
@functools.lru_cache(maxsize=16)
def _cholesky_factor(H: float, T: float, N: int) -> np.ndarray:
    times = TimeGrid(T, N).nodes[1:]
    cov = kernels.fbm_covariance(H, times[:, np.newaxis], times[np.newaxis, :])
    factor, info = lapack.dpotrf(cov, lower=1, clean=1)
    if info > 0:
        raise NumericalError(
            f"Cholesky factorization failed: leading minor of order {info} is not "
            f"positive definite (H={H}, N={N})",
            minor=int(info),
        )
    if info < 0:
        raise NumericalError(f"dpotrf rejected argument {-info}")
    factor.setflags(write=False)
    return factor


def _check_oracle_grid(grid: TimeGrid) -> None:
    if grid.N > MAX_ORACLE_STEPS:
        raise ConfigError(
            f"exact-law oracle is capped at N={MAX_ORACLE_STEPS} steps, got N={grid.N}"
        )


def cholesky_path(
    H: HurstParam | float,
    grid: TimeGrid,
    seed: int,
    stream_id: int | Iterable[int] = 0,
) -> FbmPath:
    """Exact fBm on the grid nodes: values[1:] = L z with L L^T the node covariance."""
    hp = as_hurst(H)
    _check_oracle_grid(grid)
    factor = _cholesky_factor(hp.H, grid.T, grid.N)
    single = np.isscalar(stream_id)
    ids = [int(stream_id)] if single else [int(s) for s in stream_id]
    z = standard_normals(seed, ids, grid.N)
    values = np.zeros((len(ids), grid.N + 1))
    # one matrix-vector product per stream keeps a path independent of its batch
    for row, z_row in enumerate(z):
        values[row, 1:] = factor @ z_row
    return FbmPath(
        grid=grid,
        H=hp,
        values=values[0] if single else values,
        provenance=CHOLESKY,
        seed=int(seed),
    )


@functools.lru_cache(maxsize=16)
def _circulant_sqrt_eigenvalues(H: float, T: float, N: int) -> np.ndarray:
    # autocovariance of increments, embedded in a 2N circulant
    dt = T / N
    two_h = 2.0 * H
    j = np.arange(N + 1, dtype=float)
    gamma = 0.5 * dt**two_h * (np.abs(j - 1) ** two_h - 2.0 * j**two_h + (j + 1) ** two_h)
    row = np.concatenate([gamma, gamma[1:N][::-1]])
    eigenvalues = np.fft.rfft(row).real
    if np.any(eigenvalues < -1e-10 * eigenvalues.max()):
        raise NumericalError(
            f"circulant embedding has a negative eigenvalue ({eigenvalues.min():.3e}) "
            f"for H={H}, N={N}"
        )
    root = np.sqrt(np.maximum(eigenvalues, 0.0))
    root.setflags(write=False)
    return root


def circulant_path(
    H: HurstParam | float,
    grid: TimeGrid,
    seed: int,
    stream_id: int | Iterable[int] = 0,
) -> FbmPath:
    """Exact fBm by circulant embedding of the increment covariance (Davies–Harte)."""
    hp = as_hurst(H)
    N = grid.N
    n = 2 * N
    root = _circulant_sqrt_eigenvalues(hp.H, grid.T, N)
    single = np.isscalar(stream_id)
    ids = [int(stream_id)] if single else [int(s) for s in stream_id]
    draws = standard_normals(seed, ids, n)

    spectrum = np.empty((len(ids), N + 1), dtype=np.complex128)
    spectrum[:, 0] = draws[:, 0]
    spectrum[:, N] = draws[:, 1]
    spectrum[:, 1:N] = (draws[:, 2 : N + 1] + 1j * draws[:, N + 1 :]) / math.sqrt(2.0)
    spectrum *= (root * math.sqrt(n))[np.newaxis, :]
    increments = np.fft.irfft(spectrum, n=n, axis=1)[:, :N]

    values = np.zeros((len(ids), N + 1))
    values[:, 1:] = np.cumsum(increments, axis=1)
    return FbmPath(
        grid=grid,
        H=hp,
        values=values[0] if single else values,
        provenance=CIRCULANT,
        seed=int(seed),
    )
