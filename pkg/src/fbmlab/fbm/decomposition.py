"""
Split of a coupled fBm increment at a grid node s:

    B_H(t) - B_H(s) = W_H(t) + R_H(t),   t > s,

W_H driven by the increments of (s, t] only, R_H by those of [-L, s] only,
with 𝒟R_H the mean-square t-derivative of R_H.  The discretization uses the
same cell-averaged weights as ``mvn_path`` so W + R reproduces the coupled
path's increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import integrate

from fbmlab.errors import ConfigError
from fbmlab.fbm import kernels
from fbmlab.fbm.driver import DEFAULT_FAR_RATIO, DriverPath, sample_driver
from fbmlab.fbm.generators import _fine_sums
from fbmlab.fbm.grid import HurstParam, TimeGrid, as_hurst

__all__ = [
    "Decomposition",
    "decompose",
    "dr_process",
    "dr_variance_oracle",
    "dr_variance_printed",
    "TruncationCheck",
    "truncation_check",
]


@dataclass(frozen=True)
class Decomposition:
    """W, R, DR at nodes s+1..N (last axis); leading axes index replicates."""

    grid: TimeGrid
    H: HurstParam
    s: int
    W: np.ndarray
    R: np.ndarray
    DR: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.s + 1, self.grid.N + 1)

    def at(self, t_index: int) -> tuple:
        """(W, R, DR) at node ``t_index`` > s."""
        if not self.s < t_index <= self.grid.N:
            raise ConfigError(f"node {t_index} is outside ({self.s}, {self.grid.N}]")
        j = t_index - self.s - 1
        return self.W[..., j], self.R[..., j], self.DR[..., j]


def _check_split(grid: TimeGrid, s: int) -> None:
    if int(s) != s or not 0 <= s < grid.N:
        raise ConfigError(f"split node must satisfy 0 <= s < N={grid.N}, got {s!r}")


def decompose(driver: DriverPath, H: HurstParam | float, s: int) -> Decomposition:
    hp = as_hurst(H)
    grid = driver.grid
    _check_split(grid, s)
    s = int(s)
    n_after = grid.N - s
    batch = driver.batch_shape

    if hp.is_brownian:
        W = np.cumsum(driver.forward[..., s:], axis=-1)
        zeros = np.zeros(batch + (n_after,))
        return Decomposition(grid, hp, s, W, zeros, zeros.copy())

    c = kernels.ch_coefficient(hp)
    h = grid.step
    n_near = driver.n_near

    # future part: kernel (t - q)^(H-1/2) over the cells of [s, t)
    future = driver.forward[..., s:]
    W = c * h**hp.beta / hp.alpha * _fine_sums(
        future, kernels.lag_weights(n_after, hp.alpha), np.arange(n_after)
    )

    # history part: fine cells before s, then far cells
    past = driver.increments[..., : n_near + s]
    offsets = np.arange(s, grid.N + 1) + n_near - 1
    if past.shape[-1]:
        n_cells = driver.increments.shape[-1]
        sums = _fine_sums(past, kernels.lag_weights(n_cells, hp.alpha), offsets)
        R = c * h**hp.beta / hp.alpha * (sums[..., 1:] - sums[..., :1])
        DR = c * h ** (hp.beta - 1.0) * _fine_sums(
            past, kernels.lag_weights(n_cells, hp.beta), offsets[1:]
        )
    else:
        R = np.zeros(batch + (n_after,))
        DR = np.zeros(batch + (n_after,))

    if driver.n_far:
        shift = s * h
        near = driver.far_edges[np.newaxis, :-1] + shift
        far = driver.far_edges[np.newaxis, 1:] + shift
        lags = (np.arange(1, n_after + 1) * h)[:, np.newaxis]
        R = R + c * (driver.far_increments @ kernels.cell_average_weights(near, far, lags, hp).T)
        DR = DR + c * (
            driver.far_increments @ kernels.cell_average_derivative_weights(near, far, lags, hp).T
        )
    return Decomposition(grid, hp, s, W, R, DR)


def dr_process(driver: DriverPath, H: HurstParam | float, s: int, t: int):
    """𝒟R_H at node t > s; depends only on driver increments before s."""
    _check_split(driver.grid, s)
    if int(t) != t or t <= s or t > driver.grid.N:
        raise ConfigError(f"dr_process needs s < t <= N, got s={s}, t={t}")
    if as_hurst(H).is_brownian:
        out = np.zeros(driver.batch_shape)
        return float(out) if out.ndim == 0 else out
    return decompose(driver, H, s).at(int(t))[2]


def dr_variance_oracle(H: HurstParam | float, lag: float) -> float:
    """E[𝒟R_H(t)^2] at t - s = lag by independent quadrature of the kernel."""
    hp = as_hurst(H)
    if hp.is_brownian:
        return 0.0
    if lag <= 0:
        raise ConfigError(f"lag must be positive, got {lag!r}")
    exponent = 2.0 * hp.H - 3.0
    tail, _ = integrate.quad(lambda u: u**exponent, lag, np.inf)
    return kernels.ch_coefficient(hp) ** 2 * hp.beta**2 * tail


def dr_variance_printed(H: HurstParam | float, lag: float) -> float:
    """The constant c_H^2 (H-1/2)/2 (t-s)^(2H-2) as printed with the decomposition lemma."""
    hp = as_hurst(H)
    return kernels.ch_coefficient(hp) ** 2 * hp.beta / 2.0 * lag ** (2.0 * hp.H - 2.0)


# ----------------------------------------------------------------------
# Truncation control
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class TruncationCheck:
    """
    Change in Var R_H(t) when the history grows from L to 2L on common
    streams, against the tail-variance prediction and ``tail_tol * t^2H``.
    """

    H: float
    t: float
    L: float
    replicates: int
    delta: float  # mean of R_2L(t)^2 - R_L(t)^2
    se: float
    predicted: float  # tail_variance(L) - tail_variance(2L)
    bound: float
    passed: bool


def truncation_check(
    grid: TimeGrid,
    H: HurstParam | float,
    L: float,
    seed: int,
    stream_ids: Iterable[int],
    *,
    tail_tol: float,
    near_history: float | None = None,
    far_ratio: float = DEFAULT_FAR_RATIO,
    pass_se: float = 3.0,
) -> TruncationCheck:
    """
    Draw the history at L and at 2L with the same streams and compare R_H(T).

    Passes when the predicted change is within ``tail_tol * T^2H`` and the
    Monte Carlo change stays inside that bound up to ``pass_se`` standard errors.
    """
    hp = as_hurst(H)
    ids = [int(s) for s in stream_ids]
    if len(ids) < 2:
        raise ConfigError("truncation check needs at least two streams")
    t = grid.T
    bound = tail_tol * t ** (2.0 * hp.H)
    if hp.is_brownian or L <= 0:
        return TruncationCheck(hp.H, t, float(L), len(ids), 0.0, 0.0, 0.0, bound, True)

    def r_at_horizon(length: float) -> np.ndarray:
        driver = sample_driver(
            grid, length, seed, ids, near_history=near_history, far_ratio=far_ratio
        )
        return decompose(driver, hp, 0).at(grid.N)[1]

    diff = r_at_horizon(2.0 * L) ** 2 - r_at_horizon(L) ** 2
    delta = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(diff.size))
    predicted = kernels.tail_variance(hp, t, L) - kernels.tail_variance(hp, t, 2.0 * L)
    passed = predicted <= bound and abs(delta) <= bound + pass_se * se
    return TruncationCheck(hp.H, t, float(L), len(ids), delta, se, predicted, bound, passed)
