"""
The fractional-integral operator

    G_H(τ, s, T, g) = c_H (H-1/2) ∫_τ^T (t-τ)^(H-3/2) g(t) dt,   τ in [s, T],

and the representation of ∫_s^T γ dB_H through it on a shared driver.

g is known at the left endpoints only.  The operator integrates the
singular kernel exactly against the piecewise-linear interpolant of g, with
g(T) extrapolated from the last two nodes, so it is exact for affine g.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import signal

from fbmlab.errors import ConfigError, MeasurabilityError
from fbmlab.fbm import kernels
from fbmlab.fbm.decomposition import decompose
from fbmlab.fbm.driver import DriverPath
from fbmlab.fbm.generators import mvn_path
from fbmlab.fbm.grid import HurstParam, as_hurst
from fbmlab.integration.riemann import IntegrandSample, riemann_integral
from fbmlab.util.numerics import fsum, fsum_last

__all__ = [
    "g_operator",
    "g_operator_values",
    "g_operator_l2_distance",
    "g_operator_norm_ratio",
    "corollary_representation_check",
]

logger = logging.getLogger(__name__)


def _terminal_extension(values: np.ndarray) -> np.ndarray:
    """g at nodes 0..N: left-endpoint samples plus a linear extrapolation to T."""
    if values.shape[-1] >= 2:
        last = 2.0 * values[..., -1] - values[..., -2]
    else:
        last = values[..., -1]
    return np.concatenate([values, last[..., np.newaxis]], axis=-1)


def _product_weights(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-cell moments of (l + u)^(beta-1), u in [0, 1], times beta:
    w0 against 1, w1 against u.
    """
    lags = np.arange(n, dtype=float)
    w0 = kernels.power_increment(lags, 1.0, beta)
    w1 = beta * kernels.power_increment(lags, 1.0, beta + 1.0) / (beta + 1.0) - lags * w0
    return w0, w1


def _correlate_forward(kernel: np.ndarray, values: np.ndarray) -> np.ndarray:
    """out[j] = sum_l kernel[l] * values[j + l] along the last axis."""
    n = values.shape[-1]
    flat = values.reshape(-1, n)[:, ::-1]
    conv = signal.fftconvolve(flat, kernel[np.newaxis, :], axes=-1)[:, :n]
    return conv[:, ::-1].reshape(values.shape)


def g_operator_values(H: HurstParam | float, g: IntegrandSample) -> np.ndarray:
    """G_H(t_j, ., T, g) at every left endpoint j = 0..N-1 of g's grid."""
    hp = as_hurst(H)
    if hp.is_brownian:
        return g.values.copy()
    grid = g.grid
    ext = _terminal_extension(g.values)
    w0, w1 = _product_weights(grid.N, hp.beta)
    scale = kernels.ch_coefficient(hp) * grid.step**hp.beta
    left = _correlate_forward(w0 - w1, ext[..., :-1])
    right = _correlate_forward(w1, ext[..., 1:])
    return scale * (left + right)


def _window_start(g: IntegrandSample, s: float, T: float) -> int:
    grid = g.grid
    if not math.isclose(T, grid.T, rel_tol=1e-12):
        raise ConfigError(f"horizon {T!r} does not match the integrand grid T={grid.T!r}")
    start = grid.node_index(s, what="window start s")
    if start >= grid.N:
        raise ConfigError(f"window start s={s!r} must lie before T={T!r}")
    return start


def g_operator(H: HurstParam | float, s: float, T: float, g: IntegrandSample, tau: int):
    """G_H(τ, s, T, g) at the grid node ``tau``; 0 on the empty window τ = T."""
    start = _window_start(g, s, T)
    if int(tau) != tau or not start <= tau <= g.grid.N:
        raise ConfigError(f"tau must be a node in [{start}, {g.grid.N}], got {tau!r}")
    if tau == g.grid.N:
        out = np.zeros(g.values.shape[:-1])
        return float(out) if out.ndim == 0 else out
    value = g_operator_values(H, g)[..., int(tau)]
    return float(value) if np.ndim(value) == 0 else value


def _l2_norm(values: np.ndarray, step: float):
    total = fsum_last(values * values)
    return np.sqrt(np.asarray(total) * step)[()]


def g_operator_l2_distance(H: HurstParam | float, s: float, T: float, g: IntegrandSample):
    """‖g - G_H g‖ in L2(s, T), left rectangle rule on the grid."""
    start = _window_start(g, s, T)
    diff = g.values[..., start:] - g_operator_values(H, g)[..., start:]
    return _l2_norm(diff, g.grid.step)


def g_operator_norm_ratio(H: HurstParam | float, s: float, T: float, g: IntegrandSample) -> float:
    """‖G_H g‖ / ‖g‖ in L2(s, T) for a single integrand."""
    start = _window_start(g, s, T)
    if g.values.ndim != 1:
        raise ConfigError("norm ratio is defined for a single integrand")
    norm_g = math.sqrt(fsum(g.values[start:] ** 2) * g.grid.step)
    if norm_g == 0.0:
        raise ConfigError("norm ratio is undefined for g = 0")
    G = g_operator_values(H, g)[start:]
    return math.sqrt(fsum(G**2) * g.grid.step) / norm_g


def corollary_representation_check(
    driver: DriverPath,
    H: HurstParam | float,
    s: int,
    T: float,
    gamma: IntegrandSample,
):
    """
    Both sides of

        ∫_s^T γ dB_H = ∫_s^T G_H(τ, s, T, γ) dB(τ) + ∫_s^T γ(t) 𝒟R_H(t) dt

    on one driver, for a deterministic γ.  ``s`` is a grid node.  The dt
    integral is exact per cell for the discretized driver, since the cell
    weights of 𝒟R_H are the t-derivatives of those of R_H.

    Returns ``(lhs, rhs)``, one value per replicate.
    """
    if not gamma.deterministic:
        raise MeasurabilityError(
            "representation check needs a deterministic integrand", strategy="gamma"
        )
    grid = driver.grid
    if gamma.grid != grid:
        raise ConfigError(f"grid mismatch: {gamma.grid} vs {grid}")
    if not math.isclose(T, grid.T, rel_tol=1e-12):
        raise ConfigError(f"horizon {T!r} does not match the driver grid T={grid.T!r}")
    hp = as_hurst(H)
    parts = decompose(driver, hp, s)

    lhs = riemann_integral(gamma, mvn_path(driver, hp), start=s).value

    brownian_steps = np.diff(driver.running_sum(), axis=-1)[..., s:]
    G = g_operator_values(hp, gamma)[..., s:]
    R = np.concatenate([np.zeros(parts.R.shape[:-1] + (1,)), parts.R], axis=-1)
    drift = gamma.values[..., s:] * np.diff(R, axis=-1)
    stoch = np.broadcast_to(G, brownian_steps.shape) * brownian_steps
    rhs = fsum_last(np.concatenate([stoch, drift], axis=-1))
    logger.debug("representation check H=%s s=%d N=%d", hp.H, s, grid.N)
    return lhs, rhs
