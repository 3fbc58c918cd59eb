"""
Closed-form pieces of the Mandelbrot–Van Ness representation.

All cell weights are exact averages of the moving-average kernels over a
cell, obtained from their antiderivatives.  Differences of large powers are
evaluated as ``x**a * expm1(a * log1p(d / x))`` so far-history cells, whose
distance from the origin can exceed 1e18, keep full relative precision.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate, optimize, special

from fbmlab.errors import ConfigError, NumericalError
from fbmlab.fbm.grid import HurstParam, as_hurst

__all__ = [
    "ch_coefficient",
    "fbm_covariance",
    "power_increment",
    "lag_weights",
    "cell_average_weights",
    "cell_average_derivative_weights",
    "tail_variance",
    "history_length",
]

logger = logging.getLogger(__name__)

# far tail handled by the leading-order asymptote once t/u drops below this
_ASYMPTOTE_RATIO = 1e-8


def ch_coefficient(H: HurstParam | float) -> float:
    """c_H = sqrt(2H Γ(3/2-H) / (Γ(1/2+H) Γ(2-2H)))."""
    H = as_hurst(H).H
    if H == 0.5:
        return 1.0
    log_c2 = (
        math.log(2.0 * H)
        + special.gammaln(1.5 - H)
        - special.gammaln(0.5 + H)
        - special.gammaln(2.0 - 2.0 * H)
    )
    return math.exp(0.5 * log_c2)


def fbm_covariance(H: HurstParam | float, s, t):
    """Cov(B_H(s), B_H(t)) = (s^2H + t^2H - |t-s|^2H) / 2; broadcasts over arrays."""
    H = as_hurst(H).H
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise ConfigError("fbm_covariance is defined for nonnegative times")
    two_h = 2.0 * H
    cov = 0.5 * (s_arr**two_h + t_arr**two_h - np.abs(t_arr - s_arr) ** two_h)
    # B_H(0) = 0 exactly
    cov = np.where((s_arr == 0) | (t_arr == 0), 0.0, cov)
    return float(cov) if cov.ndim == 0 else cov


def power_increment(x, d, a: float):
    """(x + d)**a - x**a for x >= 0, d >= 0, without cancellation."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if a == 0.0:
        return np.zeros(np.broadcast(x, d).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_x = np.where(x > 0, x, 1.0)
        far = safe_x**a * np.expm1(a * np.log1p(d / safe_x))
    return np.where(x > 0, far, d**a)


def lag_weights(n: int, a: float) -> np.ndarray:
    """g(l) = l**a - (l-1)**a for l = 1..n, as an array indexed from 0."""
    lags = np.arange(n, dtype=float)
    return power_increment(lags, 1.0, a)


def cell_average_weights(near, far, d, H: HurstParam | float):
    """
    Average over the history cell [s - far, s - near] of
    (t - q)**(H-1/2) - (s - q)**(H-1/2), with d = t - s >= 0.

    Broadcasts over ``near``/``far`` (cell distances from s) and ``d``.
    """
    a = as_hurst(H).alpha
    near = np.asarray(near, dtype=float)
    far = np.asarray(far, dtype=float)
    width = far - near
    return (power_increment(far, d, a) - power_increment(near, d, a)) / (a * width)


def cell_average_derivative_weights(near, far, d, H: HurstParam | float):
    """
    (H-1/2) times the average of (t - q)**(H-3/2) over the cell
    [s - far, s - near], d = t - s > 0; the t-derivative of
    ``cell_average_weights``.
    """
    b = as_hurst(H).beta
    near = np.asarray(near, dtype=float)
    far = np.asarray(far, dtype=float)
    return power_increment(np.asarray(d, dtype=float) + near, far - near, b) / (far - near)


def tail_variance(H: HurstParam | float, t: float, L: float) -> float:
    """c_H^2 * integral_L^inf [(t+u)^(H-1/2) - u^(H-1/2)]^2 du: history neglected beyond -L."""
    hp = as_hurst(H)
    if hp.is_brownian or t <= 0:
        return 0.0
    b = hp.beta
    L = max(float(L), 0.0)
    upper = max(L, t / _ASYMPTOTE_RATIO)

    def in_log(y: float) -> float:
        u = math.exp(y)
        inc = float(power_increment(u, t, b))
        return inc * inc * u

    total = 0.0
    lo = L
    if L < t:
        total += integrate.quad(lambda u: float(power_increment(u, t, b)) ** 2, L, t, limit=200)[0]
        lo = t
    if upper > lo:
        total += integrate.quad(in_log, math.log(lo), math.log(upper), limit=400)[0]
    total += (b * t) ** 2 * upper ** (2.0 * b - 1.0) / (1.0 - 2.0 * b)
    return ch_coefficient(hp) ** 2 * total


def history_length(H: HurstParam | float, T: float, tail_tol: float = 1e-4) -> float:
    """Smallest L whose neglected tail variance is at most ``tail_tol * T**(2H)``."""
    hp = as_hurst(H)
    if hp.is_brownian:
        return 0.0
    if tail_tol <= 0:
        raise ConfigError(f"tail tolerance must be positive, got {tail_tol!r}")
    target = tail_tol * T ** (2.0 * hp.H)
    if tail_variance(hp, T, 0.0) <= target:
        return 0.0

    def excess(log_l: float) -> float:
        return tail_variance(hp, T, math.exp(log_l)) - target

    lo, hi = math.log(1e-12 * T), math.log(1e60)
    if excess(hi) > 0:
        raise NumericalError(
            f"no history length below 1e60 meets tail tolerance {tail_tol} at H={hp.H}"
        )
    L = math.exp(optimize.brentq(excess, lo, hi, xtol=1e-6, rtol=1e-10))
    logger.debug("history length for H=%s, T=%s, tol=%s: %.6g", hp.H, T, tail_tol, L)
    return L
