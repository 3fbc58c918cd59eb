"""Hurst parameter and uniform time grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fbmlab.errors import ConfigError

__all__ = ["HurstParam", "TimeGrid", "as_hurst"]

_STEP_RTOL = 1e-9


@dataclass(frozen=True)
class HurstParam:
    """Hurst exponent restricted to [1/2, 1)."""

    H: float

    def __post_init__(self):
        H = float(self.H)
        if not math.isfinite(H) or not 0.5 <= H < 1.0:
            raise ConfigError(f"Hurst exponent must lie in [0.5, 1), got {self.H!r}")
        object.__setattr__(self, "H", H)

    @property
    def is_brownian(self) -> bool:
        return self.H == 0.5

    @property
    def alpha(self) -> float:
        """Exponent of the moving-average antiderivative, H + 1/2."""
        return self.H + 0.5

    @property
    def beta(self) -> float:
        """Exponent of the moving-average kernel, H - 1/2."""
        return self.H - 0.5

    def __float__(self) -> float:
        return self.H


def as_hurst(H: HurstParam | float) -> HurstParam:
    return H if isinstance(H, HurstParam) else HurstParam(H)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition t_i = i*T/N, i = 0..N, of [0, T]."""

    T: float
    N: int

    def __post_init__(self):
        T = float(self.T)
        if not math.isfinite(T) or T <= 0:
            raise ConfigError(f"Time horizon must be positive, got {self.T!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"Step count must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "N", int(self.N))

    @property
    def step(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.step

    def time(self, index: int) -> float:
        return index * self.step

    def steps_in(self, length: float, *, what: str = "length") -> int:
        """Number of whole steps in ``length``; ConfigError if not a multiple."""
        ratio = float(length) / self.step
        k = round(ratio)
        if length < 0 or abs(ratio - k) > _STEP_RTOL * max(1.0, abs(ratio)):
            raise ConfigError(
                f"{what} {length!r} is not a nonnegative multiple of the grid step {self.step!r}"
            )
        return int(k)

    def floor_steps(self, length: float) -> int:
        """Whole steps contained in ``length`` (floored, tolerant to rounding)."""
        ratio = float(length) / self.step
        k = round(ratio)
        if abs(ratio - k) <= _STEP_RTOL * max(1.0, abs(ratio)):
            return int(k)
        return int(math.floor(ratio))

    def node_index(self, t: float, *, what: str = "time") -> int:
        k = self.steps_in(t, what=what)
        if k > self.N:
            raise ConfigError(f"{what} {t!r} lies beyond the horizon {self.T!r}")
        return k

    def coarsen(self, factor: int) -> "TimeGrid":
        if factor < 1 or self.N % factor:
            raise ConfigError(f"cannot coarsen N={self.N} by a factor of {factor}")
        return TimeGrid(self.T, self.N // factor)

    def dict(self) -> dict:
        return {"T": self.T, "N": self.N, "step": self.step}
