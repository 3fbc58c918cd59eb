"""Left-point Riemann sums against sampled paths."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Protocol

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.fbm.grid import TimeGrid
from fbmlab.util.numerics import fsum_last

__all__ = [
    "IntegrandSample",
    "IntegralEstimate",
    "riemann_integral",
    "quadratic_variation",
    "RIEMANN_LEFT",
]

RIEMANN_LEFT = "riemann-left"


class SampledPath(Protocol):
    grid: TimeGrid
    values: np.ndarray


@dataclass(frozen=True)
class IntegrandSample:
    """γ(t_i) at left endpoints i = 0..N-1; leading axes index replicates."""

    grid: TimeGrid
    values: np.ndarray
    deterministic: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0 or values.shape[-1] != self.grid.N:
            raise ConfigError(
                f"integrand needs {self.grid.N} left-endpoint values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigError("integrand values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls, grid: TimeGrid, func: Callable[[np.ndarray], np.ndarray], *, deterministic: bool = True
    ) -> "IntegrandSample":
        """Sample a deterministic function of time at the left endpoints."""
        times = grid.nodes[:-1]
        return cls(grid, np.broadcast_to(func(times), times.shape).astype(float), deterministic)

    @classmethod
    def constant(cls, grid: TimeGrid, value: float) -> "IntegrandSample":
        return cls(grid, np.full(grid.N, float(value)), deterministic=True)

    def scaled(self, factor: float) -> "IntegrandSample":
        return replace(self, values=factor * self.values)

    def __add__(self, other: "IntegrandSample") -> "IntegrandSample":
        _check_same_grid(self.grid, other.grid)
        return IntegrandSample(
            self.grid, self.values + other.values, self.deterministic and other.deterministic
        )


@dataclass(frozen=True)
class IntegralEstimate:
    value: float | np.ndarray
    grid_N: int
    method: str = RIEMANN_LEFT

    def dict(self) -> dict:
        return {"value": self.value, "grid_N": self.grid_N, "method": self.method}


def _check_same_grid(a: TimeGrid, b: TimeGrid) -> None:
    if a != b:
        raise ConfigError(f"grid mismatch: {a} vs {b}")


def riemann_integral(gamma: IntegrandSample, path: SampledPath, *, start: int = 0) -> IntegralEstimate:
    """sum_{i >= start} γ(t_i) (path(t_{i+1}) - path(t_i)), compensated."""
    _check_same_grid(gamma.grid, path.grid)
    increments = np.diff(np.asarray(path.values, dtype=float), axis=-1)
    terms = gamma.values[..., start:] * increments[..., start:]
    return IntegralEstimate(fsum_last(terms), gamma.grid.N)


def quadratic_variation(path: SampledPath):
    """sum_i (path(t_{i+1}) - path(t_i))^2, compensated; per replicate."""
    increments = np.diff(np.asarray(path.values, dtype=float), axis=-1)
    return fsum_last(increments * increments)
