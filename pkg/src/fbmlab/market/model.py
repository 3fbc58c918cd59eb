from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.fbm.generators import FbmPath
from fbmlab.fbm.grid import TimeGrid

__all__ = ["MarketModel"]


@dataclass(frozen=True)
class MarketModel:
    """Bachelier market S(t) = S0 + sigma * B_H(t) with a unit bond b(t) = 1."""

    path: FbmPath
    S0: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.S0):
            raise ConfigError(f"S0 must be finite, got {self.S0!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def grid(self) -> TimeGrid:
        return self.path.grid

    @property
    def values(self) -> np.ndarray:
        """Price path S(t_i), i = 0..N."""
        return self.S0 + self.sigma * self.path.values

    @property
    def bond(self) -> np.ndarray:
        return np.ones(self.grid.N + 1)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.path.batch_shape

    def with_sigma(self, sigma: float) -> "MarketModel":
        return replace(self, sigma=float(sigma))

    def replicate(self, index: int) -> "MarketModel":
        return replace(self, path=self.path.replicate(index))

    def dict(self) -> dict:
        return {"S0": self.S0, "sigma": self.sigma, "H": self.path.H.H, "grid": self.grid.dict()}
