"""
Information windows and the rule interface every strategy is built from.

A rule never sees the price array.  It receives an ``ObservationWindow``
that serves prices at nodes up to a cutoff and refuses anything later, so a
strategy's measurability class is enforced by construction.
"""

from __future__ import annotations

import abc

import numpy as np

from fbmlab.errors import MeasurabilityError
from fbmlab.fbm.grid import TimeGrid

__all__ = ["ObservationWindow", "BaseRule"]


class ObservationWindow:
    """
    Prices S(t_0..t_cutoff) as seen when deciding γ(t_now).

    In strict mode a read past ``cutoff`` raises ``MeasurabilityError``.
    In recording mode (used by the audit) the read is served and logged in
    ``violations``.
    """

    def __init__(
        self,
        prices: np.ndarray,
        grid: TimeGrid,
        S0: float,
        *,
        now: int,
        cutoff: int,
        strategy: str,
        strict: bool = True,
    ):
        self._prices = prices
        self.grid = grid
        self.S0 = S0
        self.now = now
        self.cutoff = cutoff
        self.strategy = strategy
        self.strict = strict
        self.violations: set[int] = set()

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self._prices.shape[:-1]

    def price(self, node: int) -> np.ndarray:
        node = int(node)
        if not 0 <= node <= self.grid.N:
            raise IndexError(f"node {node} is outside the grid 0..{self.grid.N}")
        if node > self.cutoff:
            if self.strict:
                raise MeasurabilityError(
                    f"strategy {self.strategy!r} read S at node {node} while deciding node "
                    f"{self.now}; its window ends at node {self.cutoff}",
                    node=self.now,
                    strategy=self.strategy,
                )
            self.violations.add(node)
        return self._prices[..., node]

    def latest(self) -> np.ndarray:
        """S at the last admissible node."""
        return self.price(self.cutoff)

    def steps(self, duration: float) -> int:
        """Whole grid steps in ``duration`` (floored)."""
        return self.grid.floor_steps(duration)


class BaseRule(abc.ABC):
    """Maps an observation window to a position γ for every replicate."""

    name: str = "rule"

    @abc.abstractmethod
    def __call__(self, window: ObservationWindow) -> np.ndarray: ...

    @property
    def is_zero(self) -> bool:
        """True when the rule holds no position whatever it observes."""
        return False

    def describe(self) -> dict:
        return {"rule": self.name}
