"""Strategies: a rule plus the measurability class that bounds what it may read."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.fbm.grid import TimeGrid
from fbmlab.market.base import BaseRule

__all__ = ["Strategy", "ADAPTED", "DELAYED", "PIECEWISE", "KINDS"]

ADAPTED = "adapted"
DELAYED = "delayed"
PIECEWISE = "piecewise"
KINDS = (ADAPTED, DELAYED, PIECEWISE)


@dataclass(frozen=True)
class Strategy:
    """
    kind      adapted: γ(t_i) may use S up to t_i
              delayed: γ(t_i) may use S up to (t_i - ε)+
              piecewise: γ constant on [T_k, T_{k+1}), decided from S up to T_k,
                         with T_{k+1} - T_k >= ε
    rebalance piecewise only; times T_0 = 0 < T_1 < ... (None: every ε)
    """

    kind: str
    rule: BaseRule
    eps: float | None = None
    rebalance: tuple[float, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"strategy kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == ADAPTED:
            if self.eps is not None:
                raise ConfigError("adapted strategies take no delay")
        elif self.eps is None or not self.eps > 0:
            raise ConfigError(f"{self.kind} strategy needs a positive eps, got {self.eps!r}")
        if self.rebalance is not None:
            if self.kind != PIECEWISE:
                raise ConfigError("rebalance times apply to piecewise strategies only")
            object.__setattr__(self, "rebalance", tuple(float(t) for t in self.rebalance))
        if self.name is None:
            label = self.kind if self.eps is None else f"{self.kind}({self.eps:g})"
            object.__setattr__(self, "name", f"{label}-{self.rule.name}")

    # ------------------------------------------------------------------
    @classmethod
    def adapted(cls, rule: BaseRule, *, name: str | None = None) -> "Strategy":
        return cls(ADAPTED, rule, name=name)

    @classmethod
    def delayed(cls, rule: BaseRule, eps: float, *, name: str | None = None) -> "Strategy":
        return cls(DELAYED, rule, eps=float(eps), name=name)

    @classmethod
    def piecewise(
        cls,
        rule: BaseRule,
        eps: float,
        rebalance: tuple[float, ...] | list[float] | None = None,
        *,
        name: str | None = None,
    ) -> "Strategy":
        return cls(
            PIECEWISE,
            rule,
            eps=float(eps),
            rebalance=None if rebalance is None else tuple(rebalance),
            name=name,
        )

    # ------------------------------------------------------------------
    def delay_steps(self, grid: TimeGrid) -> int:
        """ε in whole grid steps (floored); 0 for adapted strategies."""
        if self.eps is None:
            return 0
        steps = grid.floor_steps(self.eps)
        if steps < 1:
            warnings.warn(
                f"[Strategy] {self.name}: eps={self.eps:g} is below the grid step "
                f"{grid.step:g} and would make the strategy adapted"
            )
            raise ConfigError(
                f"{self.name}: eps={self.eps:g} is smaller than the grid step {grid.step:g}"
            )
        if abs(steps * grid.step - self.eps) > 1e-9 * self.eps:
            warnings.warn(
                f"[Strategy] {self.name}: eps={self.eps:g} floored to {steps * grid.step:g}"
            )
        return steps

    def rebalance_nodes(self, grid: TimeGrid) -> np.ndarray:
        """Block starts of a piecewise strategy as node indices."""
        if self.kind != PIECEWISE:
            raise ConfigError(f"{self.name} is not piecewise")
        gap = self.delay_steps(grid)
        if self.rebalance is None:
            return np.arange(0, grid.N - gap + 1, gap)
        nodes = np.array(
            [grid.node_index(t, what=f"{self.name} rebalance time") for t in self.rebalance]
        )
        bounds = np.append(nodes, grid.N)
        if nodes[0] != 0:
            raise ConfigError(f"{self.name}: the first rebalance time must be 0")
        if np.any(np.diff(bounds) < gap):
            raise ConfigError(
                f"{self.name}: rebalance times {list(self.rebalance)} are closer than eps={self.eps:g}"
            )
        return nodes

    def cutoffs(self, grid: TimeGrid) -> np.ndarray:
        """Last node γ(t_i) may depend on, for i = 0..N-1."""
        i = np.arange(grid.N)
        if self.kind == ADAPTED:
            return i
        if self.kind == DELAYED:
            return np.maximum(i - self.delay_steps(grid), 0)
        starts = self.rebalance_nodes(grid)
        return starts[np.searchsorted(starts, i, side="right") - 1]

    def dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, **self.rule.describe()}
        if self.eps is not None:
            out["eps"] = self.eps
        if self.rebalance is not None:
            out["rebalance"] = list(self.rebalance)
        return out
