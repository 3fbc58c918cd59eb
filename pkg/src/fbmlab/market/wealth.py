"""
Evaluation of strategies on a market and the resulting self-financing wealth.

Rules are called node by node; each call sees one ``ObservationWindow``
shared by every replicate in the batch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from fbmlab.errors import MeasurabilityError
from fbmlab.integration.riemann import IntegrandSample, riemann_integral
from fbmlab.market.base import ObservationWindow
from fbmlab.market.model import MarketModel
from fbmlab.market.strategy import PIECEWISE, Strategy

__all__ = [
    "AuditReport",
    "WealthOutcome",
    "WealthProcess",
    "evaluate_strategy",
    "measurability_audit",
    "terminal_wealth",
    "wealth_process",
]

logger = logging.getLogger(__name__)


def _positions(
    strategy: Strategy,
    market: MarketModel,
    prices: np.ndarray,
    *,
    strict: bool = True,
) -> tuple[np.ndarray, list[ObservationWindow]]:
    grid = market.grid
    cutoffs = strategy.cutoffs(grid)
    gamma = np.empty(prices.shape[:-1] + (grid.N,))
    windows: list[ObservationWindow] = []
    block_value = None
    for i in range(grid.N):
        if strategy.kind == PIECEWISE and i > 0 and cutoffs[i] == cutoffs[i - 1]:
            gamma[..., i] = block_value
            continue
        window = ObservationWindow(
            prices,
            grid,
            market.S0,
            now=int(cutoffs[i]) if strategy.kind == PIECEWISE else i,
            cutoff=int(cutoffs[i]),
            strategy=strategy.name,
            strict=strict,
        )
        block_value = strategy.rule(window)
        gamma[..., i] = block_value
        windows.append(window)
    return gamma, windows


def evaluate_strategy(strategy: Strategy, market: MarketModel) -> IntegrandSample:
    """γ(t_i), i = 0..N-1; a read outside the window raises ``MeasurabilityError``."""
    gamma, _ = _positions(strategy, market, market.values)
    if not np.all(np.isfinite(gamma)):
        raise MeasurabilityError(
            f"strategy {strategy.name!r} produced non-finite positions", strategy=strategy.name
        )
    return IntegrandSample(market.grid, gamma)


# ----------------------------------------------------------------------
@dataclass
class AuditReport:
    strategy: str
    kind: str
    checked_nodes: int
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def raise_for_violations(self) -> None:
        if self.violations:
            first = self.violations[0]
            raise MeasurabilityError(
                f"strategy {self.strategy!r} failed the measurability audit at node "
                f"{first['node']} ({len(self.violations)} violating nodes)",
                node=first["node"],
                strategy=self.strategy,
            )

    def dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "kind": self.kind,
            "passed": self.passed,
            "checked_nodes": self.checked_nodes,
            "violations": self.violations,
        }


def _perturbed(prices: np.ndarray, cutoff: int) -> np.ndarray:
    out = prices.copy()
    tail = out[..., cutoff + 1 :]
    out[..., cutoff + 1 :] = -3.0 * tail + 1.0 + np.abs(tail).max(initial=0.0)
    return out


def measurability_audit(strategy: Strategy, market: MarketModel) -> AuditReport:
    """
    Re-evaluate γ(t_i) after scrambling S beyond the permitted window of each
    t_i.  A node fails if γ(t_i) changes or if the rule read a forbidden node.
    """
    grid = market.grid
    prices = market.values
    cutoffs = strategy.cutoffs(grid)
    baseline, windows = _positions(strategy, market, prices, strict=False)

    report = AuditReport(strategy.name, strategy.kind, checked_nodes=grid.N)
    decision_nodes = (
        np.unique(cutoffs) if strategy.kind == PIECEWISE else np.arange(grid.N)
    )
    for window, node in zip(windows, decision_nodes):
        cutoff = window.cutoff
        scrambled = ObservationWindow(
            _perturbed(prices, cutoff),
            grid,
            market.S0,
            now=window.now,
            cutoff=cutoff,
            strategy=strategy.name,
            strict=False,
        )
        changed = not np.array_equal(strategy.rule(scrambled), baseline[..., int(node)])
        if changed or window.violations:
            report.violations.append(
                {
                    "node": int(node),
                    "cutoff": cutoff,
                    "forbidden_reads": sorted(window.violations),
                    "changed": bool(changed),
                }
            )
    if not report.passed:
        logger.info("audit: %s violates its window at %d nodes", strategy.name, len(report.violations))
    return report


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class WealthOutcome:
    """Terminal wealth X(T) = sum γ(t_i) ΔS_i with X(0) = 0."""

    terminal_wealth: float | np.ndarray
    replicate_id: int | np.ndarray
    strategy: str
    H: float
    N: int


def terminal_wealth(
    strategy: Strategy,
    market: MarketModel,
    replicate_id: int | np.ndarray | None = None,
) -> WealthOutcome:
    gamma = evaluate_strategy(strategy, market)
    value = riemann_integral(gamma, market).value
    if replicate_id is None:
        batch = market.batch_shape
        replicate_id = np.arange(batch[0]) if batch else 0
    return WealthOutcome(value, replicate_id, strategy.name, market.path.H.H, market.grid.N)


@dataclass(frozen=True)
class WealthProcess:
    """X(t_i) for i = 0..N; bond and stock holdings β(t_i), γ(t_i) for i = 0..N-1."""

    X: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


def wealth_process(strategy: Strategy, market: MarketModel) -> WealthProcess:
    gamma = evaluate_strategy(strategy, market).values
    prices = market.values
    gains = gamma * np.diff(prices, axis=-1)
    X = np.zeros(prices.shape)
    X[..., 1:] = np.cumsum(gains, axis=-1)
    # b = 1, so the bond holding is whatever wealth is not in the stock
    beta = X[..., :-1] - gamma * prices[..., :-1]
    return WealthProcess(X, beta, gamma)
