"""Exact expected terminal wealth for the quadratic family."""

from __future__ import annotations

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.fbm.grid import HurstParam, TimeGrid, as_hurst
from fbmlab.market.rules import QuadraticRule
from fbmlab.market.strategy import Strategy
from fbmlab.util.numerics import fsum

__all__ = ["closed_form_wealth_expectation", "adapted_quadratic_expectation"]


def closed_form_wealth_expectation(
    strategy: Strategy,
    grid: TimeGrid,
    H: HurstParam | float,
    sigma: float = 1.0,
) -> float:
    """
    E[sum_i k sigma^2 B_H(a_i) (B_H(t_{i+1}) - B_H(t_i))] for the rule
    γ = k (S(a_i) - S0), a_i the last node γ(t_i) may read, using

        E[B_H(a)(B_H(d) - B_H(c))] = (d^2H - c^2H - |d-a|^2H + |c-a|^2H) / 2.
    """
    if not isinstance(strategy.rule, QuadraticRule):
        raise ConfigError(
            f"closed-form expectation is available for the quadratic rule only, got "
            f"{strategy.rule.name!r}"
        )
    two_h = 2.0 * as_hurst(H).H
    a = strategy.cutoffs(grid) * grid.step
    c = np.arange(grid.N) * grid.step
    d = c + grid.step
    terms = 0.5 * (d**two_h - c**two_h - np.abs(d - a) ** two_h + np.abs(c - a) ** two_h)
    return strategy.rule.scale * sigma**2 * fsum(terms)


def adapted_quadratic_expectation(grid: TimeGrid, H: HurstParam | float, sigma: float = 1.0) -> float:
    """T^2H (1 - N^(1-2H)) sigma^2: the sum above for the adapted rule with k = 2."""
    h = as_hurst(H).H
    return sigma**2 * grid.T ** (2.0 * h) * (1.0 - grid.N ** (1.0 - 2.0 * h))
