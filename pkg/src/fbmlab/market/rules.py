"""Concrete position rules."""

from __future__ import annotations

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.market.base import BaseRule, ObservationWindow

__all__ = [
    "QuadraticRule",
    "SignRule",
    "MomentumRule",
    "ZeroRule",
    "LookaheadRule",
    "RULES",
    "make_rule",
]


def _broadcast(value, window: ObservationWindow) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), window.batch_shape)


class QuadraticRule(BaseRule):
    """γ = scale * (S(cutoff) - S0); with scale 2 the gains telescope into (S(T)-S0)^2 minus QV."""

    name = "quadratic"

    def __init__(self, scale: float = 2.0):
        self.scale = float(scale)

    def __call__(self, window: ObservationWindow) -> np.ndarray:
        return _broadcast(self.scale * (window.latest() - window.S0), window)

    def describe(self) -> dict:
        return {"rule": self.name, "scale": self.scale}


class SignRule(BaseRule):
    """Long one unit when the last admissible price is at or above S0, short otherwise."""

    name = "sign"

    def __call__(self, window: ObservationWindow) -> np.ndarray:
        return _broadcast(np.where(window.latest() >= window.S0, 1.0, -1.0), window)


class MomentumRule(BaseRule):
    """γ = sign(S(c) - S(c - lookback)), c the last admissible node."""

    name = "momentum"

    def __init__(self, lookback: float):
        if not lookback > 0:
            raise ConfigError(f"momentum lookback must be positive, got {lookback!r}")
        self.lookback = float(lookback)

    def __call__(self, window: ObservationWindow) -> np.ndarray:
        lag = max(window.steps(self.lookback), 1)
        earlier = window.price(max(window.cutoff - lag, 0))
        return _broadcast(np.sign(window.latest() - earlier), window)

    def describe(self) -> dict:
        return {"rule": self.name, "lookback": self.lookback}


class ZeroRule(BaseRule):
    name = "zero"

    def __call__(self, window: ObservationWindow) -> np.ndarray:
        return np.zeros(window.batch_shape)

    @property
    def is_zero(self) -> bool:
        return True


class LookaheadRule(BaseRule):
    """Reads ``offset`` nodes past the decision node; never measurable."""

    name = "lookahead"

    def __init__(self, offset: int = 1, scale: float = 2.0):
        self.offset = int(offset)
        self.scale = float(scale)

    def __call__(self, window: ObservationWindow) -> np.ndarray:
        node = min(window.now + self.offset, window.grid.N)
        return _broadcast(self.scale * (window.price(node) - window.S0), window)

    def describe(self) -> dict:
        return {"rule": self.name, "offset": self.offset}


RULES = {
    QuadraticRule.name: QuadraticRule,
    SignRule.name: SignRule,
    MomentumRule.name: MomentumRule,
    ZeroRule.name: ZeroRule,
    LookaheadRule.name: LookaheadRule,
}


def make_rule(name: str, **params) -> BaseRule:
    try:
        cls = RULES[name]
    except KeyError:
        raise ConfigError(f"unknown rule {name!r}; choose from {sorted(RULES)}") from None
    try:
        return cls(**params)
    except TypeError as e:
        raise ConfigError(f"bad parameters for rule {name!r}: {e}") from None
