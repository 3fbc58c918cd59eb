from fbmlab.market.base import BaseRule, ObservationWindow
from fbmlab.market.model import MarketModel
from fbmlab.market.oracle import adapted_quadratic_expectation, closed_form_wealth_expectation
from fbmlab.market.rules import (
    LookaheadRule,
    MomentumRule,
    QuadraticRule,
    SignRule,
    ZeroRule,
    make_rule,
)
from fbmlab.market.strategy import ADAPTED, DELAYED, PIECEWISE, Strategy
from fbmlab.market.wealth import (
    AuditReport,
    WealthOutcome,
    WealthProcess,
    evaluate_strategy,
    measurability_audit,
    terminal_wealth,
    wealth_process,
)

__all__ = [
    "BaseRule",
    "ObservationWindow",
    "MarketModel",
    "Strategy",
    "ADAPTED",
    "DELAYED",
    "PIECEWISE",
    "QuadraticRule",
    "SignRule",
    "MomentumRule",
    "ZeroRule",
    "LookaheadRule",
    "make_rule",
    "AuditReport",
    "WealthOutcome",
    "WealthProcess",
    "evaluate_strategy",
    "measurability_audit",
    "terminal_wealth",
    "wealth_process",
    "closed_form_wealth_expectation",
    "adapted_quadratic_expectation",
]
