"""Monte Carlo estimates, exact binomial bounds and oracle verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from fbmlab.util.numerics import fsum

__all__ = [
    "Estimate",
    "ProportionEstimate",
    "Verdict",
    "estimate_mean",
    "estimate_proportion",
    "oracle_verdict",
]


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int

    def dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "n": self.n}


def estimate_mean(samples) -> Estimate:
    """Sample mean and its standard error, both from compensated sums."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n == 0:
        return Estimate(math.nan, math.nan, 0)
    mean = fsum(x) / n
    if n == 1:
        return Estimate(mean, math.nan, 1)
    var = fsum((x - mean) ** 2) / (n - 1)
    return Estimate(mean, math.sqrt(var / n), n)


@dataclass(frozen=True)
class ProportionEstimate:
    """k successes out of n with an exact (Clopper–Pearson) interval."""

    k: int
    n: int
    lo: float
    hi: float
    confidence: float

    @property
    def p(self) -> float:
        return self.k / self.n if self.n else math.nan

    @property
    def se(self) -> float:
        p = self.p
        return math.sqrt(p * (1.0 - p) / self.n) if self.n else math.nan

    def dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "p": self.p,
            "lo": self.lo,
            "hi": self.hi,
            "confidence": self.confidence,
        }


def estimate_proportion(events, confidence: float = 0.99) -> ProportionEstimate:
    flags = np.asarray(events, dtype=bool).ravel()
    k, n = int(flags.sum()), int(flags.size)
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=confidence, method="exact")
    return ProportionEstimate(k, n, float(ci.low), float(ci.high), confidence)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one acceptance rule; ``hard_fail`` marks an oracle breach past the hard threshold."""

    rule: str
    passed: bool
    detail: str = ""
    hard_fail: bool = False

    def dict(self) -> dict:
        return {
            "rule": self.rule,
            "passed": self.passed,
            "detail": self.detail,
            "hard_fail": self.hard_fail,
        }


def oracle_verdict(
    rule: str,
    estimate: Estimate,
    oracle: float,
    *,
    pass_se: float = 3.0,
    fail_se: float = 4.0,
) -> Verdict:
    """Pass within ``pass_se`` standard errors of the oracle; hard failure past ``fail_se``."""
    gap = abs(estimate.mean - oracle)
    if not estimate.se > 0:
        ok = gap <= 1e-12 * max(1.0, abs(oracle))
        return Verdict(rule, ok, f"mean={estimate.mean:.6g} oracle={oracle:.6g} (no spread)", not ok)
    z = gap / estimate.se
    return Verdict(
        rule,
        z <= pass_se,
        f"mean={estimate.mean:.6g} oracle={oracle:.6g} se={estimate.se:.3g} |z|={z:.2f}",
        z > fail_se,
    )
