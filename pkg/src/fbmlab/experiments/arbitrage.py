"""
Adapted quadratic strategy γ = 2(S - S0) across a refinement sweep.

X(T) = (S(T) - S0)^2 - sigma^2 QV, so the loss probability shrinks with N
for H > 1/2 while the mean approaches T^2H.  Every N reads the finest
driver coarsened, and every H reads the same driver.
"""

from __future__ import annotations

import logging

import numpy as np

from fbmlab.config.loader import ExperimentConfig
from fbmlab.experiments.common import DriverSpec, cell_key, finish_report, market_for, new_report
from fbmlab.experiments.engine import run_batches
from fbmlab.experiments.report import ExperimentReport, TableRow
from fbmlab.experiments.stats import Verdict, estimate_mean, estimate_proportion, oracle_verdict
from fbmlab.fbm.generators import mvn_path
from fbmlab.market.oracle import closed_form_wealth_expectation
from fbmlab.market.rules import QuadraticRule
from fbmlab.market.strategy import Strategy
from fbmlab.market.wealth import terminal_wealth

__all__ = ["run_arbitrage_experiment"]

logger = logging.getLogger(__name__)


def run_arbitrage_experiment(cfg: ExperimentConfig, *, threads: int | None = None) -> ExperimentReport:
    report = new_report(cfg, "arbitrage")
    fine = cfg.finest_grid
    hursts = sorted(set(cfg.H))
    steps = sorted(set(cfg.steps))
    strategy = Strategy.adapted(QuadraticRule(), name="adapted-quadratic")
    spec = DriverSpec.for_config(cfg, fine, hursts)

    def batch(ids: np.ndarray) -> dict[str, np.ndarray]:
        driver = spec.sample(ids)
        out = {}
        for n in steps:
            coarse = driver.coarsen(fine.N // n)
            for h in hursts:
                market = market_for(cfg, mvn_path(coarse, h))
                out[cell_key(h, n)] = terminal_wealth(strategy, market, ids).terminal_wealth
        return out

    wealth = run_batches(batch, cfg.replicates, batch_size=cfg.batch_size, threads=threads)

    th = cfg.thresholds
    for h in hursts:
        losses = []
        for n in steps:
            X = wealth[cell_key(h, n)]
            grid = fine.coarsen(fine.N // n)
            est = estimate_mean(X)
            oracle = closed_form_wealth_expectation(strategy, grid, h, cfg.market.sigma)
            verdict = report.add_verdict(
                oracle_verdict(
                    f"mean-wealth-oracle H={h:g} N={n}",
                    est,
                    oracle,
                    pass_se=th.pass_se,
                    fail_se=th.fail_se,
                )
            )
            report.add_row("mean_wealth", TableRow.from_mean(h, None, n, est, oracle=oracle, verdict=verdict))
            loss = estimate_proportion(X < 0, th.confidence)
            gain = estimate_proportion(X > 0, th.confidence)
            report.add_row("loss_probability", TableRow.from_proportion(h, None, n, loss))
            report.add_row("gain_probability", TableRow.from_proportion(h, None, n, gain))
            losses.append(loss.p)
        if h > 0.5 and len(steps) > 1:
            decreasing = bool(np.all(np.diff(losses) < 0))
            report.add_verdict(
                Verdict(
                    f"loss-probability-decreasing H={h:g}",
                    decreasing,
                    "P(X<0) over N=" + ", ".join(f"{n}:{p:.4f}" for n, p in zip(steps, losses)),
                )
            )
    report.notes.append(
        "X(T) = (S(T)-S0)^2 - sigma^2 QV for the adapted quadratic strategy; the mean oracle is "
        "the covariance sum, equal to sigma^2 T^2H (1 - N^(1-2H))."
    )
    return finish_report(report)
