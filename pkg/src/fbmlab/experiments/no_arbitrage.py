"""
Losses with positive probability for delayed and minimum-gap strategies.

No simulation can range over every strategy.  The run fixes a family from
the config (including the delayed version of the adapted arbitrage) and
checks, member by member and H by H, that the exact lower confidence bound
on P(X(T) < 0) is positive.
"""

from __future__ import annotations

import logging
import warnings

import numpy as np

from fbmlab.config.loader import ExperimentConfig
from fbmlab.errors import ConfigError
from fbmlab.experiments.common import DriverSpec, cell_key, finish_report, market_for, new_report
from fbmlab.experiments.engine import run_batches
from fbmlab.experiments.report import ExperimentReport, TableRow
from fbmlab.experiments.stats import Verdict, estimate_mean, estimate_proportion, oracle_verdict
from fbmlab.fbm.generators import mvn_path
from fbmlab.market.oracle import closed_form_wealth_expectation
from fbmlab.market.rules import QuadraticRule
from fbmlab.market.strategy import Strategy
from fbmlab.market.wealth import measurability_audit, terminal_wealth

__all__ = ["run_no_arbitrage_experiment", "LIMITATION"]

logger = logging.getLogger(__name__)

LIMITATION = (
    "Arbitrage-freeness is a statement about every admissible strategy; this run tests only "
    "the configured family, so a pass shows that no member is an arbitrage at this scale."
)


def _audit_family(strategies: list[Strategy], spec: DriverSpec, cfg: ExperimentConfig, hursts) -> None:
    """Abort on the first member that reads outside its window."""
    # stream id just past the Monte Carlo range, so the audit path is not a replicate
    driver = spec.sample(cfg.replicates)
    for h in hursts:
        market = market_for(cfg, mvn_path(driver, h))
        for strategy in strategies:
            measurability_audit(strategy, market).raise_for_violations()


def run_no_arbitrage_experiment(cfg: ExperimentConfig, *, threads: int | None = None) -> ExperimentReport:
    report = new_report(cfg, "no-arbitrage")
    report.notes.append(LIMITATION)
    grid = cfg.grids()[0]
    hursts = sorted(set(cfg.H))
    spec = DriverSpec.for_config(cfg, grid, hursts)

    members: list[Strategy] = []
    for strategy in cfg.strategies():
        if strategy.rule.is_zero:
            warnings.warn(f"[NoArbitrage] excluding {strategy.name!r}: it never holds a position")
            report.notes.append(f"{strategy.name} excluded: gamma = 0 carries no arbitrage information")
            continue
        members.append(strategy)
    if not members:
        raise ConfigError("family: every member has gamma = 0")
    _audit_family(members, spec, cfg, hursts)
    logger.info("no-arbitrage: %d members passed the measurability audit", len(members))

    def batch(ids: np.ndarray) -> dict[str, np.ndarray]:
        driver = spec.sample(ids)
        out = {}
        for h in hursts:
            market = market_for(cfg, mvn_path(driver, h))
            for strategy in members:
                out[cell_key(strategy.name, h)] = terminal_wealth(strategy, market).terminal_wealth
        return out

    results = run_batches(batch, cfg.replicates, batch_size=cfg.batch_size, threads=threads)
    th = cfg.thresholds

    for strategy in members:
        for h in hursts:
            X = results[cell_key(strategy.name, h)]
            loss = estimate_proportion(X < 0, th.confidence)
            verdict = report.add_verdict(
                Verdict(
                    f"loss-probability-positive {strategy.name} H={h:g}",
                    loss.lo > 0,
                    f"{loss.k}/{loss.n} losses, {th.confidence:g} lower bound {loss.lo:.4g}",
                )
            )
            report.add_row(
                f"loss_probability_{strategy.name}",
                TableRow.from_proportion(h, strategy.eps, grid.N, loss, verdict=verdict),
            )
            report.add_row(
                f"nonnegative_probability_{strategy.name}",
                TableRow.from_proportion(h, strategy.eps, grid.N, estimate_proportion(X >= 0, th.confidence)),
            )

            est = estimate_mean(X)
            oracle = None
            mean_verdict = None
            if isinstance(strategy.rule, QuadraticRule):
                oracle = closed_form_wealth_expectation(strategy, grid, h, cfg.market.sigma)
                mean_verdict = report.add_verdict(
                    oracle_verdict(
                        f"mean-wealth-oracle {strategy.name} H={h:g}",
                        est,
                        oracle,
                        pass_se=th.pass_se,
                        fail_se=th.fail_se,
                    )
                )
            report.add_row(
                f"mean_wealth_{strategy.name}",
                TableRow.from_mean(h, strategy.eps, grid.N, est, oracle=oracle, verdict=mean_verdict),
            )
    return finish_report(report)
