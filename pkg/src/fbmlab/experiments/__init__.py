from fbmlab.config.loader import ExperimentConfig
from fbmlab.errors import ConfigError
from fbmlab.experiments.arbitrage import run_arbitrage_experiment
from fbmlab.experiments.continuity import run_continuity_experiment
from fbmlab.experiments.delay_gap import run_delay_discontinuity_experiment
from fbmlab.experiments.no_arbitrage import run_no_arbitrage_experiment
from fbmlab.experiments.report import ExperimentReport, RunManifest

__all__ = [
    "EXPERIMENTS",
    "run_experiment",
    "run_arbitrage_experiment",
    "run_continuity_experiment",
    "run_delay_discontinuity_experiment",
    "run_no_arbitrage_experiment",
    "ExperimentReport",
    "RunManifest",
]

EXPERIMENTS = {
    "arbitrage": run_arbitrage_experiment,
    "continuity": run_continuity_experiment,
    "delay-gap": run_delay_discontinuity_experiment,
    "no-arbitrage": run_no_arbitrage_experiment,
}


def run_experiment(cfg: ExperimentConfig, *, threads: int | None = None) -> ExperimentReport:
    try:
        runner = EXPERIMENTS[cfg.kind]
    except KeyError:
        raise ConfigError(f"unknown experiment {cfg.kind!r}") from None
    return runner(cfg, threads=threads)
