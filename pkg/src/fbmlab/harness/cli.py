"""
fbmlab command line.

    fbmlab simulate --h 0.75 --n 1024 --count 4 --out paths/
    fbmlab experiment arbitrage --config my.yaml --out results/arbitrage
    fbmlab validate

Exit codes: 0 every verdict passes, 2 configuration or measurability error,
3 a verdict fails, 4 numerical failure or a hard oracle breach.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Iterable

import pandas as pd

from fbmlab import __version__
from fbmlab.config.loader import EXPERIMENT_KINDS, OUTPUT_ENV, ExperimentConfig, resolve_output_dir
from fbmlab.errors import ConfigError, MeasurabilityError, NumericalError
from fbmlab.experiments import run_experiment
from fbmlab.experiments.common import truncation_checks
from fbmlab.experiments.report import RunManifest, config_checksum, utc_now
from fbmlab.fbm.driver import sample_driver
from fbmlab.fbm.generators import CHOLESKY, CIRCULANT, MVN, cholesky_path, circulant_path, mvn_path
from fbmlab.fbm.grid import TimeGrid, as_hurst
from fbmlab.fbm.kernels import history_length
from fbmlab.harness.smoke import run_smoke_suite

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_VERDICT", "EXIT_NUMERICAL"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERDICT = 3
EXIT_NUMERICAL = 4

GENERATORS = {"mvn": MVN, "cholesky": CHOLESKY, "circulant": CIRCULANT}


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------
def simulate_paths(
    H: float,
    N: int,
    T: float = 1.0,
    L: float | None = None,
    seed: int = 0,
    count: int = 1,
    generator: str = "mvn",
    tail_tol: float = 1e-4,
):
    """The paths ``fbmlab simulate`` writes, one replicate per stream id 0..count-1."""
    hp = as_hurst(H)
    grid = TimeGrid(T, N)
    if count < 1:
        raise ConfigError(f"count must be positive, got {count}")
    ids = range(count)
    if generator == "cholesky":
        return cholesky_path(hp, grid, seed, ids)
    if generator == "circulant":
        return circulant_path(hp, grid, seed, ids)
    if generator != "mvn":
        raise ConfigError(f"unknown generator {generator!r}; choose from {sorted(GENERATORS)}")
    if L is None:
        L = history_length(hp, T, tail_tol)
        driver = sample_driver(grid, max(L, T) if L > 0 else 0.0, seed, ids, near_history=T)
    else:
        driver = sample_driver(grid, L, seed, ids)
    return mvn_path(driver, hp)


def cmd_simulate(args: argparse.Namespace) -> int:
    paths = simulate_paths(
        args.h, args.n, args.t, args.l, args.seed, args.count, args.generator, args.tail_tol
    )
    out_dir = Path(args.out) if args.out else Path(os.environ.get(OUTPUT_ENV, ".")) / "paths"
    out_dir.mkdir(parents=True, exist_ok=True)
    times = paths.grid.nodes
    for i in range(args.count):
        frame = pd.DataFrame({"t": times, "value": paths.values[i]})
        frame.to_csv(out_dir / f"path_{i:04d}.csv", index=False, float_format="%.17g")
    print(f"[simulate] wrote {args.count} {paths.provenance} path(s) H={paths.H.H:g} N={args.n} to {out_dir}")
    return EXIT_OK


# ----------------------------------------------------------------------
# experiment
# ----------------------------------------------------------------------
def _missing_dirs(out_dir: Path) -> list[Path]:
    """``out_dir`` and each ancestor that does not exist yet, deepest first."""
    return [d for d in (out_dir, *out_dir.parents) if not d.exists()]


def _remove_new_outputs(
    out_dir: Path, before: set[Path] | None, created: Iterable[Path] = ()
) -> None:
    """Delete what this run added under ``out_dir``, then the directories it created."""
    if out_dir.exists():
        for path in sorted(out_dir.rglob("*"), reverse=True):
            if before is not None and path in before:
                continue
            if path.is_dir():
                path.rmdir()
            else:
                path.unlink(missing_ok=True)
    for d in created:
        if d.is_dir() and not any(d.iterdir()):
            d.rmdir()


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_yaml(args.config) if args.config else ExperimentConfig.default(args.kind)
    if cfg.kind != args.kind:
        raise ConfigError(f"kind: config is for {cfg.kind!r}, not {args.kind!r}")
    if args.replicates is not None:
        cfg = cfg.replace(replicates=args.replicates)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    out_dir = resolve_output_dir(cfg, args.out)

    manifest = RunManifest(config_checksum(cfg.dict()), utc_now())
    before = set(out_dir.rglob("*")) if out_dir.exists() else None
    created = _missing_dirs(out_dir)
    try:
        report = run_experiment(cfg, threads=args.threads)
        written = report.write(out_dir)
        manifest.truncation = truncation_checks(cfg)
        manifest.finished = utc_now()
        manifest.outputs[cfg.kind] = [p.as_posix() for p in written]
        manifest.write(out_dir)
    except BaseException:
        _remove_new_outputs(out_dir, before, created)
        raise

    for v in report.verdicts:
        if not v.passed:
            print(f"[experiment] FAIL {v.rule}: {v.detail}")
    n_pass = sum(v.passed for v in report.verdicts)
    print(f"[experiment] {cfg.kind}: {n_pass}/{len(report.verdicts)} verdicts pass -> {out_dir}")
    if report.hard_failures:
        return EXIT_NUMERICAL
    return EXIT_OK if report.passed else EXIT_VERDICT


# ----------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------
def cmd_validate(args: argparse.Namespace) -> int:
    results = run_smoke_suite(args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fbmlab", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write fBm sample paths as CSV (t, value)")
    sim.add_argument("--h", type=float, required=True, help="Hurst exponent in [0.5, 1)")
    sim.add_argument("--n", type=int, required=True, help="number of grid steps")
    sim.add_argument("--t", type=float, default=1.0, help="horizon T")
    sim.add_argument("--l", type=float, default=None, help="history length (default: truncation rule)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--count", type=int, default=1)
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--generator", choices=sorted(GENERATORS), default="mvn")
    sim.add_argument("--tail-tol", type=float, default=1e-4)
    sim.set_defaults(func=cmd_simulate)

    exp = sub.add_parser("experiment", help="run one experiment and write its report")
    exp.add_argument("kind", choices=EXPERIMENT_KINDS)
    exp.add_argument("--config", default=None, help="YAML config (default: packaged config)")
    exp.add_argument("--out", default=None, help=f"output directory (default: ${OUTPUT_ENV}/<kind>)")
    exp.add_argument("--threads", type=int, default=None, help="thread budget (default: $FBMLAB_THREADS)")
    exp.add_argument("--replicates", type=int, default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.set_defaults(func=cmd_experiment)

    val = sub.add_parser("validate", help="run the fast invariant checks")
    val.add_argument("--seed", type=int, default=7)
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MeasurabilityError) as e:
        print(f"[fbmlab] error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"[fbmlab] numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"[fbmlab] cannot write output: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
