"""
Fast invariant checks behind ``fbmlab validate``.

Each check is a small, fixed-seed computation returning a ``CheckResult``;
Monte Carlo checks use a 4-SE envelope so they are stable at small M.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fbmlab.errors import FbmLabError
from fbmlab.fbm import kernels
from fbmlab.fbm.driver import sample_driver
from fbmlab.fbm.generators import cholesky_path, mvn_path
from fbmlab.fbm.grid import TimeGrid
from fbmlab.integration.operator import g_operator_norm_ratio, g_operator_values
from fbmlab.integration.riemann import IntegrandSample, quadratic_variation, riemann_integral
from fbmlab.experiments.stats import estimate_mean

__all__ = ["CheckResult", "CHECKS", "run_smoke_suite"]

logger = logging.getLogger(__name__)

SMOKE_SE = 4.0
SMOKE_TAIL_TOL = 1e-4


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[validate] {'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"

    def dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _driver(grid: TimeGrid, hursts, seed: int, count: int):
    L = max(kernels.history_length(h, grid.T, SMOKE_TAIL_TOL) for h in hursts)
    near = grid.T
    return sample_driver(grid, max(L, near) if L > 0 else 0.0, seed, range(count), near_history=near)


def check_coupling_anchor(seed: int) -> CheckResult:
    grid = TimeGrid(1.0, 64)
    driver = _driver(grid, [0.75], seed, 64)
    values = mvn_path(driver, 0.5).values
    expected = np.zeros_like(values)
    expected[:, 1:] = np.cumsum(driver.forward, axis=1)
    scale = np.maximum(np.abs(expected), 1e-300)
    err = float(np.max(np.abs(values - expected) / scale))
    return CheckResult("coupling-anchor", err < 1e-12, f"max relative error {err:.3g}")


def check_example_identity(seed: int) -> CheckResult:
    grid = TimeGrid(1.0, 128)
    hursts = [0.5, 0.6, 0.75, 0.9]
    driver = _driver(grid, hursts, seed, 32)
    worst = 0.0
    for h in hursts:
        path = mvn_path(driver, h)
        gamma = IntegrandSample(grid, 2.0 * (path.values[:, :-1] - path.values[:, :1]))
        lhs = riemann_integral(gamma, path).value + quadratic_variation(path)
        rhs = (path.values[:, -1] - path.values[:, 0]) ** 2
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300))))
    return CheckResult("example-1-identity", worst < 1e-10, f"max relative error {worst:.3g}")


def check_normalization(seed: int) -> CheckResult:
    grid = TimeGrid(1.0, 64)
    hursts = [0.55, 0.75, 0.9]
    driver = _driver(grid, hursts, seed, 2000)
    parts, ok = [], True
    for h in hursts:
        est = estimate_mean(mvn_path(driver, h).values[:, -1] ** 2)
        z = abs(est.mean - 1.0) / est.se
        ok &= z <= SMOKE_SE
        parts.append(f"H={h:g}: Var={est.mean:.4f} (z={z:.2f})")
    return CheckResult("normalization", bool(ok), "; ".join(parts))


def check_generator_equivalence(seed: int) -> CheckResult:
    grid = TimeGrid(1.0, 32)
    h = 0.75
    nodes = [16, 32]
    M = 2000
    driver = _driver(grid, [h], seed, M)
    paths = {
        "mvn": mvn_path(driver, h).values,
        "cholesky": cholesky_path(h, grid, seed, range(M)).values,
    }
    worst = 0.0
    for values in paths.values():
        for a in nodes:
            for b in nodes:
                if b < a:
                    continue
                product = values[:, a] * values[:, b]
                est = estimate_mean(product)
                exact = kernels.fbm_covariance(h, grid.time(a), grid.time(b))
                worst = max(worst, abs(est.mean - exact) / est.se)
    return CheckResult(
        "generator-equivalence", worst <= SMOKE_SE, f"H={h:g}, M={M}: worst |z|={worst:.2f}"
    )


def check_g_operator(seed: int) -> CheckResult:
    grid = TimeGrid(1.0, 256)
    family = {
        "1": lambda t: np.ones_like(t),
        "t": lambda t: t,
        "sin": lambda t: np.sin(2.0 * math.pi * t),
    }
    h = 0.75
    one = IntegrandSample.constant(grid, 1.0)
    closed = kernels.ch_coefficient(h) * (grid.T - grid.nodes[:-1]) ** (h - 0.5)
    err = float(np.max(np.abs(g_operator_values(h, one) - closed)))
    ratios = [
        g_operator_norm_ratio(hh, 0.0, grid.T, IntegrandSample.from_function(grid, f))
        for hh in (0.51, 0.6, 0.75, 0.9)
        for f in family.values()
    ]
    sup = max(ratios)
    return CheckResult(
        "g-operator",
        err < 1e-6 and math.isfinite(sup),
        f"closed-form error {err:.2g}; sup ||G g||/||g|| = {sup:.4f}",
    )


CHECKS: dict[str, Callable[[int], CheckResult]] = {
    "coupling-anchor": check_coupling_anchor,
    "example-1-identity": check_example_identity,
    "normalization": check_normalization,
    "generator-equivalence": check_generator_equivalence,
    "g-operator": check_g_operator,
}


def run_smoke_suite(seed: int = 7) -> list[CheckResult]:
    results = []
    for name, check in CHECKS.items():
        try:
            result = check(seed)
        except FbmLabError as e:
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        logger.debug(result.line())
        results.append(result)
    return results
