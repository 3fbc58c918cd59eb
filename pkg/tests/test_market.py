import warnings

import numpy as np
import pytest

from fbmlab.errors import ConfigError, MeasurabilityError
from fbmlab.fbm.generators import circulant_path, mvn_path
from fbmlab.fbm.grid import TimeGrid
from fbmlab.integration.riemann import quadratic_variation
from fbmlab.market import (
    BaseRule,
    LookaheadRule,
    MarketModel,
    MomentumRule,
    QuadraticRule,
    SignRule,
    Strategy,
    ZeroRule,
    closed_form_wealth_expectation,
    evaluate_strategy,
    make_rule,
    measurability_audit,
    terminal_wealth,
    wealth_process,
)

from conftest import standard_error


class CurrentPriceRule(BaseRule):
    """Reads S at the decision node itself, whatever the window allows."""

    name = "current"

    def __call__(self, window):
        return 2.0 * (window.price(window.now) - window.S0)


@pytest.fixture
def market(small_driver):
    return MarketModel(mvn_path(small_driver, 0.75))


class TestMarketModel:
    def test_starts_at_S0(self, small_driver):
        m = MarketModel(mvn_path(small_driver, 0.75), S0=1.5, sigma=2.0)
        assert np.all(m.values[:, 0] == 1.5)
        np.testing.assert_array_equal(m.bond, np.ones(65))

    @pytest.mark.parametrize("sigma", [0.0, -1.0, float("nan")])
    def test_rejects_bad_sigma(self, small_driver, sigma):
        with pytest.raises(ConfigError):
            MarketModel(mvn_path(small_driver, 0.75), sigma=sigma)


class TestEvaluateStrategy:
    def test_adapted_quadratic(self, market):
        gamma = evaluate_strategy(Strategy.adapted(QuadraticRule()), market)
        np.testing.assert_array_equal(gamma.values, 2.0 * market.path.values[:, :-1])
        assert not gamma.deterministic

    def test_delayed_quadratic_two_steps(self, market, grid64):
        gamma = evaluate_strategy(Strategy.delayed(QuadraticRule(), 2 * grid64.step), market)
        B = market.path.values
        assert np.all(gamma.values[:, :2] == 0.0)
        np.testing.assert_array_equal(gamma.values[:, 2:], 2.0 * B[:, :-3])

    def test_piecewise_two_blocks(self, market):
        strategy = Strategy.piecewise(QuadraticRule(), 0.25, rebalance=[0.0, 0.5])
        gamma = evaluate_strategy(strategy, market).values
        assert np.all(gamma[:, :32] == 0.0)
        np.testing.assert_array_equal(gamma[:, 32:], np.repeat(2.0 * market.path.values[:, 32:33], 32, axis=1))

    def test_default_blocks_are_eps_apart(self, grid64):
        strategy = Strategy.piecewise(SignRule(), 0.1)
        nodes = strategy.rebalance_nodes(grid64)
        assert nodes[0] == 0
        assert np.all(np.diff(np.append(nodes, grid64.N)) >= 6)

    @pytest.mark.parametrize("rebalance", [[0.25, 0.5], [0.0, 0.125], [0.0, 0.875]])
    def test_rebalance_times_validated(self, grid64, rebalance):
        with pytest.raises(ConfigError):
            Strategy.piecewise(SignRule(), 0.25, rebalance=rebalance).rebalance_nodes(grid64)

    def test_lookahead_names_the_node(self, market):
        with pytest.raises(MeasurabilityError) as info:
            evaluate_strategy(Strategy.adapted(LookaheadRule()), market)
        assert info.value.node == 0
        assert info.value.strategy == "adapted-lookahead"

    def test_delayed_reading_current_price(self, market, grid64):
        with pytest.raises(MeasurabilityError) as info:
            evaluate_strategy(Strategy.delayed(CurrentPriceRule(), 2 * grid64.step), market)
        assert info.value.node == 1

    def test_momentum_is_sign_valued(self, market):
        gamma = evaluate_strategy(Strategy.delayed(MomentumRule(0.05), 0.05), market).values
        assert set(np.unique(gamma)) <= {-1.0, 0.0, 1.0}

    def test_eps_below_step_is_rejected(self, market):
        strategy = Strategy.delayed(QuadraticRule(), 0.001)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            with pytest.raises(ConfigError, match="smaller than the grid step"):
                evaluate_strategy(strategy, market)
        assert any("below the grid step" in str(w.message) for w in caught)

    def test_eps_is_floored(self, grid64):
        with pytest.warns(UserWarning, match="floored"):
            assert Strategy.delayed(QuadraticRule(), 0.02).delay_steps(grid64) == 1

    def test_unknown_rule(self):
        with pytest.raises(ConfigError, match="unknown rule"):
            make_rule("martingale")


class TestAudit:
    def test_compliant_delayed_passes(self, market):
        report = measurability_audit(Strategy.delayed(QuadraticRule(), 0.05), market)
        assert report.passed and report.checked_nodes == 64
        report.raise_for_violations()

    @pytest.mark.parametrize(
        "strategy",
        [
            Strategy.adapted(QuadraticRule()),
            Strategy.piecewise(SignRule(), 0.1),
            Strategy.delayed(MomentumRule(0.05), 0.05),
            Strategy.adapted(ZeroRule()),
        ],
        ids=lambda s: s.name,
    )
    def test_family_passes(self, market, strategy):
        assert measurability_audit(strategy, market).passed

    def test_delayed_reading_current_price_fails_everywhere(self, market, grid64):
        report = measurability_audit(Strategy.delayed(CurrentPriceRule(), 2 * grid64.step), market)
        assert [v["node"] for v in report.violations] == list(range(1, 64))
        assert report.violations[0]["forbidden_reads"] == [1]

    def test_lookahead_fails(self, market):
        report = measurability_audit(Strategy.adapted(LookaheadRule()), market)
        assert not report.passed
        with pytest.raises(MeasurabilityError, match="measurability audit"):
            report.raise_for_violations()

    def test_verdict_ignores_sigma(self, market, grid64):
        for strategy in (
            Strategy.adapted(LookaheadRule()),
            Strategy.delayed(CurrentPriceRule(), 2 * grid64.step),
            Strategy.delayed(QuadraticRule(), 0.05),
        ):
            base = measurability_audit(strategy, market)
            scaled = measurability_audit(strategy, market.with_sigma(7.5))
            assert [v["node"] for v in base.violations] == [v["node"] for v in scaled.violations]


class TestWealth:
    def test_zero_strategy(self, market):
        out = terminal_wealth(Strategy.adapted(ZeroRule()), market)
        assert np.all(out.terminal_wealth == 0.0)
        np.testing.assert_array_equal(out.replicate_id, np.arange(16))

    def test_quadratic_identity(self, small_driver):
        m = MarketModel(mvn_path(small_driver, 0.75), S0=1.5, sigma=2.0)
        X = terminal_wealth(Strategy.adapted(QuadraticRule()), m).terminal_wealth
        rhs = (m.values[:, -1] - 1.5) ** 2 - 4.0 * quadratic_variation(m.path)
        np.testing.assert_allclose(X, rhs, rtol=1e-10, atol=1e-12)

    def test_sigma_scaling(self, market):
        strategy = Strategy.delayed(QuadraticRule(), 0.05)
        base = terminal_wealth(strategy, market).terminal_wealth
        scaled = terminal_wealth(strategy, market.with_sigma(3.0)).terminal_wealth
        np.testing.assert_allclose(scaled, 9.0 * base, rtol=1e-12, atol=1e-14)

    def test_self_financing_bookkeeping(self, small_driver):
        m = MarketModel(mvn_path(small_driver, 0.9), S0=0.5)
        strategy = Strategy.piecewise(SignRule(), 0.1)
        proc = wealth_process(strategy, m)
        assert np.all(proc.X[:, 0] == 0.0)
        np.testing.assert_allclose(proc.beta + proc.gamma * m.values[:, :-1], proc.X[:, :-1], atol=1e-12)
        np.testing.assert_allclose(proc.X[:, -1], terminal_wealth(strategy, m).terminal_wealth, atol=1e-12)

    def test_single_replicate(self, small_driver):
        m = MarketModel(mvn_path(small_driver, 0.75)).replicate(3)
        out = terminal_wealth(Strategy.adapted(QuadraticRule()), m, replicate_id=3)
        assert np.ndim(out.terminal_wealth) == 0 and out.replicate_id == 3

    @pytest.mark.slow
    def test_arbitrage_mean(self):
        grid = TimeGrid(1.0, 1024)
        m = MarketModel(circulant_path(0.75, grid, 21, np.arange(10_000)))
        X = terminal_wealth(Strategy.adapted(QuadraticRule()), m).terminal_wealth
        assert abs(X.mean() - 0.96875) < 3 * standard_error(X)

    @pytest.mark.slow
    @pytest.mark.parametrize("H", [0.5, 0.75])
    def test_delayed_mean_matches_oracle(self, H):
        grid = TimeGrid(1.0, 1024)
        strategy = Strategy.delayed(QuadraticRule(), 0.05)
        m = MarketModel(circulant_path(H, grid, 22, np.arange(10_000)))
        X = terminal_wealth(strategy, m).terminal_wealth
        oracle = closed_form_wealth_expectation(strategy, grid, H)
        assert abs(X.mean() - oracle) < 3 * standard_error(X), f"{X.mean():.5f} vs {oracle:.5f}"
