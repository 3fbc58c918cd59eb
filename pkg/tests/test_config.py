from pathlib import Path

import pytest

from fbmlab.config import CONFIG_DIR
from fbmlab.config.loader import EXPERIMENT_KINDS, ExperimentConfig, resolve_output_dir
from fbmlab.errors import ConfigError
from fbmlab.experiments.report import config_checksum


def base(**overrides):
    data = {"kind": "arbitrage", "H": [0.75], "steps": [64], "replicates": 200}
    data.update(overrides)
    return data


class TestDefaults:
    @pytest.mark.parametrize("kind", EXPERIMENT_KINDS)
    def test_packaged_config_loads(self, kind):
        cfg = ExperimentConfig.default(kind)
        assert cfg.kind == kind
        assert cfg.replicates == 10_000
        assert (CONFIG_DIR / f"{kind.replace('-', '_')}.yaml").exists()

    def test_no_arbitrage_family(self):
        names = [s.name for s in ExperimentConfig.default("no-arbitrage").strategies()]
        assert "delayed-quadratic-0.05" in names and "zero" in names

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            ExperimentConfig.default("hedging")

    @pytest.mark.parametrize("kind", EXPERIMENT_KINDS)
    def test_echo_reloads(self, kind):
        cfg = ExperimentConfig.default(kind)
        again = ExperimentConfig.from_dict(cfg.dict())
        assert again == cfg
        assert config_checksum(again.dict()) == config_checksum(cfg.dict())


class TestValidation:
    def test_required_keys(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict({"kind": "arbitrage"})
        assert info.value.errors == ["H: required", "steps: required"]

    def test_eps_below_step(self):
        with pytest.raises(ConfigError, match=r"eps\[0\]: eps=0.0005 is smaller than the grid step"):
            ExperimentConfig.from_dict(base(kind="delay-gap", steps=[1024], eps=[0.0005]))

    def test_every_problem_listed(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(base(H=[0.4, 0.75], replicates=50, seed=-1, bogus=1))
        assert info.value.errors == ["unknown keys ['bogus']"]

        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(base(H=[0.4, 0.75], replicates=50, seed=-1))
        joined = "; ".join(info.value.errors)
        assert "H[0]: must lie in [0.5, 1)" in joined
        assert "replicates: must be at least 100" in joined
        assert "seed: expected a nonnegative integer" in joined

    def test_steps_must_nest_for_arbitrage(self):
        with pytest.raises(ConfigError, match=r"steps\[0\]: 48 does not divide"):
            ExperimentConfig.from_dict(base(steps=[48, 64]))

    @pytest.mark.parametrize("kind", ["continuity", "delay-gap", "no-arbitrage"])
    def test_single_grid_kinds_reject_extra_steps(self, kind):
        with pytest.raises(ConfigError, match=rf"steps: the {kind} experiment runs on one grid"):
            ExperimentConfig.from_dict(base(kind=kind, steps=[64, 128], eps=[0.125]))

    def test_continuity_takes_one_delay(self):
        with pytest.raises(ConfigError, match=r"eps: the continuity experiment takes one delay"):
            ExperimentConfig.from_dict(base(kind="continuity", eps=[0.125, 0.25]))

    def test_sections(self):
        with pytest.raises(ConfigError, match="market.sigma"):
            ExperimentConfig.from_dict(base(market={"sigma": 0}))
        with pytest.raises(ConfigError, match=r"thresholds: unknown keys \['strict'\]"):
            ExperimentConfig.from_dict(base(thresholds={"strict": True}))
        with pytest.raises(ConfigError, match="pass_se < fail_se"):
            ExperimentConfig.from_dict(base(thresholds={"pass_se": 5.0}))

    @pytest.mark.parametrize(
        "member, message",
        [
            ({"name": "m", "kind": "delayed", "rule": "greedy", "eps": 0.1}, r"family\[0\].rule"),
            ({"name": "m", "kind": "delayed", "rule": "sign"}, r"family\[0\].eps: required"),
            ({"name": "arb", "kind": "adapted", "rule": "quadratic"}, r"family\[0\].kind: family members must be delayed or piecewise"),
            ({"name": "m", "kind": "piecewise", "rule": "sign", "eps": 0.5, "rebalance": [0, 0.75]}, r"family\[0\]:"),
            ({"name": "m", "kind": "delayed", "rule": "momentum", "eps": 0.1, "params": {"window": 2}}, "bad parameters"),
            ({"kind": "delayed", "rule": "sign", "eps": 0.1}, r"family\[0\]: missing \['name'\]"),
        ],
    )
    def test_family_members(self, member, message):
        with pytest.raises(ConfigError, match=message):
            ExperimentConfig.from_dict(base(kind="no-arbitrage", family=[member]))

    def test_duplicate_member_names(self):
        member = {"name": "m", "kind": "delayed", "rule": "sign", "eps": 0.125}
        with pytest.raises(ConfigError, match="duplicate name"):
            ExperimentConfig.from_dict(base(kind="no-arbitrage", family=[member, member]))

    def test_replace_validates(self):
        cfg = ExperimentConfig.from_dict(base())
        assert cfg.replace(seed=9).seed == 9
        with pytest.raises(ConfigError):
            cfg.replace(replicates=10)


class TestYaml:
    def test_from_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("kind: continuity\nH: [0.6]\nsteps: [128]\neps: 0.0625\nreplicates: 100\n")
        cfg = ExperimentConfig.from_yaml(path)
        assert cfg.eps == (0.0625,) and cfg.grids()[0].N == 128

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("kind: [arbitrage\n")
        with pytest.raises(ConfigError, match="invalid YAML"):
            ExperimentConfig.from_yaml(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            ExperimentConfig.from_yaml(tmp_path / "absent.yaml")


class TestOutputDir:
    def test_precedence(self, monkeypatch, tmp_path):
        monkeypatch.delenv("FBMLAB_OUTPUT_DIR", raising=False)
        cfg = ExperimentConfig.from_dict(base())
        assert resolve_output_dir(cfg) == Path("results") / "arbitrage"
        with_output = cfg.replace(output="elsewhere")
        assert resolve_output_dir(with_output) == Path("elsewhere")
        monkeypatch.setenv("FBMLAB_OUTPUT_DIR", str(tmp_path))
        assert resolve_output_dir(with_output) == tmp_path / "arbitrage"
        assert resolve_output_dir(with_output, tmp_path / "flag") == tmp_path / "flag"
