import json

import numpy as np
import pandas as pd
import pytest

from fbmlab.config.loader import ExperimentConfig
from fbmlab.experiments.report import config_checksum
from fbmlab.fbm import kernels
from fbmlab.fbm.driver import sample_driver
from fbmlab.fbm.grid import TimeGrid
from fbmlab.harness import cli
from fbmlab.harness.smoke import CHECKS, run_smoke_suite

SMALL_ARBITRAGE = """\
kind: arbitrage
H: [0.5, 0.75]
steps: [32]
replicates: 200
seed: 3
batch_size: 50
thresholds:
  pass_se: 8.0
  fail_se: 9.0
"""


def read_path(path):
    return pd.read_csv(path, float_precision="round_trip")


def write_config(tmp_path, text=SMALL_ARBITRAGE, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestSimulate:
    def test_brownian_path_is_the_driver_sum(self, tmp_path):
        code = cli.main(["simulate", "--h", "0.5", "--n", "8", "--t", "1", "--seed", "7", "--count", "1", "--out", str(tmp_path)])
        assert code == cli.EXIT_OK
        frame = read_path(tmp_path / "path_0000.csv")
        assert list(frame.columns) == ["t", "value"]
        driver = sample_driver(TimeGrid(1.0, 8), 0.0, 7, 0)
        np.testing.assert_allclose(frame["value"], driver.running_sum(), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(frame["t"], np.arange(9) / 8)

    def test_same_command_same_files(self, tmp_path):
        for out in ("a", "b"):
            args = ["simulate", "--h", "0.75", "--n", "32", "--seed", "4", "--count", "2", "--out", str(tmp_path / out)]
            assert cli.main(args) == cli.EXIT_OK
        for name in ("path_0000.csv", "path_0001.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert (tmp_path / "a" / "path_0000.csv").read_bytes() != (tmp_path / "a" / "path_0001.csv").read_bytes()

    @pytest.mark.parametrize("generator", ["cholesky", "circulant"])
    def test_exact_generators(self, tmp_path, generator):
        args = ["simulate", "--h", "0.9", "--n", "16", "--generator", generator, "--out", str(tmp_path)]
        assert cli.main(args) == cli.EXIT_OK
        assert read_path(tmp_path / "path_0000.csv")["value"].iloc[0] == 0.0

    def test_explicit_history(self, tmp_path):
        args = ["simulate", "--h", "0.75", "--n", "16", "--l", "2", "--out", str(tmp_path)]
        assert cli.main(args) == cli.EXIT_OK

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FBMLAB_OUTPUT_DIR", str(tmp_path))
        assert cli.main(["simulate", "--h", "0.6", "--n", "8"]) == cli.EXIT_OK
        assert (tmp_path / "paths" / "path_0000.csv").exists()

    @pytest.mark.parametrize(
        "args",
        [
            ["--h", "1.2", "--n", "8"],
            ["--h", "0.75", "--n", "0"],
            ["--h", "0.75", "--n", "8", "--l", "0.3"],
            ["--h", "0.75", "--n", "8", "--count", "0"],
        ],
    )
    def test_invalid_flags(self, tmp_path, capsys, args):
        assert cli.main(["simulate", *args, "--out", str(tmp_path)]) == cli.EXIT_CONFIG
        assert "error" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["simulate", "--h", "0.5", "--n", "8", "--out", str(blocker / "sub")]) != 0


class TestExperiment:
    def test_writes_report_manifest_and_tables(self, tmp_path):
        out = tmp_path / "out"
        code = cli.main(["experiment", "arbitrage", "--config", str(write_config(tmp_path)), "--out", str(out)])
        assert code == cli.EXIT_OK
        names = sorted(p.name for p in out.iterdir())
        assert names == [
            "arbitrage_gain_probability.csv",
            "arbitrage_loss_probability.csv",
            "arbitrage_mean_wealth.csv",
            "arbitrage_report.json",
            "manifest.json",
        ]
        report = json.loads((out / "arbitrage_report.json").read_text())
        manifest = json.loads((out / "manifest.json").read_text())
        cfg = ExperimentConfig.from_dict(report["config"])
        assert manifest["config_checksum"] == config_checksum(cfg.dict())
        assert len(manifest["outputs"]["arbitrage"]) == 4
        assert [c["H"] for c in manifest["truncation"]] == [0.75]
        assert manifest["truncation"][0]["passed"] is True
        assert manifest["truncation"][0]["predicted"] <= manifest["truncation"][0]["bound"]
        assert report["schema_version"] == 1

    def test_thread_budget_does_not_change_tables(self, tmp_path):
        config = str(write_config(tmp_path))
        for threads in ("1", "4"):
            args = ["experiment", "arbitrage", "--config", config, "--threads", threads, "--out", str(tmp_path / threads)]
            assert cli.main(args) == cli.EXIT_OK
        for csv in (tmp_path / "1").glob("*.csv"):
            assert csv.read_bytes() == (tmp_path / "4" / csv.name).read_bytes()

    def test_verdict_failure_exit_code(self, tmp_path):
        # a 1e-6 SE band cannot hold any Monte Carlo mean
        text = SMALL_ARBITRAGE.replace("pass_se: 8.0", "pass_se: 1.0e-6").replace("fail_se: 9.0", "fail_se: 1.0e+6")
        code = cli.main(["experiment", "arbitrage", "--config", str(write_config(tmp_path, text)), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_VERDICT

    def test_hard_breach_exit_code(self, tmp_path):
        text = SMALL_ARBITRAGE.replace("pass_se: 8.0", "pass_se: 1.0e-7").replace("fail_se: 9.0", "fail_se: 1.0e-6")
        code = cli.main(["experiment", "arbitrage", "--config", str(write_config(tmp_path, text)), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_NUMERICAL

    def test_eps_below_step_rejected(self, tmp_path, capsys):
        text = "kind: delay-gap\nH: [0.75]\nsteps: [1024]\neps: [0.0005]\nreplicates: 100\n"
        out = tmp_path / "o"
        code = cli.main(["experiment", "delay-gap", "--config", str(write_config(tmp_path, text)), "--out", str(out)])
        assert code == cli.EXIT_CONFIG
        assert "eps[0]: eps=0.0005 is smaller than the grid step" in capsys.readouterr().err
        assert not out.exists()

    def test_kind_mismatch(self, tmp_path):
        code = cli.main(["experiment", "continuity", "--config", str(write_config(tmp_path))])
        assert code == cli.EXIT_CONFIG

    def test_adapted_member_is_a_config_error(self, tmp_path, capsys):
        text = (
            "kind: no-arbitrage\nH: [0.75]\nsteps: [64]\nreplicates: 400\n"
            "family:\n"
            "  - {name: arb, kind: adapted, rule: quadratic}\n"
        )
        out = tmp_path / "o"
        code = cli.main(["experiment", "no-arbitrage", "--config", str(write_config(tmp_path, text)), "--out", str(out)])
        assert code == cli.EXIT_CONFIG
        assert "family[0].kind" in capsys.readouterr().err
        assert not out.exists()

    def test_lookahead_member_aborts_and_leaves_nothing(self, tmp_path, capsys):
        text = (
            "kind: no-arbitrage\nH: [0.75]\nsteps: [32]\nreplicates: 100\n"
            "family:\n"
            "  - {name: dq, kind: delayed, rule: quadratic, eps: 0.25}\n"
            "  - {name: peek, kind: delayed, rule: lookahead, eps: 0.25}\n"
        )
        out = tmp_path / "o"
        out.mkdir()
        (out / "keep.txt").write_text("earlier run")
        code = cli.main(["experiment", "no-arbitrage", "--config", str(write_config(tmp_path, text)), "--out", str(out)])
        assert code == cli.EXIT_CONFIG
        assert "peek" in capsys.readouterr().err
        assert [p.name for p in out.iterdir()] == ["keep.txt"]

    def test_partial_outputs_removed(self, tmp_path):
        out = tmp_path / "o"
        out.mkdir()
        (out / "old.csv").write_text("x")
        before = set(out.rglob("*"))
        (out / "new.csv").write_text("y")
        (out / "sub").mkdir()
        (out / "sub" / "new.json").write_text("{}")
        cli._remove_new_outputs(out, before)
        assert [p.name for p in out.iterdir()] == ["old.csv"]

    def test_created_parents_removed(self, tmp_path):
        out = tmp_path / "a" / "b" / "o"
        created = cli._missing_dirs(out)
        assert created == [out, out.parent, out.parent.parent]
        out.mkdir(parents=True)
        (out / "new.csv").write_text("y")
        cli._remove_new_outputs(out, None, created)
        assert list(tmp_path.iterdir()) == []

    def test_failed_run_removes_created_parents(self, tmp_path):
        text = (
            "kind: no-arbitrage\nH: [0.75]\nsteps: [32]\nreplicates: 100\n"
            "family:\n"
            "  - {name: peek, kind: delayed, rule: lookahead, eps: 0.25}\n"
        )
        config = write_config(tmp_path, text)
        out = tmp_path / "runs" / "today" / "o"
        code = cli.main(["experiment", "no-arbitrage", "--config", str(config), "--out", str(out)])
        assert code == cli.EXIT_CONFIG
        assert not (tmp_path / "runs").exists()

    @pytest.mark.slow
    def test_default_arbitrage_contains_headline_cell(self, tmp_path):
        code = cli.main(["experiment", "arbitrage", "--out", str(tmp_path)])
        assert code in (cli.EXIT_OK, cli.EXIT_VERDICT)
        table = pd.read_csv(tmp_path / "arbitrage_mean_wealth.csv")
        cell = table[(table["H"] == 0.75) & (table["N"] == 1024)].iloc[0]
        assert cell["oracle"] == pytest.approx(0.96875, rel=1e-10)
        assert cell["verdict"] == "pass"


class TestValidate:
    def test_fresh_checkout_passes(self, capsys):
        assert cli.main(["validate"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == len(CHECKS)
        assert all(line.startswith("[validate] PASS") for line in lines)

    def test_corrupted_normalization_is_named(self, monkeypatch, capsys):
        original = kernels.ch_coefficient
        monkeypatch.setattr(kernels, "ch_coefficient", lambda H: 1.2 * original(H))
        assert cli.main(["validate"]) == cli.EXIT_NUMERICAL
        assert "[validate] FAIL normalization" in capsys.readouterr().out

    def test_results_do_not_depend_on_threads(self, monkeypatch):
        monkeypatch.setenv("FBMLAB_THREADS", "1")
        first = [r.passed for r in run_smoke_suite()]
        monkeypatch.setenv("FBMLAB_THREADS", "8")
        assert [r.passed for r in run_smoke_suite()] == first
