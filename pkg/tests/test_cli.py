"""
Tests for the command-line interface.
"""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from obedience.acceptance import SQUARE_EPSILON, SQUARE_MAP
from obedience.cli.main import EXIT_EVALUATION, EXIT_OK, EXIT_USAGE, cli, main
from obedience.recalibration import load_map


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def summary(run_dir):
    return json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))["summary"]


class TestHelp:
    """Usage text"""

    def test_group_lists_commands(self, runner):
        result = invoke(runner, "--help")
        assert result.exit_code == 0
        for command in ("filter", "sweep", "run", "fit-recal", "report", "synth-check"):
            assert command in result.output

    def test_run_lists_flags(self, runner):
        result = invoke(runner, "run", "--help")
        assert result.exit_code == 0
        for flag in ("--dataset", "--model", "--sweep", "--reminder", "--context", "--recal-map",
                     "--mode", "--held-out", "--unfiltered", "--out"):
            assert flag in result.output

    def test_missing_required_option(self, runner):
        result = runner.invoke(cli, ["run"])
        assert result.exit_code == EXIT_USAGE


class TestRun:
    """Evaluations on the synthetic oracle"""

    def test_baseline(self, runner, tmp_path, dataset_file):
        out = tmp_path / "baseline"
        result = invoke(runner, "run", "--mode", "baseline", "--dataset", dataset_file, "--out", out)
        assert result.exit_code == EXIT_OK
        stats = summary(out)
        assert stats["epsilon_obey"] == pytest.approx(SQUARE_EPSILON, abs=1e-6)
        assert stats["mode"] == "– – –"
        assert stats["flagged"] == 0
        assert (out / "results.jsonl").is_file()

    def test_full_strategy_fits_then_recalibrates(self, runner, tmp_path, dataset_file):
        out = tmp_path / "full"
        result = invoke(runner, "run", "--dataset", dataset_file, "--out", out, "--unfiltered")
        assert result.exit_code == EXIT_OK
        stats = summary(out)
        assert stats["mode"] == "✓ ✓ ✓"
        assert stats["epsilon_obey"] < SQUARE_EPSILON
        assert load_map(out / "recalibration.csv").expressed == pytest.approx(SQUARE_MAP)

    def test_sweep_with_saved_map(self, runner, tmp_path, dataset_file):
        invoke(runner, "run", "--dataset", dataset_file, "--out", tmp_path / "full", "--unfiltered")
        out = tmp_path / "recal"
        result = invoke(runner, "sweep", "--dataset", dataset_file, "--out", out, "--unfiltered",
                        "--recal-map", tmp_path / "full" / "recalibration.csv")
        assert result.exit_code == EXIT_OK
        assert summary(out)["epsilon_obey"] == pytest.approx(0.0448, abs=1e-6)

    def test_unknown_synthetic_model(self, runner, tmp_path, dataset_file):
        result = runner.invoke(cli, ["run", "--dataset", str(dataset_file), "--out", str(tmp_path / "x"),
                                     "--model", "synthetic:cubic"])
        assert result.exit_code == EXIT_USAGE

    def test_environment_supplies_model(self, runner, tmp_path, dataset_file, monkeypatch):
        monkeypatch.setenv("OBEDIENCE_MODEL", "synthetic:identity")
        out = tmp_path / "identity"
        invoke(runner, "run", "--mode", "baseline", "--dataset", dataset_file, "--out", out, "--unfiltered")
        stats = summary(out)
        assert stats["backend"] == "synthetic:identity"
        assert stats["epsilon_obey"] == pytest.approx(0.0, abs=1e-9)


class TestConfigFile:
    """Run settings from --config"""

    @pytest.fixture
    def config_file(self, tmp_path):
        path = tmp_path / "obedience.conf"
        path.write_text("sweep = 0,50,100\nreminder = self\ncontext = simplified\nunfiltered = true\n",
                        encoding="utf-8")
        return path

    def manifest(self, run_dir):
        return json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))

    def test_config_supplies_run_settings(self, runner, tmp_path, dataset_file, config_file):
        out = tmp_path / "configured"
        result = invoke(runner, "--config", config_file, "sweep", "--dataset", dataset_file, "--out", out)
        assert result.exit_code == EXIT_OK
        manifest = self.manifest(out)
        assert manifest["config"]["sweep"] == [0.0, 0.5, 1.0]
        assert manifest["flags"]["unfiltered"] is True
        assert summary(out)["mode"] == "✓ – ✓"

    def test_flags_override_config(self, runner, tmp_path, dataset_file, config_file):
        out = tmp_path / "flagged"
        invoke(runner, "--config", config_file, "sweep", "--dataset", dataset_file, "--out", out,
               "--sweep", "0,100", "--reminder", "none")
        assert self.manifest(out)["config"]["sweep"] == [0.0, 1.0]
        assert summary(out)["mode"] == "– – ✓"

    def test_bad_configured_reminder(self, runner, tmp_path, dataset_file):
        path = tmp_path / "bad.conf"
        path.write_text("reminder = sometimes\n", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(path), "sweep", "--dataset", str(dataset_file),
                                     "--out", str(tmp_path / "x")])
        assert result.exit_code == EXIT_USAGE


class TestFitRecal:
    """Fitting maps from stored sweeps"""

    @pytest.fixture
    def sweep_dir(self, runner, tmp_path, dataset_file):
        out = tmp_path / "sweep"
        assert invoke(runner, "sweep", "--dataset", dataset_file, "--out", out).exit_code == EXIT_OK
        return out

    def test_pooled_map(self, runner, tmp_path, sweep_dir):
        result = invoke(runner, "fit-recal", "--results", sweep_dir, "--out", tmp_path / "map.csv")
        assert result.exit_code == EXIT_OK
        assert "all: 0->0 0.2->0.4 0.4->0.6 0.6->0.8 0.8->0.8 1->1" in result.output
        assert load_map(tmp_path / "map.csv").expressed == pytest.approx(SQUARE_MAP)
        assert "(identity)" not in result.output

    def test_identity_oracle_fits_identity_map(self, runner, tmp_path, dataset_file, monkeypatch):
        monkeypatch.setenv("OBEDIENCE_MODEL", "synthetic:identity")
        out = tmp_path / "identity"
        invoke(runner, "sweep", "--dataset", dataset_file, "--out", out)
        result = invoke(runner, "fit-recal", "--results", out, "--out", tmp_path / "map.csv")
        assert result.exit_code == EXIT_OK
        assert "all: 0->0 0.2->0.2 0.4->0.4 0.6->0.6 0.8->0.8 1->1 (identity)" in result.output

    def test_held_out_needs_two_categories(self, runner, tmp_path, sweep_dir):
        result = runner.invoke(cli, ["fit-recal", "--results", str(sweep_dir), "--held-out",
                                     "--out", str(tmp_path / "maps")])
        assert result.exit_code == EXIT_USAGE


class TestFilter:
    """Retrieval filter"""

    def test_reports_rates(self, runner, tmp_path, dataset_file):
        out = tmp_path / "filter.json"
        result = invoke(runner, "filter", "--dataset", dataset_file, "--out", out)
        assert result.exit_code == EXIT_OK
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["rates"] == {"synthetic:square": 100.0}
        assert len(report["survivors"]) == 10


class TestReport:
    """Report from stored runs"""

    def test_ablation_table(self, runner, tmp_path, dataset_file):
        for name, extra in (("baseline", ("--mode", "baseline")), ("full", ())):
            invoke(runner, "run", "--dataset", dataset_file, "--out", tmp_path / name, "--unfiltered", *extra)
        out = tmp_path / "report"
        result = invoke(runner, "report", "--run", tmp_path / "baseline", "--run", tmp_path / "full",
                        "--dataset", dataset_file, "--out", out)
        assert result.exit_code == EXIT_OK
        table = pd.read_csv(out / "ablation.csv", index_col="mode")
        assert list(table.index) == ["– – –", "✓ ✓ ✓"]
        assert table.loc["– – –", "synthetic:square"] == pytest.approx(0.13)
        assert table.loc["✓ ✓ ✓", "synthetic:square"] < table.loc["– – –", "synthetic:square"]
        assert (out / "baseline" / "curves.csv").is_file()
        assert (out / "baseline" / "curves_correct.csv").is_file()
        assert (out / "full" / "recalibration.svg").is_file()


class TestExplainedPrior:
    """Explained-prior runs keep samples whose two priors agree"""

    def test_summary_counts_agreeing_samples(self, runner, tmp_path, dataset_file):
        out = tmp_path / "explained"
        result = invoke(runner, "sweep", "--reminder", "explained", "--dataset", dataset_file, "--out", out,
                        "--unfiltered")
        assert result.exit_code == EXIT_OK
        stats = summary(out)
        assert stats["same_answer"] == stats["samples"] == 10
        assert stats["epsilon_obey"] == pytest.approx(SQUARE_EPSILON, abs=1e-6)

    def test_report_drops_disagreeing_samples(self, runner, tmp_path, dataset_file):
        out = tmp_path / "explained"
        invoke(runner, "sweep", "--reminder", "explained", "--dataset", dataset_file, "--out", out, "--unfiltered")
        results_path = out / "results.jsonl"
        rows = [json.loads(line) for line in results_path.read_text(encoding="utf-8").splitlines()]
        rows[0]["reminder_text"] = "Lyon\nIt is the larger city."
        results_path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")

        report = tmp_path / "report"
        assert invoke(runner, "report", "--run", out, "--out", report).exit_code == EXIT_OK
        curves = pd.read_csv(report / "explained" / "curves.csv")
        assert set(curves["n"]) == {9}


class TestSynthCheck:
    """Synthetic acceptance suite"""

    def test_passes(self, runner):
        result = invoke(runner, "synth-check")
        assert result.exit_code == EXIT_OK
        assert "FAIL" not in result.output

    def test_main_returns_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["synth-check"]) == EXIT_OK
        assert main(["fit-recal", "--results", str(tmp_path), "--out", str(tmp_path / "m.csv")]) != EXIT_OK

    def test_failed_check_exits_nonzero(self, runner, mocker):
        from obedience.acceptance import CheckResult

        mocker.patch("obedience.acceptance.run_acceptance",
                     return_value=[CheckResult("square epsilon", False, "got 0.2")])
        result = invoke(runner, "synth-check")
        assert result.exit_code == EXIT_EVALUATION
        assert "FAIL  square epsilon  (got 0.2)" in result.output
