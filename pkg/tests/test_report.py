"""
Tests for aggregation, tables, heatmaps and report emission.
"""

import json
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from obedience.acceptance import SQUARE_EPSILON, SQUARE_MAP
from obedience.errors import ContractError
from obedience.pipeline import SampleResult
from obedience.prob import CertaintySweep, ObedienceRecord, obedience_error
from obedience.prompts import PromptRenderer
from obedience.recalibration import RecalibrationMap
from obedience.report import (
    ABS_ERROR_HEADER,
    AVERAGE_COLUMN,
    CURVE_HEADER,
    HEATMAP_HEADER,
    MAP_HEADER,
    ablation_table,
    aggregate,
    bin_index,
    build_manifest,
    emit,
    heatmap,
    ideal_similarities,
    round2,
    split_by_correctness,
    write_manifest,
)

# ablation rows as published per model, two decimals
ABLATION_ROWS = {
    "– – –": (0.48, 0.49, 0.51, 0.70, 0.46, 0.51, 0.48, 0.50),
    "✓ – –": (0.38, 0.41, 0.51, 0.72, 0.33, 0.48, 0.33, 0.48),
    "✓ ✓ –": (0.30, 0.34, 0.50, 0.67, 0.32, 0.46, 0.29, 0.48),
    "✓ – ✓": (0.29, 0.37, 0.50, 0.56, 0.37, 0.37, 0.38, 0.49),
    "✓ ✓ ✓": (0.28, 0.34, 0.49, 0.57, 0.31, 0.35, 0.29, 0.47),
}
MODELS = [f"model-{i}" for i in range(1, 9)]


def make_result(sample_id, deviation, self_confidence=0.5, prior_answer_mass=0.2, sweep=None):
    sweep = sweep or CertaintySweep()
    deviation = tuple(float(d) for d in deviation)
    sim_ctx, sim_prior = ideal_similarities(sweep, prior_answer_mass)
    record = ObedienceRecord(
        sweep=sweep,
        sim_to_context=tuple(sim_ctx),
        sim_to_prior=tuple(sim_prior),
        deviation=deviation,
        epsilon_obey=obedience_error(list(zip(sweep.grid, deviation))),
    )
    return SampleResult(sample_id=sample_id, category="Locations", expressed=sweep.grid, record=record,
                        self_confidence=self_confidence, prior_answer_mass=prior_answer_mass)


def flagged_result(sample_id):
    return SampleResult(sample_id=sample_id, diagnostics=("degenerate trace at step 1",))


@pytest.fixture
async def square_results(pipeline, samples):
    return await pipeline.run_dataset(samples)


class TestAggregate:
    """Mean curves over a result set"""

    async def test_square_oracle_curves(self, square_results):
        curves = aggregate(square_results)
        assert curves.n == 10
        assert curves.excluded == ()
        assert curves.epsilon_obey == pytest.approx(SQUARE_EPSILON, abs=1e-9)
        assert curves.ideal_ctx[0] == pytest.approx(0.2)
        assert curves.ideal_prior[0] == pytest.approx(1.0)
        assert curves.ideal_ctx[-1] == pytest.approx(1.0)

    def test_epsilon_of_mean_curve_is_mean_epsilon(self):
        rng = np.random.default_rng(3)
        results = [make_result(f"s{i}", rng.random(6), prior_answer_mass=float(rng.random())) for i in range(12)]
        curves = aggregate(results)
        assert curves.epsilon_obey == pytest.approx(curves.mean_epsilon, abs=1e-12)

    def test_absolute_errors_do_not_cancel(self):
        shift = 0.1

        def shifted(sample_id, delta):
            result = make_result(sample_id, [0.0] * 6)
            record = replace(result.record, sim_to_context=tuple(
                min(1.0, max(0.0, v + delta)) for v in result.record.sim_to_context))
            return replace(result, record=record)

        curves = aggregate([shifted("above", shift), shifted("below", -shift)])
        # at c=0.4 neither side is clipped
        assert curves.sim_ctx[2] == pytest.approx(curves.ideal_ctx[2])
        assert curves.abs_ctx_error[2] == pytest.approx(shift)

    def test_flagged_results_are_excluded(self):
        results = [make_result("a", [0.1] * 6), flagged_result("b"), make_result("c", [0.3] * 6)]
        curves = aggregate(results)
        assert curves.sample_ids == ("a", "c")
        assert curves.excluded == ("b",)
        assert curves.deviation == pytest.approx((0.2,) * 6)

    def test_empty_set(self):
        with pytest.raises(ContractError):
            aggregate([])

    def test_all_flagged(self):
        with pytest.raises(ContractError):
            aggregate([flagged_result("a"), flagged_result("b")])

    def test_sweeps_must_match(self):
        coarse = CertaintySweep((0.0, 0.5, 1.0))
        with pytest.raises(ContractError):
            aggregate([make_result("a", [0.1] * 6), make_result("b", [0.1] * 3, sweep=coarse)])

    async def test_split_by_correctness(self, square_results, samples):
        correct, wrong = split_by_correctness(square_results, samples)
        assert correct.n == wrong.n == 5
        assert set(correct.sample_ids) == {s.id for s in samples if s.context_is_correct}

    async def test_split_with_empty_side(self, square_results, samples):
        correct_only = [s for s in samples if s.context_is_correct]
        correct, wrong = split_by_correctness(square_results, correct_only)
        assert correct.n == 5
        assert wrong is None


class TestAblationTable:
    """Two-decimal tables with an average column"""

    def test_published_averages(self):
        runs = {label: dict(zip(MODELS, row)) for label, row in ABLATION_ROWS.items()}
        table = ablation_table(runs)
        assert list(table.columns) == MODELS + [AVERAGE_COLUMN]
        assert list(table.index) == list(ABLATION_ROWS)
        assert table.index.name == "mode"
        assert list(table[AVERAGE_COLUMN]) == [0.52, 0.46, 0.42, 0.42, 0.39]
        assert table.loc["✓ ✓ ✓", "model-1"] == 0.28

    @pytest.mark.parametrize("value,expected", [(0.455, 0.46), (0.3875, 0.39), (0.125, 0.13), (0.41625, 0.42)])
    def test_round_half_up(self, value, expected):
        assert round2(value) == expected

    async def test_curves_cells(self, square_results):
        curves = aggregate(square_results)
        table = ablation_table({"– – –": {"synthetic:square": curves}})
        assert table.loc["– – –", "synthetic:square"] == 0.13
        assert table.loc["– – –", AVERAGE_COLUMN] == 0.13

    def test_sample_sets_must_match(self):
        first = aggregate([make_result("a", [0.1] * 6)])
        second = aggregate([make_result("b", [0.1] * 6)])
        with pytest.raises(ContractError):
            ablation_table({"– – –": {"m": first}, "✓ – –": {"m": second}})

    def test_every_row_needs_every_backend(self):
        with pytest.raises(ContractError):
            ablation_table({"– – –": {"a": 0.5, "b": 0.4}, "✓ – –": {"a": 0.3}})

    def test_no_runs(self):
        with pytest.raises(ContractError):
            ablation_table({})


class TestHeatmap:
    """Deviation binned by self-confidence and certainty"""

    @pytest.mark.parametrize("value,expected", [(0.0, 0), (0.19, 0), (0.2, 1), (0.79, 3), (0.8, 4), (1.0, 4)])
    def test_bin_edges(self, value, expected):
        assert bin_index(value) == expected

    def test_top_certainties_share_last_column(self):
        deviation = [0.0, 0.0, 0.0, 0.0, 0.2, 0.4]
        grid = heatmap([make_result("a", deviation, self_confidence=0.5)])
        assert grid.counts[2] == (1, 1, 1, 1, 2)
        assert grid.means[2][4] == pytest.approx(0.3)

    def test_diagonal_ridge(self):
        sweep = CertaintySweep()
        results = []
        for i, confidence in enumerate((0.05, 0.25, 0.45, 0.65, 0.85)):
            deviation = [1.0 - abs(c - confidence) for c in sweep.grid]
            results.append(make_result(f"s{i}", deviation, self_confidence=confidence))
        grid = heatmap(results)
        assert grid.shape == (5, 5)
        assert [grid.row_argmax(i) for i in range(5)] == [0, 1, 2, 3, 4]

    def test_single_bin(self):
        results = [make_result(f"s{i}", [0.1 * i] * 6, self_confidence=1.0) for i in range(3)]
        grid = heatmap(results)
        assert [sum(row) for row in grid.counts] == [0, 0, 0, 0, 18]
        assert grid.counts[4] == (3, 3, 3, 3, 6)
        assert grid.means[4][0] == pytest.approx(0.1)
        assert grid.means[0][0] is None
        assert grid.row_argmax(0) is None

    def test_flagged_results_skipped(self):
        grid = heatmap([make_result("a", [0.2] * 6, self_confidence=0.3), flagged_result("b")])
        assert sum(sum(row) for row in grid.counts) == 6

    def test_needs_unflagged_results(self):
        with pytest.raises(ContractError):
            heatmap([flagged_result("a")])

    def test_needs_self_confidence(self):
        with pytest.raises(ContractError):
            heatmap([make_result("a", [0.2] * 6, self_confidence=None)])


class TestEmit:
    """Tables with fixed headers and figures beside them"""

    def header(self, path):
        return tuple(path.read_text(encoding="utf-8").splitlines()[0].split(","))

    async def test_curves(self, tmp_path, square_results):
        paths = emit(aggregate(square_results), tmp_path / "baseline")
        assert [p.name for p in paths] == ["baseline.csv", "baseline_abs.csv", "baseline.svg"]
        assert self.header(paths[0]) == CURVE_HEADER
        assert self.header(paths[1]) == ABS_ERROR_HEADER
        frame = pd.read_csv(paths[0])
        assert np.allclose(frame["certainty"], CertaintySweep().grid)
        assert paths[2].read_text(encoding="utf-8").startswith("<svg")

    async def test_reruns_are_byte_identical(self, tmp_path, square_results):
        curves = aggregate(square_results)
        first = emit(curves, tmp_path / "a" / "curves.csv")
        second = emit(curves, tmp_path / "b" / "curves.csv")
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes()

    def test_table(self, tmp_path):
        table = ablation_table({label: dict(zip(MODELS, row)) for label, row in ABLATION_ROWS.items()})
        (path,) = emit(table, tmp_path / "ablation")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(["mode"] + MODELS + [AVERAGE_COLUMN])
        assert lines[1] == "– – –,0.48,0.49,0.51,0.70,0.46,0.51,0.48,0.50,0.52"

    def test_heatmap(self, tmp_path):
        grid = heatmap([make_result("a", [0.2] * 6, self_confidence=0.3)])
        csv_path, svg_path = emit(grid, tmp_path / "heatmap")
        assert self.header(csv_path) == HEATMAP_HEADER
        assert len(pd.read_csv(csv_path)) == 25
        assert svg_path.suffix == ".svg"

    def test_map(self, tmp_path, sweep):
        csv_path, _ = emit(RecalibrationMap(sweep, SQUARE_MAP), tmp_path / "map")
        assert self.header(csv_path) == MAP_HEADER
        assert tuple(pd.read_csv(csv_path)["expressed"]) == pytest.approx(SQUARE_MAP)

    def test_unknown_artifact(self, tmp_path):
        with pytest.raises(ContractError):
            emit({"not": "an artifact"}, tmp_path / "x")


class TestManifest:
    """Run manifests"""

    def test_contents(self, tmp_path, dataset_file):
        manifest = build_manifest(
            {"sweep": [0.0, 1.0]},
            command="run",
            flags={"mode": "baseline"},
            backend_identity="synthetic:square",
            dataset_path=dataset_file,
            started_at="2025-01-01T00:00:00+00:00",
        )
        assert manifest["command"] == "run"
        assert manifest["backend"] == "synthetic:square"
        assert manifest["system_prompt"] == "none"
        assert len(manifest["dataset"]["sha256"]) == 64
        assert manifest["templates"] == PromptRenderer().template_hashes()

        path = write_manifest(manifest, tmp_path / "manifest.json")
        assert json.loads(path.read_text(encoding="utf-8")) == manifest

    def test_without_dataset(self):
        manifest = build_manifest({}, command="synth-check", flags={}, backend_identity="synthetic:identity")
        assert manifest["dataset"] == {"path": None, "sha256": None}
        assert manifest["finished_at"]
