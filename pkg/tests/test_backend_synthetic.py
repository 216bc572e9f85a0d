"""
Tests for the synthetic oracle backend.
"""

import math

import pytest

from obedience.backend import (
    BUILTIN_SPECS,
    SyntheticBackend,
    SyntheticModelSpec,
    apply_stop,
    build_backend,
    cap_tokens,
    synthetic_observed,
)
from obedience.core.config import ANSWER_PARAMS, EXPLAINED_PARAMS, BackendConfig, GenerationParams
from obedience.errors import ContractError, EmptyGenerationError
from obedience.prompts import PromptMode, render_extract, render_main, render_prior, render_summarize

QUESTION = "Which city hosts the archive?"
CONTEXT = "The archive is kept in Lyon, according to the registry."


def main_prompt(c):
    return render_main(QUESTION, CONTEXT, c, PromptMode()).text


class TestSyntheticModelSpec:
    """Distortions and validation"""

    def test_square_observed_at_midpoint(self, square_spec):
        observed = synthetic_observed(square_spec, "Lyon", 0.5)
        assert observed.outcomes == ("Paris", "Lyon")
        assert observed.masses == pytest.approx((0.6, 0.4), abs=1e-12)

    def test_piecewise_interpolates(self):
        spec = SyntheticModelSpec.from_mapping(
            {"Paris": 0.8, "Lyon": 0.2}, "piecewise", [(0.0, 0.0), (0.5, 0.1), (1.0, 1.0)]
        )
        assert spec.distort(0.25) == pytest.approx(0.05)
        assert spec.distort(0.75) == pytest.approx(0.55)

    def test_piecewise_must_fix_endpoints(self):
        with pytest.raises(ContractError):
            SyntheticModelSpec.from_mapping({"a": 1.0}, "piecewise", [(0.0, 0.2), (1.0, 1.0)])

    def test_unknown_distortion(self):
        with pytest.raises(ContractError):
            SyntheticModelSpec.from_mapping({"a": 1.0}, "cubic")

    def test_answer_outside_vocabulary(self, square_spec):
        with pytest.raises(ContractError):
            synthetic_observed(square_spec, "Nice", 0.5)

    def test_most_likely_breaks_ties_by_token(self):
        spec = SyntheticModelSpec.from_mapping({"b": 0.5, "a": 0.5})
        assert spec.most_likely() == "a"


class TestSyntheticScoring:
    """Teacher-forced scoring reads certainty and context from the prompt"""

    async def test_prior_prompt_scores_prior(self, square_backend):
        trace = await square_backend.score_answer(render_prior(QUESTION).text, "Lyon")
        assert trace.steps[0].forced_prob == pytest.approx(0.2)
        assert trace.steps[0].alternatives == pytest.approx({"Paris": 0.8})

    async def test_zero_certainty_scores_prior(self, square_backend):
        trace = await square_backend.score_answer(main_prompt(0.0), "Lyon")
        assert trace.answer_probability == pytest.approx(0.2)

    async def test_full_certainty_scores_one(self, square_backend):
        trace = await square_backend.score_answer(main_prompt(1.0), "Lyon")
        assert trace.answer_probability == pytest.approx(1.0)

    async def test_midpoint(self, square_backend):
        trace = await square_backend.score_answer(main_prompt(0.5), "Lyon")
        assert trace.answer_probability == pytest.approx(0.4)

    async def test_top_k_zero_moves_alternatives_to_residual(self, square_spec):
        backend = SyntheticBackend(square_spec, top_k=0)
        trace = await backend.score_answer(main_prompt(0.5), "Lyon")
        assert trace.steps[0].named_tokens == ()
        assert trace.steps[0].residual == pytest.approx(0.6)

    async def test_multi_token_answer_forces_later_tokens(self, square_backend):
        trace = await square_backend.score_answer(main_prompt(0.5), "Lyon city")
        assert trace.answer_tokens == ("Lyon", "city")
        assert trace.steps[1].forced_prob == 1.0

    async def test_empty_answer_rejected(self, square_backend):
        with pytest.raises(ContractError):
            await square_backend.score_answer(main_prompt(0.5), "  ")

    async def test_calls_are_counted(self, square_backend):
        await square_backend.score_answer(main_prompt(0.2), "Lyon")
        await square_backend.generate(main_prompt(0.2))
        assert square_backend.calls["score"] == 1
        assert square_backend.calls["generate"] == 1
        assert square_backend.total_calls == 2


class TestSyntheticGeneration:
    """Greedy generation"""

    async def test_generates_argmax(self, square_backend):
        assert await square_backend.generate(main_prompt(0.4)) == "Paris"
        assert await square_backend.generate(main_prompt(1.0)) == "Lyon"

    async def test_prior_answer_stops_at_newline(self, square_backend):
        generation = await square_backend.generate_scored(render_prior(QUESTION).text, ANSWER_PARAMS)
        assert generation.text == "Paris"
        assert generation.probability == pytest.approx(0.8)

    async def test_explained_prior_keeps_explanation(self, square_backend):
        text = await square_backend.generate(render_prior(QUESTION).text, EXPLAINED_PARAMS)
        first, explanation = text.split("\n", 1)
        assert first == "Paris"
        assert explanation.startswith("Paris is the answer")

    async def test_token_cap(self, square_backend):
        params = GenerationParams(max_new_tokens=1, stop=("\n\n",))
        assert await square_backend.generate(render_prior(QUESTION).text, params) == "Paris"

    async def test_extraction_and_summary(self, square_backend):
        assert await square_backend.generate(render_extract(QUESTION, CONTEXT).text) == "Lyon"
        summary = await square_backend.generate(render_summarize(QUESTION, CONTEXT).text, EXPLAINED_PARAMS)
        assert summary == "The context states the answer is Lyon."

    async def test_empty_extraction_raises(self, square_backend):
        prompt = render_extract(QUESTION, "Nobody knows where it is.").text
        with pytest.raises(EmptyGenerationError):
            await square_backend.generate(prompt)


class TestHelpers:
    """Stop handling and backend selection"""

    def test_apply_stop_cuts_at_earliest(self):
        assert apply_stop("a\nb\n\nc", ("\n\n", "\n")) == "a"
        assert apply_stop("abc", ()) == "abc"

    def test_cap_tokens_preserves_layout(self):
        assert cap_tokens("one  two\nthree", 2) == "one  two"
        assert cap_tokens("one", 5) == "one"

    def test_build_synthetic_backend(self):
        backend = build_backend(BackendConfig(model="synthetic:sqrt", top_k=3))
        assert isinstance(backend, SyntheticBackend)
        assert backend.identity == "synthetic:sqrt"
        assert backend.top_k == 3
        assert backend.spec.distort(0.25) == pytest.approx(math.sqrt(0.25))

    def test_unknown_synthetic_backend(self):
        with pytest.raises(ContractError):
            build_backend(BackendConfig(model="synthetic:cubic"))

    def test_builtin_specs_share_prior(self):
        assert {name: spec.prior for name, spec in BUILTIN_SPECS.items()} == {
            name: (("Paris", 0.8), ("Lyon", 0.2)) for name in BUILTIN_SPECS
        }
