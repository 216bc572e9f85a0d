"""
Per-sample evaluation.

For each sample the pipeline elicits the model's context-free answer,
transforms the context, teacher-forces the context answer under the
no-context prompt and under the main prompt at every sweep certainty, and
turns the aligned traces into diagnostic curves and the obedience error.
"""

import asyncio
import re
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from ..backend import Backend, Generation
from ..core.config import ANSWER_PARAMS, EXPLAINED_PARAMS, SUMMARY_PARAMS
from ..dataset import FilterReport, Sample, retrieval_filter, select
from ..errors import (
    ContractError,
    DegenerateTraceError,
    EmptyGenerationError,
    ErrorCollection,
    ErrorSource,
    ObedienceError,
)
from ..prob import ObedienceRecord, diagnostic_point
from ..prompts import ContextForm, PromptMode, PromptRenderer, ReminderKind, ReminderStyle, simple_context
from ..trace import ScoredTrace, align_steps, build_prefix_distribution, point_mass_answer
from .cache import CachedBackend, ResponseCache
from .types import RunConfig, SampleResult, SweepDistributions

logger = structlog.get_logger(__name__)

_ANSWER_LABEL = re.compile(r"^\s*(?:answer(?: retrieved from the context)?\s*:\s*)+", re.IGNORECASE)


def clean_answer(text: str) -> str:
    """Strip a leading ``Answer:`` label the model may echo, then surrounding whitespace."""
    return _ANSWER_LABEL.sub("", text).strip()


class Pipeline:
    """
    Runs samples through one backend under one ``RunConfig``.

    The backend is wrapped in a ``CachedBackend`` so repeated prompts within
    and across runs reach the model once.
    """

    def __init__(self, backend: Backend, config: Optional[RunConfig] = None,
                 renderer: Optional[PromptRenderer] = None):
        self.config = (config or RunConfig()).validate()
        if isinstance(backend, CachedBackend):
            self.backend = backend
        else:
            self.backend = CachedBackend(backend, ResponseCache(self.config.cache_dir))
        self.renderer = renderer or PromptRenderer(self.config.template_dir)
        self.errors = ErrorCollection()

    @property
    def model(self) -> Backend:
        """The uncached backend; its call counters count real model requests."""
        return self.backend.inner

    # prior and context

    async def elicit_prior_generation(self, sample: Sample,
                                      style: ReminderStyle = ReminderStyle.ANSWER_ONLY) -> Generation:
        prompt = self.renderer.render_prior(sample.question).text
        params = EXPLAINED_PARAMS if style is ReminderStyle.EXPLAINED else ANSWER_PARAMS
        generation = await self.backend.generate_scored(prompt, params)
        text = clean_answer(generation.text)
        if not text:
            raise EmptyGenerationError(f"sample {sample.id!r}: prior answer is empty")
        return Generation(text, generation.token_logprobs)

    async def elicit_prior(self, sample: Sample, style: ReminderStyle = ReminderStyle.ANSWER_ONLY) -> str:
        """The model's greedy answer to the question without context."""
        return (await self.elicit_prior_generation(sample, style)).text

    async def transform_context(self, sample: Sample, form: ContextForm) -> str:
        form = ContextForm(form)
        if form is ContextForm.ORIGINAL:
            return sample.context
        if form is ContextForm.PROVIDED_SIMPLE:
            if not sample.context_answer or not sample.context_answer.strip():
                raise ContractError(f"sample {sample.id!r} has no context answer", source=ErrorSource.PIPELINE)
            return simple_context(sample.context_answer)
        if form is ContextForm.SIMPLIFIED:
            extracted = await self.extract_answer(sample)
            return simple_context(extracted)
        prompt = self.renderer.render_summarize(sample.question, sample.context).text
        return (await self.backend.generate(prompt, SUMMARY_PARAMS)).strip()

    async def extract_answer(self, sample: Sample) -> str:
        prompt = self.renderer.render_extract(sample.question, sample.context).text
        extracted = clean_answer(await self.backend.generate(prompt, ANSWER_PARAMS))
        if not extracted:
            raise EmptyGenerationError(f"sample {sample.id!r}: extraction is empty")
        return extracted

    async def extract_answers(self, samples: Sequence[Sample]) -> Dict[str, str]:
        """Extracted context answer per sample id; failed extractions map to an empty string."""
        semaphore = asyncio.Semaphore(self.config.workers)

        async def one(sample: Sample) -> Tuple[str, str]:
            async with semaphore:
                try:
                    return sample.id, await self.extract_answer(sample)
                except EmptyGenerationError:
                    return sample.id, ""

        return dict(await asyncio.gather(*(one(s) for s in samples)))

    async def _reminder(self, sample: Sample, mode: PromptMode, prior_answer: Optional[str]) -> Optional[str]:
        if mode.reminder is ReminderKind.NONE:
            return None
        if mode.reminder is ReminderKind.PROVIDED_ALTERNATIVE:
            alternative = self.config.alternatives.get(sample.id) or sample.gold_answer
            if not alternative:
                raise ContractError(f"sample {sample.id!r} has no alternative answer to provide",
                                    source=ErrorSource.PIPELINE)
            return alternative
        if mode.reminder_style is ReminderStyle.EXPLAINED:
            return await self.elicit_prior(sample, ReminderStyle.EXPLAINED)
        if prior_answer is None:
            raise EmptyGenerationError(f"sample {sample.id!r}: no prior answer to remind of")
        return prior_answer

    # scoring

    async def run_sample(self, sample: Sample, config: Optional[RunConfig] = None) -> SampleResult:
        """Evaluate one sample over the sweep."""
        config = (config or self.config).validate()
        mode = config.mode
        diagnostics: List[str] = []

        prior_answer: Optional[str] = None
        self_confidence: Optional[float] = None
        try:
            generation = await self.elicit_prior_generation(sample)
            prior_answer, self_confidence = generation.text, generation.probability
        except EmptyGenerationError as e:
            diagnostics.append(e.message)

        partial = dict(sample_id=sample.id, category=sample.category, prior_answer=prior_answer,
                       self_confidence=self_confidence)
        try:
            reminder = await self._reminder(sample, mode, prior_answer)
            context_text = await self.transform_context(sample, mode.context_form)
        except EmptyGenerationError as e:
            return SampleResult(**partial, diagnostics=tuple(diagnostics + [e.message]))

        expressed = config.expressed_certainties(sample.category)
        answer = sample.context_answer
        prior_prompt = self.renderer.render_prior(sample.question).text
        main_prompts = [
            self.renderer.render_main(sample.question, context_text, c, mode, reminder).text
            for c in expressed
        ]
        traces: List[ScoredTrace] = await asyncio.gather(
            self.backend.score_answer(prior_prompt, answer),
            *(self.backend.score_answer(prompt, answer) for prompt in main_prompts),
        )
        labels = ["prior"] + [f"c={c:g}" for c in expressed]
        traces = [trace.relabel(label) for trace, label in zip(traces, labels)]

        partial.update(reminder_text=reminder, context_text=context_text, expressed=expressed)
        try:
            aligned = align_steps(traces)
            distributions = [build_prefix_distribution(trace) for trace in aligned]
        except DegenerateTraceError as e:
            return SampleResult(**partial, diagnostics=tuple(diagnostics + [e.message]))

        prior, observed = distributions[0], distributions[1:]
        point = point_mass_answer(aligned[0].answer_tokens, like=prior)
        points = [diagnostic_point(p, prior, point, c) for p, c in zip(observed, config.sweep)]
        record = ObedienceRecord.from_points(config.sweep, points)
        logger.debug("pipeline.sample_done", sample=sample.id, epsilon_obey=round(record.epsilon_obey, 6))
        return SampleResult(
            **partial,
            record=record,
            prior_answer_mass=prior.full_answer_mass,
            distributions=SweepDistributions(prior, point, tuple(observed)),
            diagnostics=tuple(diagnostics),
        )

    async def run_dataset(
        self,
        samples: Sequence[Sample],
        config: Optional[RunConfig] = None,
        filter_report: Optional[FilterReport] = None,
    ) -> List[SampleResult]:
        """
        Evaluate samples concurrently; results come back in input order.

        Unless the run is unfiltered, only retrieval-filter survivors are
        evaluated. Without a ``filter_report`` the filter is computed from
        this backend's own extractions.
        """
        config = (config or self.config).validate()
        if not config.unfiltered:
            if filter_report is None:
                extracted = await self.extract_answers(samples)
                filter_report = retrieval_filter(samples, {self.backend.identity: extracted})
            samples = select(samples, filter_report.survivors)

        semaphore = asyncio.Semaphore(config.workers)

        async def one(sample: Sample) -> SampleResult:
            async with semaphore:
                try:
                    result = await self.run_sample(sample, config)
                except ObedienceError as e:
                    self.errors.add(e)
                    logger.warning("pipeline.sample_failed", sample=sample.id, error=e.message,
                                   code=e.code.value)
                    return SampleResult.failed(sample.id, sample.category, e)
                if result.diagnostics:
                    logger.warning("pipeline.sample_flagged", sample=sample.id,
                                   diagnostics=list(result.diagnostics))
                return result

        results = list(await asyncio.gather(*(one(s) for s in samples)))
        logger.info(
            "pipeline.run_done",
            samples=len(results),
            flagged=sum(1 for r in results if r.flagged),
            model_calls=dict(self.model.calls),
            cache=self.backend.cache.stats(),
        )
        return results
