"""
Deterministic synthetic model used as a testing oracle.

The model reads the expressed certainty and the context answer back out of
the rendered prompt and answers from ``(1 - g(c)) * prior + g(c) * point(a)``.
"""

import hashlib
import math
import re
from typing import List, Optional, Tuple

from ..core.config import GenerationParams
from ..errors import ContractError, ErrorSource
from ..prob import CertaintyLike, Distribution, ideal_mixture
from ..trace import ScoredTrace, TokenStep
from .base import Backend, apply_stop
from .types import Generation, SyntheticModelSpec

CERTAINTY_PATTERN = re.compile(r"Certainty of the context: (\d+)%")
CONTEXT_PATTERN = re.compile(r"^Context: (.*?)(?=\n\n|\Z)", re.DOTALL | re.MULTILINE)
WORD_PATTERN = re.compile(r"\w+")
TOKEN_PATTERN = re.compile(r"\S+")

EXTRACT_SUFFIX = "Answer retrieved from the context:"
SUMMARY_SUFFIX = "The summarized context:"


def synthetic_observed(spec: SyntheticModelSpec, answer: str, c: CertaintyLike) -> Distribution:
    """The synthetic model's response distribution over its vocabulary at certainty ``c``."""
    if answer not in spec.vocabulary:
        raise ContractError(
            f"answer {answer!r} is outside the vocabulary {spec.vocabulary}", source=ErrorSource.BACKEND
        )
    point = Distribution.point_mass(spec.vocabulary, answer)
    return ideal_mixture(spec.prior_distribution, point, spec.distort(c))


def cap_tokens(text: str, max_tokens: int) -> str:
    """Keep at most ``max_tokens`` whitespace-delimited tokens, preserving layout."""
    spans = list(TOKEN_PATTERN.finditer(text))
    if len(spans) <= max_tokens:
        return text
    return text[: spans[max_tokens - 1].end()]


class SyntheticBackend(Backend):
    """Pure in-process backend answering from a ``SyntheticModelSpec``."""

    def __init__(self, spec: SyntheticModelSpec, top_k: int = 5, name: Optional[str] = None):
        super().__init__(top_k)
        self.spec = spec
        if name is None:
            digest = hashlib.sha256(repr(spec).encode("utf-8")).hexdigest()[:12]
            name = f"synthetic:{spec.distortion}:{digest}"
        self._name = name

    @property
    def identity(self) -> str:
        return self._name

    # prompt parsing

    def certainty_of(self, prompt: str) -> float:
        match = CERTAINTY_PATTERN.search(prompt)
        return int(match.group(1)) / 100.0 if match else 0.0

    def context_answer(self, prompt: str) -> Optional[str]:
        """First vocabulary word on the context line, if any."""
        match = CONTEXT_PATTERN.search(prompt)
        if not match:
            return None
        vocabulary = set(self.spec.vocabulary)
        for word in WORD_PATTERN.findall(match.group(1)):
            if word in vocabulary:
                return word
        return None

    def observed_for(self, prompt: str) -> Distribution:
        answer = self.context_answer(prompt)
        c = self.certainty_of(prompt)
        if answer is None or c == 0.0:
            return self.spec.prior_distribution
        return synthetic_observed(self.spec, answer, c)

    # backend operations

    async def _score_answer(self, prompt: str, answer: str) -> ScoredTrace:
        tokens = tuple(answer.split())
        observed = self.observed_for(prompt)
        mass = dict(zip(observed.outcomes, observed.masses))
        forced = mass.get(tokens[0], 0.0)
        others = sorted(
            ((token, p) for token, p in mass.items() if token != tokens[0]),
            key=lambda item: (-item[1], item[0]),
        )
        named = dict(others[: self.top_k])
        residual = math.fsum(p for _, p in others[self.top_k:])
        steps: List[TokenStep] = [TokenStep.from_probs(tokens[0], forced, named, residual)]
        steps.extend(TokenStep(token, 0.0) for token in tokens[1:])
        return ScoredTrace(tokens, tuple(steps))

    async def _generate(self, prompt: str, params: GenerationParams) -> Generation:
        text, first_logprob = self._raw_completion(prompt)
        text = cap_tokens(apply_stop(text, params.stop), params.max_new_tokens)
        emitted = len(TOKEN_PATTERN.findall(text))
        logprobs: Tuple[float, ...] = tuple([first_logprob] + [0.0] * (emitted - 1)) if emitted else ()
        return Generation(text, logprobs)

    def _raw_completion(self, prompt: str) -> Tuple[str, float]:
        ending = prompt.rstrip()
        answer = self.context_answer(prompt)
        if ending.endswith(EXTRACT_SUFFIX):
            return (answer or ""), 0.0
        if ending.endswith(SUMMARY_SUFFIX):
            return (f"The context states the answer is {answer}." if answer else ""), 0.0
        observed = self.observed_for(prompt)
        top = self.spec.most_likely(observed)
        logprob = math.log(observed.mass_of(top))
        if CERTAINTY_PATTERN.search(prompt):
            return top, logprob
        explanation = f"{top} is the answer I consider most likely without any further context."
        return f"{top}\n{explanation}", logprob
