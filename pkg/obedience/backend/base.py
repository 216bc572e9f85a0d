"""
Uniform interface to a model that can teacher-force and greedily generate.
"""

from abc import ABC, abstractmethod
from collections import Counter
from typing import Optional

import structlog

from ..core.config import GenerationParams
from ..errors import ContractError, EmptyGenerationError, ErrorSource
from ..trace import ScoredTrace
from .types import Generation

logger = structlog.get_logger(__name__)


def apply_stop(text: str, stop) -> str:
    """Cut ``text`` at the earliest stop sequence."""
    cut = len(text)
    for sequence in stop:
        if sequence:
            index = text.find(sequence)
            if index != -1:
                cut = min(cut, index)
    return text[:cut]


class Backend(ABC):
    """
    Abstract model backend.

    Subclasses implement ``_score_answer`` and ``_generate``; the public
    methods validate inputs, count calls and enforce the empty-generation
    rule. Implementations must be safe to call from concurrent tasks.
    """

    def __init__(self, top_k: int = 5):
        if top_k < 0:
            raise ContractError("top_k must be >= 0", source=ErrorSource.BACKEND)
        self.top_k = top_k
        self.calls: Counter = Counter()

    @property
    @abstractmethod
    def identity(self) -> str:
        """Stable identity of the model behind this backend."""

    @abstractmethod
    async def _score_answer(self, prompt: str, answer: str) -> ScoredTrace:
        ...

    @abstractmethod
    async def _generate(self, prompt: str, params: GenerationParams) -> Generation:
        ...

    async def score_answer(self, prompt: str, answer: str) -> ScoredTrace:
        """Teacher-force ``answer`` after ``prompt`` and record stepwise probabilities."""
        if not answer or not answer.strip():
            raise ContractError("answer must be non-empty", source=ErrorSource.BACKEND)
        self.calls["score"] += 1
        return await self._score_answer(prompt, answer)

    async def generate_scored(self, prompt: str, params: Optional[GenerationParams] = None) -> Generation:
        """Greedy completion with the log-probabilities of the emitted tokens."""
        params = params or GenerationParams()
        self.calls["generate"] += 1
        generation = await self._generate(prompt, params)
        text = generation.text.strip()
        if not text:
            logger.warning("backend.empty_generation", backend=self.identity)
            raise EmptyGenerationError()
        return Generation(text, generation.token_logprobs)

    async def generate(self, prompt: str, params: Optional[GenerationParams] = None) -> str:
        """Greedy completion truncated at a stop sequence or the token cap, whitespace-trimmed."""
        return (await self.generate_scored(prompt, params)).text

    @property
    def total_calls(self) -> int:
        return sum(self.calls.values())

    async def close(self) -> None:
        """Release network resources."""

    async def __aenter__(self) -> "Backend":
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.close()
