"""
Client for OpenAI-style ``/completions`` endpoints that return per-token logprobs.

Scoring uses echo mode (``echo=true, max_tokens=0, logprobs=k``) so the
server returns the log-probability of every prompt and continuation token
together with its top-k alternatives. Generation uses greedy decoding
(``temperature=0``) with ``logprobs=1`` so the caller also gets the
probability of the emitted tokens.
"""

from typing import Any, Dict, List, Mapping, Optional, Tuple

import httpx
import structlog

from ..core.config import BackendConfig, GenerationParams
from ..errors import BackendError, CapabilityError, ErrorCode, ProtocolError
from ..resilience import Bulkhead, BulkheadConfig, Retry
from ..trace import ScoredTrace, TokenStep
from .base import Backend, apply_stop
from .types import Generation

logger = structlog.get_logger(__name__)

_CAPABILITY_HINTS = ("echo", "logprobs")


def join_continuation(prompt: str, answer: str) -> Tuple[str, int]:
    """
    Text sent for scoring and the offset where the answer begins.

    The answer is always attached with exactly one separating space so the
    same answer tokenizes identically after prompts that do or do not end
    in whitespace.
    """
    head = prompt.rstrip(" ")
    return f"{head} {answer.strip()}", len(head)


class CompletionBackend(Backend):
    """Backend over an HTTP completion endpoint."""

    def __init__(self, config: BackendConfig, client: Optional[httpx.AsyncClient] = None):
        config.validate()
        super().__init__(config.top_k)
        self.config = config
        self._client = client
        self._owns_client = client is None
        self.bulkhead = Bulkhead(BulkheadConfig(name=config.identity, max_concurrent=config.max_inflight))

    @property
    def identity(self) -> str:
        return self.config.identity

    @property
    def url(self) -> str:
        return f"{self.config.endpoint.rstrip('/')}/completions"

    @property
    def client(self) -> httpx.AsyncClient:
        if self._client is None:
            self._client = httpx.AsyncClient(timeout=self.config.timeout)
        return self._client

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        api_key = self.config.api_key
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    async def close(self) -> None:
        logger.info("backend.closed", **self.bulkhead.get_stats())
        if self._client is not None and self._owns_client:
            await self._client.aclose()
            self._client = None

    # transport

    async def _post_once(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        logger.debug("backend.request", url=self.url, max_tokens=payload.get("max_tokens"))
        try:
            response = await self.client.post(self.url, json=payload, headers=self._headers())
        except httpx.TimeoutException as e:
            raise BackendError(f"request timed out: {e}", code=ErrorCode.TIMEOUT, cause=e)
        except httpx.TransportError as e:
            raise BackendError(f"transport failure: {e}", cause=e)

        status = response.status_code
        if status == 429:
            raise BackendError("rate limited by endpoint", code=ErrorCode.RATE_LIMITED,
                               metadata={"status": status})
        if status >= 500:
            raise BackendError(f"server error {status}", code=ErrorCode.SERVER_ERROR,
                               metadata={"status": status})
        if status >= 400:
            body = response.text
            if status in (400, 422) and any(hint in body.lower() for hint in _CAPABILITY_HINTS):
                raise CapabilityError(f"endpoint rejected scoring request: {body[:200]}",
                                      metadata={"status": status})
            raise ProtocolError(f"endpoint returned {status}: {body[:200]}", metadata={"status": status})
        try:
            data = response.json()
        except ValueError as e:
            raise ProtocolError("response is not JSON", cause=e)
        if not isinstance(data, dict) or not data.get("choices"):
            raise ProtocolError("response has no choices")
        return data

    async def _post(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        retry = Retry(self.config.retry)
        return await retry.execute(self.bulkhead.execute, self._post_once, payload)

    # operations

    async def _score_answer(self, prompt: str, answer: str) -> ScoredTrace:
        text, boundary = join_continuation(prompt, answer)
        data = await self._post({
            "model": self.config.model,
            "prompt": text,
            "max_tokens": 0,
            "echo": True,
            "logprobs": self.config.top_k,
            "temperature": 0,
        })
        logprobs = data["choices"][0].get("logprobs")
        if not logprobs or not logprobs.get("tokens"):
            raise CapabilityError("endpoint did not return echoed logprobs")
        return self._parse_echo(logprobs, boundary)

    def _parse_echo(self, logprobs: Mapping[str, Any], boundary: int) -> ScoredTrace:
        tokens: List[str] = list(logprobs.get("tokens") or [])
        chosen: List[Optional[float]] = list(logprobs.get("token_logprobs") or [])
        offsets: List[int] = list(logprobs.get("text_offset") or [])
        top: List[Optional[Mapping[str, float]]] = list(logprobs.get("top_logprobs") or [])
        if len(chosen) != len(tokens) or len(offsets) != len(tokens):
            raise ProtocolError("logprob arrays have mismatched lengths")
        if top and len(top) != len(tokens):
            raise ProtocolError("top_logprobs length does not match tokens")

        first = next((i for i, offset in enumerate(offsets) if offset >= boundary), None)
        if first is None:
            raise ProtocolError("no answer tokens found in echoed response")
        if offsets[first] != boundary:
            raise ProtocolError("answer does not start on a token boundary")

        steps = []
        for i in range(first, len(tokens)):
            if chosen[i] is None:
                raise ProtocolError(f"missing logprob for forced token {tokens[i]!r}")
            alternatives = dict(top[i] or {}) if top else {}
            steps.append(TokenStep.from_logprobs(tokens[i], float(chosen[i]), alternatives))
        return ScoredTrace(tuple(tokens[first:]), tuple(steps))

    async def _generate(self, prompt: str, params: GenerationParams) -> Generation:
        data = await self._post({
            "model": self.config.model,
            "prompt": prompt,
            "max_tokens": params.max_new_tokens,
            "temperature": 0,
            "stop": list(params.stop),
            "logprobs": 1,
        })
        choice = data["choices"][0]
        raw = choice.get("text")
        if raw is None:
            raise ProtocolError("completion has no text")
        text = apply_stop(raw, params.stop)
        return Generation(text, self._emitted_logprobs(choice.get("logprobs"), len(text)))

    @staticmethod
    def _emitted_logprobs(logprobs: Optional[Mapping[str, Any]], kept_chars: int) -> Tuple[float, ...]:
        """Logprobs of the tokens that survive client-side stop truncation."""
        if not logprobs:
            return ()
        tokens = list(logprobs.get("tokens") or [])
        values = list(logprobs.get("token_logprobs") or [])
        kept: List[float] = []
        position = 0
        for token, value in zip(tokens, values):
            if position >= kept_chars or value is None:
                break
            kept.append(float(value))
            position += len(token)
        return tuple(kept)
