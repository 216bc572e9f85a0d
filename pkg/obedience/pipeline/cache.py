"""
Content-addressed response cache.

Keys are the sha256 of the canonical JSON of everything that determines a
backend response (backend identity, operation, exact prompt bytes, answer or
generation parameters, and k). Entries are JSON files written atomically, so
concurrent readers never observe partial writes and interrupted runs resume
from whatever completed.
"""

import asyncio
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

import structlog

from ..backend import Backend, Generation
from ..core.config import GenerationParams
from ..errors import ErrorCode, ObedienceError, ErrorSource
from ..trace import ScoredTrace
from ..util import canonical_json, sha256_hex

logger = structlog.get_logger(__name__)


class ResponseCache:
    """
    On-disk JSON store keyed by content hash; in-memory when ``directory`` is None.
    """

    def __init__(self, directory: Optional[Union[str, Path]] = None):
        self.directory = Path(directory) if directory else None
        self._memory: Dict[str, Dict[str, Any]] = {}
        self.hits = 0
        self.misses = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def make_key(**identity: Any) -> str:
        return sha256_hex(canonical_json(identity))

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        value = self._memory.get(key)
        if value is None and self.directory is not None:
            path = self._path(key)
            if path.is_file():
                try:
                    value = json.loads(path.read_text(encoding="utf-8"))
                except (OSError, ValueError):
                    logger.warning("cache.corrupt_entry", key=key)
                    value = None
                if value is not None:
                    self._memory[key] = value
        if value is None:
            self.misses += 1
            logger.debug("cache.miss", key=key[:12])
            return None
        self.hits += 1
        logger.debug("cache.hit", key=key[:12])
        return value

    def put(self, key: str, value: Dict[str, Any]) -> None:
        self._memory[key] = value
        if self.directory is None:
            return
        path = self._path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(canonical_json(value))
            os.replace(tmp, path)
        except OSError as e:
            raise ObedienceError(ErrorCode.STORAGE_ERROR, f"cannot write cache entry {path}: {e}",
                                 source=ErrorSource.PIPELINE, cause=e)

    def __len__(self) -> int:
        if self.directory is None:
            return len(self._memory)
        return sum(1 for _ in self.directory.glob("*/*.json"))

    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0

    def stats(self) -> Dict[str, Any]:
        return {"hits": self.hits, "misses": self.misses, "hit_rate": self.hit_rate()}


class CachedBackend(Backend):
    """
    Serves repeated requests from a ``ResponseCache``; misses go to ``inner``.

    Concurrent identical requests are coalesced so each key reaches the inner
    backend at most once.
    """

    def __init__(self, inner: Backend, cache: Optional[ResponseCache] = None):
        super().__init__(inner.top_k)
        self.inner = inner
        self.cache = cache or ResponseCache()
        self._inflight: Dict[str, asyncio.Future] = {}

    @property
    def identity(self) -> str:
        return self.inner.identity

    async def _cached(self, key: str, compute) -> Dict[str, Any]:
        value = self.cache.get(key)
        if value is not None:
            return value
        pending = self._inflight.get(key)
        if pending is not None:
            return await asyncio.shield(pending)
        future = asyncio.get_running_loop().create_future()
        self._inflight[key] = future
        try:
            value = await compute()
            self.cache.put(key, value)
            future.set_result(value)
            return value
        except asyncio.CancelledError:
            future.cancel()
            raise
        except Exception as e:
            future.set_exception(e)
            future.exception()  # mark retrieved
            raise
        finally:
            del self._inflight[key]

    async def _score_answer(self, prompt: str, answer: str) -> ScoredTrace:
        key = self.cache.make_key(backend=self.identity, op="score", prompt=prompt, answer=answer,
                                  k=self.top_k)

        async def compute() -> Dict[str, Any]:
            return (await self.inner.score_answer(prompt, answer)).to_dict()

        return ScoredTrace.from_dict(await self._cached(key, compute))

    async def _generate(self, prompt: str, params: GenerationParams) -> Generation:
        key = self.cache.make_key(backend=self.identity, op="generate", prompt=prompt,
                                  params=params.to_dict())

        async def compute() -> Dict[str, Any]:
            generation = await self.inner.generate_scored(prompt, params)
            return {"text": generation.text, "token_logprobs": list(generation.token_logprobs)}

        value = await self._cached(key, compute)
        return Generation(value["text"], tuple(float(v) for v in value["token_logprobs"]))

    async def close(self) -> None:
        await self.inner.close()
