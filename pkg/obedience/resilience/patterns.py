"""
Resilience patterns for backend calls: retry with exponential backoff and a
bulkhead that caps in-flight requests.
"""

import asyncio
import random
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Optional, TypeVar

import structlog

from ..core.config import RetryPolicy
from ..errors import ObedienceError

logger = structlog.get_logger(__name__)

T = TypeVar("T")


def exponential_backoff(attempt: int, initial_delay: float = 0.5, multiplier: float = 2.0,
                        max_delay: float = 8.0) -> float:
    """Calculate exponential backoff delay."""
    delay = initial_delay * (multiplier ** (attempt - 1))
    return min(delay, max_delay)


class Retry:
    """
    Retry handler for idempotent async operations.

    Only ``ObedienceError``s whose ``is_retryable()`` is true are retried;
    everything else propagates on the first attempt.
    """

    def __init__(self, policy: RetryPolicy, sleep: Callable[[float], Awaitable[None]] = asyncio.sleep):
        self.policy = policy
        self._sleep = sleep
        self.attempts = 0

    async def execute(self, func: Callable[..., Awaitable[T]], *args: Any, **kwargs: Any) -> T:
        """Execute ``func`` with retry logic."""
        for attempt in range(1, self.policy.max_attempts + 1):
            self.attempts += 1
            try:
                result = await func(*args, **kwargs)
                if attempt > 1:
                    logger.info("backend.retry_succeeded", attempt=attempt)
                return result
            except ObedienceError as e:
                if not e.is_retryable():
                    raise
                if attempt == self.policy.max_attempts:
                    logger.error("backend.retry_exhausted", attempts=attempt, error=e.message)
                    raise
                delay = self._calculate_delay(attempt)
                logger.warning("backend.retry", attempt=attempt, delay=round(delay, 3), error=e.message)
                await self._sleep(delay)
        raise AssertionError("unreachable")

    def _calculate_delay(self, attempt: int) -> float:
        delay = exponential_backoff(attempt, self.policy.backoff_base, 2.0, self.policy.backoff_max)
        if self.policy.jitter:
            delay *= random.uniform(0.5, 1.5)
        return delay


@dataclass
class BulkheadConfig:
    """Bulkhead configuration."""
    name: str
    max_concurrent: int


class Bulkhead:
    """Caps the number of concurrently executing coroutines."""

    def __init__(self, config: BulkheadConfig):
        self.config = config
        self._semaphore: Optional[asyncio.Semaphore] = None
        self._active_count = 0
        self.peak_active = 0
        self.total_requests = 0

    @property
    def semaphore(self) -> asyncio.Semaphore:
        # created lazily so it binds to the running loop
        if self._semaphore is None:
            self._semaphore = asyncio.Semaphore(self.config.max_concurrent)
        return self._semaphore

    async def execute(self, func: Callable[..., Awaitable[T]], *args: Any, **kwargs: Any) -> T:
        """Execute ``func`` once a slot is free."""
        self.total_requests += 1
        async with self.semaphore:
            self._active_count += 1
            self.peak_active = max(self.peak_active, self._active_count)
            try:
                return await func(*args, **kwargs)
            finally:
                self._active_count -= 1

    def get_stats(self) -> dict:
        """Get bulkhead statistics."""
        return {
            "name": self.config.name,
            "max_concurrent": self.config.max_concurrent,
            "active_count": self._active_count,
            "peak_active": self.peak_active,
            "total_requests": self.total_requests,
        }
