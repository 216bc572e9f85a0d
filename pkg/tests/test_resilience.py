"""
Tests for retry and bulkhead patterns.
"""

import asyncio

import pytest

from obedience.core.config import RetryPolicy
from obedience.errors import BackendError, ErrorCode, ProtocolError
from obedience.resilience import Bulkhead, BulkheadConfig, Retry, exponential_backoff


class Flaky:
    """Fails with the queued errors, then returns ``value``."""

    def __init__(self, errors, value="ok"):
        self.errors = list(errors)
        self.value = value
        self.calls = 0

    async def __call__(self):
        self.calls += 1
        if self.errors:
            raise self.errors.pop(0)
        return self.value


@pytest.fixture
def sleeps():
    return []


@pytest.fixture
def retry(sleeps):
    async def fake_sleep(delay):
        sleeps.append(delay)

    return Retry(RetryPolicy(max_attempts=4, backoff_base=0.5, backoff_max=1.5, jitter=False), sleep=fake_sleep)


class TestRetry:
    """Retry with exponential backoff"""

    async def test_transient_errors_are_retried(self, retry, sleeps):
        flaky = Flaky([BackendError("down", code=ErrorCode.SERVER_ERROR),
                       BackendError("busy", code=ErrorCode.RATE_LIMITED)])
        assert await retry.execute(flaky) == "ok"
        assert flaky.calls == 3
        assert sleeps == [0.5, 1.0]

    async def test_backoff_is_capped(self, retry, sleeps):
        flaky = Flaky([BackendError("t", code=ErrorCode.TIMEOUT)] * 3)
        await retry.execute(flaky)
        assert sleeps == [0.5, 1.0, 1.5]

    async def test_permanent_error_is_not_retried(self, retry, sleeps):
        flaky = Flaky([ProtocolError("bad payload")])
        with pytest.raises(ProtocolError):
            await retry.execute(flaky)
        assert flaky.calls == 1
        assert sleeps == []

    async def test_exhaustion_reraises_last_error(self, retry):
        flaky = Flaky([BackendError("down", code=ErrorCode.SERVER_ERROR)] * 10)
        with pytest.raises(BackendError) as exc:
            await retry.execute(flaky)
        assert exc.value.code is ErrorCode.SERVER_ERROR
        assert flaky.calls == 4
        assert retry.attempts == 4

    def test_exponential_backoff(self):
        assert [exponential_backoff(n, 0.5, 2.0, 8.0) for n in range(1, 6)] == [0.5, 1.0, 2.0, 4.0, 8.0]


class TestBulkhead:
    """Concurrency cap"""

    async def test_peak_never_exceeds_limit(self):
        bulkhead = Bulkhead(BulkheadConfig(name="stub", max_concurrent=2))

        async def work(i):
            await asyncio.sleep(0.01)
            return i

        results = await asyncio.gather(*(bulkhead.execute(work, i) for i in range(8)))
        assert results == list(range(8))
        stats = bulkhead.get_stats()
        assert stats["peak_active"] == 2
        assert stats["total_requests"] == 8
        assert stats["active_count"] == 0

    async def test_errors_release_the_slot(self):
        bulkhead = Bulkhead(BulkheadConfig(name="stub", max_concurrent=1))

        async def boom():
            raise ProtocolError("bad")

        with pytest.raises(ProtocolError):
            await bulkhead.execute(boom)
        assert await bulkhead.execute(Flaky([])) == "ok"
