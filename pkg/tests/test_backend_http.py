"""
Tests for the HTTP completion backend against a stub server.
"""

import asyncio
import json
import math

import pytest
from aiohttp import web
from aiohttp.test_utils import TestServer

from obedience.backend import CompletionBackend, build_backend, join_continuation
from obedience.core.config import BackendConfig, GenerationParams, RetryPolicy
from obedience.errors import BackendError, CapabilityError, ErrorCode, ProtocolError

FAST_RETRY = RetryPolicy(max_attempts=3, backoff_base=0.001, jitter=False)


class StubEndpoint:
    """Serves queued responses on /v1/completions and records every request."""

    def __init__(self):
        self.responses = []
        self.payloads = []
        self.headers = []

    def queue(self, body, status=200, delay=0.0):
        self.responses.append((status, body, delay))

    async def handle(self, request):
        self.payloads.append(await request.json())
        self.headers.append(dict(request.headers))
        status, body, delay = self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        if delay:
            await asyncio.sleep(delay)
        if isinstance(body, str):
            return web.Response(text=body, status=status)
        return web.json_response(body, status=status)


@pytest.fixture
async def stub():
    endpoint = StubEndpoint()
    app = web.Application()
    app.router.add_post("/v1/completions", endpoint.handle)
    server = TestServer(app)
    await server.start_server()
    endpoint.url = str(server.make_url("/v1"))
    yield endpoint
    await server.close()


@pytest.fixture
async def make_backend(stub):
    created = []

    def factory(**overrides):
        settings = dict(endpoint=stub.url, model="stub-model", top_k=5, timeout=5.0, retry=FAST_RETRY,
                        api_key_env="OBEDIENCE_TEST_API_KEY")
        settings.update(overrides)
        backend = CompletionBackend(BackendConfig(**settings))
        created.append(backend)
        return backend

    yield factory
    for backend in created:
        await backend.close()


@pytest.fixture
def score_body(fixtures_dir):
    return json.loads((fixtures_dir / "http" / "score_echo.json").read_text(encoding="utf-8"))


@pytest.fixture
def generate_body(fixtures_dir):
    return json.loads((fixtures_dir / "http" / "generate_answer.json").read_text(encoding="utf-8"))


class TestJoinContinuation:
    """Answer attachment"""

    def test_single_space_after_trailing_space(self):
        assert join_continuation("Answer: ", "Paris") == ("Answer: Paris", 7)

    def test_single_space_without_trailing_space(self):
        assert join_continuation("Answer:", " Paris ") == ("Answer: Paris", 7)

    def test_newlines_are_kept(self):
        assert join_continuation("Answer:\n", "Paris") == ("Answer:\n Paris", 8)


@pytest.mark.integration
class TestScoring:
    """Echo-mode scoring"""

    async def test_fixture_yields_stepwise_probabilities(self, stub, make_backend, score_body):
        stub.queue(score_body)
        backend = make_backend()
        trace = await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")

        assert trace.answer_tokens == (" Paris",)
        step = trace.steps[0]
        assert abs(step.forced_prob - 0.8) <= 1e-9
        assert step.alternatives.keys() == {" Lyon"}
        assert abs(step.alternatives[" Lyon"] - 0.2) <= 1e-9
        assert step.residual == pytest.approx(0.0, abs=1e-9)

    async def test_rounded_logprobs(self, stub, make_backend, fixtures_dir):
        body = json.loads((fixtures_dir / "http" / "score_echo_rounded.json").read_text(encoding="utf-8"))
        stub.queue(body)
        backend = make_backend()
        trace = await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")

        step = trace.steps[0]
        assert step.forced_prob == pytest.approx(0.8, abs=1e-4)
        assert step.alternatives[" Lyon"] == pytest.approx(0.2, abs=1e-4)
        assert step.forced_prob + step.alternatives[" Lyon"] + step.residual == pytest.approx(1.0, abs=1e-12)

    async def test_request_payload(self, stub, make_backend, score_body):
        stub.queue(score_body)
        backend = make_backend(top_k=3)
        await backend.score_answer("Question: Capital?\n\nAnswer:", "Paris")

        payload = stub.payloads[0]
        assert payload["prompt"] == "Question: Capital?\n\nAnswer: Paris"
        assert payload["echo"] is True
        assert payload["max_tokens"] == 0
        assert payload["logprobs"] == 3
        assert payload["model"] == "stub-model"

    async def test_missing_logprobs_is_capability_error(self, stub, make_backend):
        stub.queue({"choices": [{"text": "Question: Capital?\n\nAnswer: Paris"}]})
        backend = make_backend()
        with pytest.raises(CapabilityError):
            await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")

    async def test_answer_off_token_boundary(self, stub, make_backend, score_body):
        stub.queue(score_body)
        backend = make_backend()
        with pytest.raises(ProtocolError):
            await backend.score_answer("Question: Capital?\n\nAnswe", "Paris")

    async def test_bearer_header(self, stub, make_backend, score_body, monkeypatch):
        monkeypatch.setenv("OBEDIENCE_TEST_API_KEY", "sk-test")
        stub.queue(score_body)
        backend = make_backend()
        await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert stub.headers[0]["Authorization"] == "Bearer sk-test"

    async def test_no_header_without_key(self, stub, make_backend, score_body, monkeypatch):
        monkeypatch.delenv("OBEDIENCE_TEST_API_KEY", raising=False)
        stub.queue(score_body)
        backend = make_backend()
        await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert "Authorization" not in stub.headers[0]

    async def test_close_logs_concurrency_stats(self, stub, make_backend, score_body, mocker):
        logger = mocker.patch("obedience.backend.http.logger")
        stub.queue(score_body)
        stub.queue(score_body)
        backend = make_backend(max_inflight=1)
        await asyncio.gather(*(backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris") for _ in range(2)))
        await backend.close()

        logger.info.assert_called_once()
        event, stats = logger.info.call_args.args[0], logger.info.call_args.kwargs
        assert event == "backend.closed"
        assert stats["peak_active"] == 1
        assert stats["total_requests"] == 2


@pytest.mark.integration
class TestGeneration:
    """Greedy generation with emitted-token logprobs"""

    async def test_stop_truncation_and_logprobs(self, stub, make_backend, generate_body):
        stub.queue(generate_body)
        backend = make_backend()
        generation = await backend.generate_scored("Question: Capital?\n\n", GenerationParams(stop=("\n",)))

        assert generation.text == "Answer: Paris"
        assert generation.token_logprobs == (-0.1, -0.01, -0.22314355131420976)
        assert generation.probability == pytest.approx(math.exp(-0.1 - 0.01 - 0.22314355131420976))
        payload = stub.payloads[0]
        assert payload["temperature"] == 0
        assert payload["stop"] == ["\n"]
        assert payload["max_tokens"] == 32

    async def test_whitespace_only_completion(self, stub, make_backend):
        stub.queue({"choices": [{"text": "  \n"}]})
        backend = make_backend()
        with pytest.raises(BackendError) as exc:
            await backend.generate("Question: Capital?\n\n")
        assert exc.value.code is ErrorCode.EMPTY_GENERATION


@pytest.mark.integration
class TestRetries:
    """Transient failures are retried; permanent ones are not"""

    async def test_server_errors_then_success(self, stub, make_backend, score_body):
        stub.queue("unavailable", status=503)
        stub.queue("slow down", status=429)
        stub.queue(score_body)
        backend = make_backend()
        trace = await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert len(stub.payloads) == 3
        assert trace.answer_probability == pytest.approx(0.8)

    async def test_gives_up_after_max_attempts(self, stub, make_backend):
        stub.queue("unavailable", status=503)
        backend = make_backend()
        with pytest.raises(BackendError) as exc:
            await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert exc.value.code is ErrorCode.SERVER_ERROR
        assert len(stub.payloads) == 3

    async def test_timeout(self, stub, make_backend, score_body):
        stub.queue(score_body, delay=0.3)
        backend = make_backend(timeout=0.05)
        with pytest.raises(BackendError) as exc:
            await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert exc.value.code is ErrorCode.TIMEOUT

    async def test_echo_rejection_is_capability_error(self, stub, make_backend):
        stub.queue('{"error": "echo is not supported with max_tokens=0"}', status=400)
        backend = make_backend()
        with pytest.raises(CapabilityError):
            await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert len(stub.payloads) == 1

    async def test_not_found_is_protocol_error(self, stub, make_backend):
        stub.queue("no such route", status=404)
        backend = make_backend()
        with pytest.raises(ProtocolError):
            await backend.score_answer("Question: Capital?\n\nAnswer: ", "Paris")
        assert len(stub.payloads) == 1

    async def test_non_json_body(self, stub, make_backend):
        stub.queue("<html>gateway</html>")
        backend = make_backend()
        with pytest.raises(ProtocolError):
            await backend.generate("Question: Capital?\n\n")


class TestBackendSelection:
    """Configured backends"""

    def test_http_backend_identity(self):
        backend = build_backend(BackendConfig(endpoint="http://models.local/v1/", model="m-7b"))
        assert isinstance(backend, CompletionBackend)
        assert backend.identity == "http://models.local/v1#m-7b"
        assert backend.url == "http://models.local/v1/completions"
