"""Shared fixtures: dataset paths and scripted stand-ins for live endpoints."""

from __future__ import annotations

import json
from pathlib import Path

import httpx
import pytest

from groundscore.clients import TransportError
from groundscore.harness import BenchmarkSample, load_dataset
from groundscore.parsing import render_response

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def bench40_path() -> Path:
    return DATA_DIR / "bench40.jsonl"


@pytest.fixture(scope="session")
def bench40(bench40_path) -> list[BenchmarkSample]:
    return load_dataset(bench40_path)


@pytest.fixture(scope="session")
def parser_corpus_path() -> Path:
    return DATA_DIR / "parser_corpus.jsonl"


@pytest.fixture(scope="session")
def parser_corpus(parser_corpus_path) -> list[dict]:
    with parser_corpus_path.open(encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


class OracleModel:
    """Answers with the ground-truth letter and the exact ground-truth boxes."""

    def query(self, sample: BenchmarkSample, prompt: str) -> str:
        parts: list = ["the target is at "]
        for box in sample.target_boxes:
            parts.append(box)
            parts.append(" ")
        return render_response(parts, sample.answer)


class AlwaysAModel:
    """Answers A to everything, with no boxes."""

    def query(self, sample: BenchmarkSample, prompt: str) -> str:
        return "<think>guessing without looking</think><answer>A</answer>"


class NoTagsModel:
    """Ignores the tag contract; still names the right letter."""

    def query(self, sample: BenchmarkSample, prompt: str) -> str:
        return f"the answer is {sample.answer}"


class FlakyModel:
    """Oracle behavior except for ids that always fail at the transport."""

    def __init__(self, failing_ids: set[str]):
        self.failing_ids = failing_ids
        self._oracle = OracleModel()

    def query(self, sample: BenchmarkSample, prompt: str) -> str:
        if sample.id in self.failing_ids:
            raise TransportError("connect timeout", attempts=3)
        return self._oracle.query(sample, prompt)


def chat_transport(reply) -> httpx.MockTransport:
    """Mock chat-completions endpoint.

    `reply` maps a request body dict to the assistant text, or raises to
    simulate transport failure.
    """

    def handler(request: httpx.Request) -> httpx.Response:
        if request.url.path.endswith("/models"):
            return httpx.Response(200, json={"data": []})
        body = json.loads(request.content.decode("utf-8"))
        content = reply(body)
        return httpx.Response(
            200, json={"choices": [{"message": {"role": "assistant", "content": content}}]}
        )

    return httpx.MockTransport(handler)


def failing_transport(status: int = 503) -> httpx.MockTransport:
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(status, json={"error": "unavailable"})

    return httpx.MockTransport(handler)
