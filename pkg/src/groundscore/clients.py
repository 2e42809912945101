"""HTTP plumbing shared by the judge and model clients.

Includes the cassette store used for deterministic offline replay:
request bodies are canonicalized to JSON, hashed, and mapped to the
recorded response body, so replay is order-independent.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import httpx

__all__ = [
    "TransportError",
    "CassetteMiss",
    "Cassette",
    "canonical_json",
    "request_hash",
    "ChatCompletionsClient",
]


class TransportError(RuntimeError):
    """A request failed after exhausting its retry budget."""

    def __init__(self, message: str, attempts: int, last_error: Exception | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.last_error = last_error


class CassetteMiss(KeyError):
    """Strict replay saw a request that was never recorded."""


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass
class Cassette:
    """Hash-keyed request/response store backed by a single JSON file.

    mode "record" stores every live exchange; mode "replay" serves
    recorded responses without touching the network and raises
    `CassetteMiss` for unknown requests.
    """

    path: Path
    mode: str = "replay"  # "record" | "replay"
    entries: dict[str, dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.path = Path(self.path)
        if self.mode not in ("record", "replay"):
            raise ValueError(f"cassette mode must be 'record' or 'replay', got {self.mode!r}")
        if self.mode == "replay" or self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            self.entries = data.get("entries", {})

    def lookup(self, request_body: Any) -> Any:
        key = request_hash(request_body)
        if key not in self.entries:
            raise CassetteMiss(f"no recorded response for request hash {key}")
        return self.entries[key]["response"]

    def store(self, request_body: Any, response_body: Any) -> None:
        self.entries[request_hash(request_body)] = {
            "request": request_body,
            "response": response_body,
        }

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"entries": dict(sorted(self.entries.items()))}
        self.path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class ChatCompletionsClient:
    """Minimal client for an OpenAI-compatible chat-completions endpoint.

    Bounded retries with linear backoff; failures surface as
    `TransportError` carrying the attempt count, never as a silent
    zero score. A cassette, when attached, either records live traffic
    or replaces it entirely.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 2,
        retry_backoff: float = 0.5,
        cassette: Cassette | None = None,
        extra_body: dict[str, Any] | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.retry_backoff = retry_backoff
        self.cassette = cassette
        self.extra_body = extra_body or {}
        self.transport = transport  # injection point for offline tests

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _send(self, method: str, url: str, **kwargs: Any) -> httpx.Response:
        if self.transport is not None:
            with httpx.Client(transport=self.transport, timeout=self.timeout) as client:
                return client.request(method, url, headers=self._headers(), **kwargs)
        return httpx.request(method, url, headers=self._headers(), timeout=self.timeout, **kwargs)

    def _request_body(self, messages: list[dict[str, Any]], **overrides: Any) -> dict[str, Any]:
        body: dict[str, Any] = {"model": self.model, "messages": messages}
        body.update(self.extra_body)
        body.update(overrides)
        return body

    def _post(self, body: dict[str, Any]) -> dict[str, Any]:
        if self.cassette is not None and self.cassette.mode == "replay":
            return self.cassette.lookup(body)
        last_error: Exception | None = None
        attempts = 0
        for attempt in range(self.max_retries + 1):
            attempts = attempt + 1
            try:
                response = self._send(
                    "POST", f"{self.base_url}/chat/completions", json=body
                )
                response.raise_for_status()
                payload = response.json()
                if self.cassette is not None and self.cassette.mode == "record":
                    self.cassette.store(body, payload)
                return payload
            except (httpx.HTTPError, json.JSONDecodeError) as exc:
                last_error = exc
                if attempt < self.max_retries:
                    time.sleep(self.retry_backoff * (attempt + 1))
        raise TransportError(
            f"chat-completions request failed after {attempts} attempts: {last_error}",
            attempts=attempts,
            last_error=last_error,
        )

    def complete(self, messages: list[dict[str, Any]], **overrides: Any) -> str:
        """Send one chat request and return the first choice's text content."""
        payload = self._post(self._request_body(messages, **overrides))
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(
                f"malformed chat-completions payload: {exc}", attempts=1, last_error=exc
            ) from exc

    def probe(self) -> bool:
        """Cheap reachability check against the endpoint's model listing."""
        if self.cassette is not None and self.cassette.mode == "replay":
            return True
        try:
            response = self._send("GET", f"{self.base_url}/models")
            return response.status_code < 500
        except httpx.HTTPError:
            return False
