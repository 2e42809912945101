"""Batch reward scoring over HTTP.

The client never computes rewards itself; it validates, ships JSON to
the service, and maps responses and error codes onto typed records and
exceptions. All reward math lives behind the wire so parity cannot
drift.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Sequence

import httpx

from .cassette import Cassette
from .errors import (
    AuthError,
    BatchTooLargeError,
    JudgeUnavailableError,
    JudgeUpstreamError,
    SchemaError,
    ServerError,
    ServiceError,
    TransportFailure,
)

__all__ = [
    "ClientConfig",
    "GroundTruthSpec",
    "RewardItem",
    "Breakdown",
    "Diagnostics",
    "ScoredItem",
    "Metadata",
    "RewardBatch",
    "HealthStatus",
    "RewardClient",
]

DEFAULT_MAX_BATCH = 1024

_RETRY_AFTER_CAP = 5.0


@dataclass(frozen=True)
class ClientConfig:
    """Connection settings; the token is passed in, never read from disk."""

    base_url: str
    auth_token: str | None = None
    timeout: float = 60.0
    max_retries: int = 2
    max_in_flight: int = 4
    max_batch: int = DEFAULT_MAX_BATCH
    retry_backoff: float = 0.5

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {self.max_in_flight}")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        object.__setattr__(self, "base_url", self.base_url.rstrip("/"))


@dataclass(frozen=True)
class GroundTruthSpec:
    """Reference signal for one item, exactly as the service expects it."""

    answer_kind: str  # "mcq" | "open_ended"
    answer: str
    boxes: tuple[tuple[float, float, float, float], ...] = ()
    question: str = ""

    def to_wire(self) -> dict:
        payload: dict = {"answer_kind": self.answer_kind, "answer": self.answer}
        if self.boxes:
            payload["boxes"] = [list(box) for box in self.boxes]
        if self.question:
            payload["question"] = self.question
        return payload


@dataclass(frozen=True)
class RewardItem:
    response_text: str
    ground_truth: GroundTruthSpec

    def to_wire(self) -> dict:
        return {"response_text": self.response_text, "ground_truth": self.ground_truth.to_wire()}


@dataclass(frozen=True)
class Breakdown:
    acc: int
    format: int
    iou_recall: float
    iou_precision: float
    iou: float
    total: float

    @classmethod
    def from_wire(cls, data: Mapping[str, Any]) -> "Breakdown":
        return cls(
            acc=data["acc"],
            format=data["format"],
            iou_recall=data["iou_recall"],
            iou_precision=data["iou_precision"],
            iou=data["iou"],
            total=data["total"],
        )


@dataclass(frozen=True)
class Diagnostics:
    format_ok: bool
    choice: str | None
    boxes_extracted: int
    skipped_boxes: int

    @classmethod
    def from_wire(cls, data: Mapping[str, Any]) -> "Diagnostics":
        return cls(
            format_ok=data["format_ok"],
            choice=data["choice"],
            boxes_extracted=data["boxes_extracted"],
            skipped_boxes=data["skipped_boxes"],
        )


@dataclass(frozen=True)
class ScoredItem:
    breakdown: Breakdown
    diagnostics: Diagnostics
    advantage: float | None = None

    @classmethod
    def from_wire(cls, data: Mapping[str, Any]) -> "ScoredItem":
        return cls(
            breakdown=Breakdown.from_wire(data["breakdown"]),
            diagnostics=Diagnostics.from_wire(data["diagnostics"]),
            advantage=data.get("advantage"),
        )


@dataclass(frozen=True)
class Metadata:
    engine_version: str
    reward_spec_hash: str
    judge_model: str | None = None


@dataclass(frozen=True)
class RewardBatch:
    """One scored batch, order-aligned with the submitted items."""

    items: tuple[ScoredItem, ...]
    metadata: Metadata

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[ScoredItem]:
        return iter(self.items)

    def __getitem__(self, index: int) -> ScoredItem:
        return self.items[index]


@dataclass(frozen=True)
class HealthStatus:
    status: str
    version: str
    uptime_seconds: float
    judge_configured: bool
    judge_reachable: bool | None


def _item_to_wire(item: RewardItem | Mapping[str, Any]) -> dict:
    if isinstance(item, RewardItem):
        return item.to_wire()
    return dict(item)


_ERROR_TYPES: dict[int, type[ServiceError]] = {
    400: SchemaError,
    401: AuthError,
    413: BatchTooLargeError,
    422: JudgeUnavailableError,
    502: JudgeUpstreamError,
}


def _error_from_response(response: httpx.Response) -> ServiceError:
    message = response.text
    item_index = None
    try:
        detail = response.json().get("detail")
        if isinstance(detail, dict):
            message = detail.get("message", message)
            item_index = detail.get("item_index")
    except ValueError:
        pass
    if response.status_code in _ERROR_TYPES:
        error_type = _ERROR_TYPES[response.status_code]
        if error_type is BatchTooLargeError:
            return BatchTooLargeError(message, item_index=item_index)
        return error_type(response.status_code, message, item_index)
    if response.status_code >= 500:
        return ServerError(response.status_code, message, item_index)
    return SchemaError(response.status_code, message, item_index)


class RewardClient:
    """Talks to the reward service; one instance is safe to share."""

    def __init__(
        self,
        config: ClientConfig,
        cassette: Cassette | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.config = config
        self.cassette = cassette
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout,
            headers=self._headers(),
            transport=transport,
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_token:
            headers["Authorization"] = f"Bearer {self.config.auth_token}"
        return headers

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RewardClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # ------------------------------------------------------------- transport

    def _post(self, path: str, body: dict) -> dict:
        if self.cassette is not None and self.cassette.mode == "replay":
            return self.cassette.lookup(body)
        last_error: Exception | ServiceError | None = None
        attempts = 0
        for attempt in range(self.config.max_retries + 1):
            attempts = attempt + 1
            try:
                response = self._client.post(path, json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt < self.config.max_retries:
                    time.sleep(self.config.retry_backoff * (attempt + 1))
                continue
            if response.status_code in (502, 503):
                # the service marks judge hiccups retryable via Retry-After
                last_error = _error_from_response(response)
                if attempt < self.config.max_retries:
                    time.sleep(self._retry_delay(response, attempt))
                continue
            if response.status_code != 200:
                raise _error_from_response(response)
            payload = response.json()
            if self.cassette is not None and self.cassette.mode == "record":
                self.cassette.store(body, payload)
            return payload
        if isinstance(last_error, ServiceError):
            raise last_error
        raise TransportFailure(
            f"request failed after {attempts} attempt(s): {last_error}", attempts=attempts
        )

    def _retry_delay(self, response: httpx.Response, attempt: int) -> float:
        retry_after = response.headers.get("Retry-After")
        if retry_after is not None:
            try:
                return min(float(retry_after), _RETRY_AFTER_CAP)
            except ValueError:
                pass
        return self.config.retry_backoff * (attempt + 1)

    # ------------------------------------------------------------- operations

    def score_batch(
        self,
        items: Sequence[RewardItem | Mapping[str, Any]],
        want_advantages: bool = False,
        group_size: int | None = None,
        use_judge: bool = False,
    ) -> RewardBatch:
        """Score items in order; the response always has one record per item.

        Advantages need a group size that divides the batch; the check
        for batch size runs before any bytes leave the process.
        """
        if not items:
            raise ValueError("items must be nonempty")
        if len(items) > self.config.max_batch:
            raise BatchTooLargeError(
                f"batch of {len(items)} exceeds the client cap of {self.config.max_batch}; "
                "split it before submitting",
                status_code=0,  # never reached the wire
            )
        if want_advantages and group_size is None:
            raise ValueError("want_advantages requires group_size")

        options: dict = {}
        if use_judge:
            options["judge"] = True
        if group_size is not None:
            options["group_size"] = group_size
        body: dict = {"items": [_item_to_wire(item) for item in items]}
        if options:
            body["options"] = options

        payload = self._post("/v1/rewards", body)
        scored = tuple(ScoredItem.from_wire(entry) for entry in payload["items"])
        if len(scored) != len(items):
            raise ServerError(
                200, f"service returned {len(scored)} records for {len(items)} items"
            )
        meta = payload["metadata"]
        return RewardBatch(
            items=scored,
            metadata=Metadata(
                engine_version=meta["engine_version"],
                reward_spec_hash=meta["reward_spec_hash"],
                judge_model=meta.get("judge_model"),
            ),
        )

    def score_batches(
        self,
        batches: Sequence[Sequence[RewardItem | Mapping[str, Any]]],
        want_advantages: bool = False,
        group_size: int | None = None,
        use_judge: bool = False,
    ) -> list[RewardBatch]:
        """Submit several batches with at most max_in_flight on the wire."""
        if not batches:
            return []
        workers = max(1, min(self.config.max_in_flight, len(batches)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(self.score_batch, batch, want_advantages, group_size, use_judge)
                for batch in batches
            ]
            return [future.result() for future in futures]

    def health(self) -> HealthStatus:
        if self.cassette is not None and self.cassette.mode == "replay":
            return HealthStatus(
                status="ok", version="replay", uptime_seconds=0.0,
                judge_configured=False, judge_reachable=None,
            )
        try:
            response = self._client.get("/v1/health")
        except httpx.HTTPError as exc:
            raise TransportFailure(f"health check failed: {exc}", attempts=1) from exc
        if response.status_code != 200:
            raise _error_from_response(response)
        payload = response.json()
        return HealthStatus(
            status=payload["status"],
            version=payload["version"],
            uptime_seconds=payload["uptime_seconds"],
            judge_configured=payload["judge"]["configured"],
            judge_reachable=payload["judge"]["reachable"],
        )
