"""Typed client for the batch reward service.

Usage:

    from trainer_client_sdk import ClientConfig, RewardClient, RewardItem, GroundTruthSpec

    client = RewardClient(ClientConfig(base_url="http://localhost:8080"))
    batch = client.score_batch(
        [RewardItem(response_text=raw, ground_truth=GroundTruthSpec("mcq", "B", boxes=((0, 0, 2, 2),)))],
        want_advantages=True,
        group_size=8,
    )
    totals = [item.breakdown.total for item in batch]
"""

from .cassette import Cassette, canonical_json, request_hash
from .client import (
    Breakdown,
    ClientConfig,
    Diagnostics,
    GroundTruthSpec,
    HealthStatus,
    Metadata,
    RewardBatch,
    RewardClient,
    RewardItem,
    ScoredItem,
)
from .errors import (
    AuthError,
    BatchTooLargeError,
    CassetteMiss,
    JudgeUnavailableError,
    JudgeUpstreamError,
    RewardClientError,
    SchemaError,
    ServerError,
    ServiceError,
    TransportFailure,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Cassette",
    "canonical_json",
    "request_hash",
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
    "RewardClientError",
    "TransportFailure",
    "ServiceError",
    "SchemaError",
    "AuthError",
    "BatchTooLargeError",
    "JudgeUnavailableError",
    "JudgeUpstreamError",
    "ServerError",
    "CassetteMiss",
]
