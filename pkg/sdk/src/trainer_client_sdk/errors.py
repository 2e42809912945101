"""Typed errors, one per failure class the service can answer with.

Every HTTP error carries the service's message and, when the service
named one, the index of the first offending item.
"""

from __future__ import annotations

__all__ = [
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


class RewardClientError(Exception):
    """Base class for everything this client raises on purpose."""


class TransportFailure(RewardClientError):
    """Could not complete the HTTP exchange after exhausting retries."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class ServiceError(RewardClientError):
    """An HTTP error response with the service's structured detail."""

    def __init__(self, status_code: int, message: str, item_index: int | None = None):
        super().__init__(f"{status_code}: {message}")
        self.status_code = status_code
        self.message = message
        self.item_index = item_index


class SchemaError(ServiceError):
    """400: the request or one of its items is malformed."""


class AuthError(ServiceError):
    """401: missing or wrong bearer token."""


class BatchTooLargeError(ServiceError):
    """413, or the client-side size check before any network call."""

    def __init__(self, message: str, item_index: int | None = None, status_code: int = 413):
        super().__init__(status_code, message, item_index)


class JudgeUnavailableError(ServiceError):
    """422: the batch needs a judge the service cannot offer."""


class JudgeUpstreamError(ServiceError):
    """502: the judge behind the service failed; retryable."""


class ServerError(ServiceError):
    """Any other 5xx from the service."""


class CassetteMiss(RewardClientError, KeyError):
    """Strict replay saw a request that was never recorded."""
