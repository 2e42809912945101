"""Batched HTTP reward service for external RL trainers."""

from .app import create_app
from .schemas import (
    BreakdownModel,
    DiagnosticsModel,
    GroundTruthModel,
    HealthResponse,
    RewardItemModel,
    RewardOptionsModel,
    RewardRequestModel,
    RewardResponseModel,
    ScoredItemModel,
)

__all__ = [
    "create_app",
    "BreakdownModel",
    "DiagnosticsModel",
    "GroundTruthModel",
    "HealthResponse",
    "RewardItemModel",
    "RewardOptionsModel",
    "RewardRequestModel",
    "RewardResponseModel",
    "ScoredItemModel",
]
