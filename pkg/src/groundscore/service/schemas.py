"""Wire types for the reward API.

Pydantic handles shape and range checks; semantic validation that needs
the geometry types (degenerate boxes, mcq letter sets) happens when
items are converted to domain objects, so those errors can name the
offending item index.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..geometry import BoxSet, ImageDims
from ..rewards import GroundTruth, RewardBreakdown
from ..parsing import ParsedResponse


class DimsModel(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)

    def to_domain(self) -> ImageDims:
        return ImageDims(self.width, self.height)


class GroundTruthModel(BaseModel):
    answer_kind: Literal["mcq", "open_ended"]
    answer: str
    boxes: list[list[float]] = Field(default_factory=list)
    dims: Optional[DimsModel] = None
    question: str = ""

    def to_domain(self) -> GroundTruth:
        return GroundTruth(
            answer_kind=self.answer_kind,
            answer=self.answer,
            target_boxes=BoxSet.from_xyxy(self.boxes, role="ground_truth"),
            question=self.question,
        )


class RewardItemModel(BaseModel):
    response_text: str
    ground_truth: GroundTruthModel


class RewardOptionsModel(BaseModel):
    judge: bool = False
    group_size: Optional[int] = Field(default=None, ge=2)


class RewardRequestModel(BaseModel):
    # The upper bound is deliberately not enforced here: an oversized
    # batch is 413, not a 400 schema error.
    items: list[RewardItemModel] = Field(min_length=1)
    options: RewardOptionsModel = Field(default_factory=RewardOptionsModel)


class BreakdownModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    acc: int
    format_: int = Field(alias="format")
    iou_recall: float
    iou_precision: float
    iou: float
    total: float

    @classmethod
    def from_domain(cls, breakdown: RewardBreakdown) -> "BreakdownModel":
        return cls(
            acc=breakdown.acc,
            format=breakdown.format,
            iou_recall=breakdown.iou_recall,
            iou_precision=breakdown.iou_precision,
            iou=breakdown.iou,
            total=breakdown.total,
        )


class DiagnosticsModel(BaseModel):
    format_ok: bool
    choice: Optional[str]
    boxes_extracted: int
    skipped_boxes: int

    @classmethod
    def from_parsed(cls, parsed: ParsedResponse) -> "DiagnosticsModel":
        return cls(
            format_ok=parsed.format_ok,
            choice=parsed.choice,
            boxes_extracted=len(parsed.boxes),
            skipped_boxes=parsed.skipped_boxes,
        )


class ScoredItemModel(BaseModel):
    breakdown: BreakdownModel
    diagnostics: DiagnosticsModel
    advantage: Optional[float] = None


class MetadataModel(BaseModel):
    engine_version: str
    reward_spec_hash: str
    judge_model: Optional[str] = None


class RewardResponseModel(BaseModel):
    items: list[ScoredItemModel]
    metadata: MetadataModel


class JudgeHealthModel(BaseModel):
    configured: bool
    reachable: Optional[bool] = None  # None when no judge is configured


class HealthResponse(BaseModel):
    status: Literal["ok", "degraded"]
    version: str
    uptime_seconds: float
    judge: JudgeHealthModel
