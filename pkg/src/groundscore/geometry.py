"""Axis-aligned box arithmetic and the dual IoU reward.

All boxes are `[x1, y1, x2, y2]` in absolute pixel coordinates with the
origin at the top-left corner. Every function here is a pure function on
immutable values and is safe for unrestricted parallel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "Box",
    "ImageDims",
    "BoxSet",
    "DualIouResult",
    "iou",
    "max_iou_against",
    "dual_iou_reward",
    "relative_area",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle with strictly positive area.

    Degenerate (zero-area) and non-finite boxes are rejected at
    construction so that data errors surface where they happen, not
    deep inside a reward computation.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name, value in (("x1", self.x1), ("y1", self.y1), ("x2", self.x2), ("y2", self.y2)):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"box coordinate {name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"box coordinate {name} must be finite, got {value!r}")
        if not self.x1 < self.x2:
            raise ValueError(f"box requires x1 < x2, got x1={self.x1}, x2={self.x2}")
        if not self.y1 < self.y2:
            raise ValueError(f"box requires y1 < y2, got y1={self.y1}, y2={self.y2}")

    @classmethod
    def from_xyxy(cls, coords: Sequence[float]) -> "Box":
        if len(coords) != 4:
            raise ValueError(f"box needs exactly 4 coordinates, got {len(coords)}")
        return cls(float(coords[0]), float(coords[1]), float(coords[2]), float(coords[3]))

    def as_xyxy(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class ImageDims:
    """Input image resolution in pixels."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if not isinstance(self.width, int) or isinstance(self.width, bool) or self.width < 1:
            raise ValueError(f"image width must be a positive integer, got {self.width!r}")
        if not isinstance(self.height, int) or isinstance(self.height, bool) or self.height < 1:
            raise ValueError(f"image height must be a positive integer, got {self.height!r}")


BoxLike = Union["BoxSet", Sequence[Box]]


@dataclass(frozen=True)
class BoxSet:
    """An ordered, possibly empty collection of boxes.

    The role flag distinguishes prediction sets from ground-truth sets
    in contexts where that matters (datasets, diagnostics); the reward
    math itself only cares about the box order and values.
    """

    boxes: tuple[Box, ...] = ()
    role: str | None = None  # "prediction" | "ground_truth" | None

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for b in self.boxes:
            if not isinstance(b, Box):
                raise TypeError(f"BoxSet members must be Box, got {type(b).__name__}")
        if self.role not in (None, "prediction", "ground_truth"):
            raise ValueError(f"unknown box-set role {self.role!r}")

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self) -> Iterator[Box]:
        return iter(self.boxes)

    def __getitem__(self, index: int) -> Box:
        return self.boxes[index]

    @classmethod
    def from_xyxy(cls, coords: Iterable[Sequence[float]], role: str | None = None) -> "BoxSet":
        return cls(tuple(Box.from_xyxy(c) for c in coords), role=role)


def _as_boxes(value: BoxLike) -> tuple[Box, ...]:
    if isinstance(value, BoxSet):
        return value.boxes
    return tuple(value)


def iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes; symmetric, in [0, 1]."""
    inter_w = min(a.x2, b.x2) - max(a.x1, b.x1)
    inter_h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if inter_w <= 0.0 or inter_h <= 0.0:
        return 0.0
    inter = inter_w * inter_h
    union = a.area() + b.area() - inter
    return inter / union


def max_iou_against(candidates: BoxLike, target: Box) -> float:
    """Best IoU between any candidate box and the target; 0 for an empty set."""
    boxes = _as_boxes(candidates)
    if not boxes:
        return 0.0
    return max(iou(candidate, target) for candidate in boxes)


@dataclass(frozen=True)
class DualIouResult:
    """Recall and precision IoU terms; `combined` is always their mean."""

    recall: float
    precision: float

    @property
    def combined(self) -> float:
        return (self.recall + self.precision) / 2.0


def dual_iou_reward(preds: BoxLike, gts: BoxLike) -> DualIouResult:
    """Score predicted boxes against ground truths.

    The recall term averages, over ground truths, the best IoU any
    prediction achieves against that ground truth; the precision term
    averages, over predictions, the best IoU any ground truth achieves
    against that prediction. The combined value is their mean.

    An empty prediction set scores 0 on all three terms: no evidence,
    no reward. An empty ground-truth set is a malformed sample and
    raises ``ValueError``.
    """
    pred_boxes = _as_boxes(preds)
    gt_boxes = _as_boxes(gts)
    if not gt_boxes:
        raise ValueError("no ground truth boxes; cannot score a traceable sample without them")
    if not pred_boxes:
        return DualIouResult(recall=0.0, precision=0.0)
    recall = sum(max_iou_against(pred_boxes, gt) for gt in gt_boxes) / len(gt_boxes)
    precision = sum(max_iou_against(gt_boxes, pred) for pred in pred_boxes) / len(pred_boxes)
    return DualIouResult(recall=recall, precision=precision)


def relative_area(box: Box, dims: ImageDims) -> float:
    """Box area as a fraction of the image area.

    The box is not clipped to the image bounds, so values above 1 are
    possible for out-of-frame boxes; the caller decides whether that
    deserves a warning.
    """
    return box.area() / (dims.width * dims.height)
