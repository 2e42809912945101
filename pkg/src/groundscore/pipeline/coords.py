"""Conversion between unit-interval and absolute pixel coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import Box, ImageDims

__all__ = ["NormalizedBox", "denormalize", "normalize", "round_half_away_from_zero"]


@dataclass(frozen=True)
class NormalizedBox:
    """Box with corners expressed as fractions of the image sides."""

    r_x1: float
    r_y1: float
    r_x2: float
    r_y2: float

    def __post_init__(self) -> None:
        for name in ("r_x1", "r_y1", "r_x2", "r_y2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if not self.r_x1 < self.r_x2:
            raise ValueError(f"need r_x1 < r_x2, got {self.r_x1!r} >= {self.r_x2!r}")
        if not self.r_y1 < self.r_y2:
            raise ValueError(f"need r_y1 < r_y2, got {self.r_y1!r} >= {self.r_y2!r}")


def round_half_away_from_zero(value: float) -> int:
    # round() would go to even; pixel coordinates want 0.5 -> 1, -0.5 -> -1
    if value >= 0:
        return math.floor(value + 0.5)
    return math.ceil(value - 0.5)


def denormalize(box: NormalizedBox, dims: ImageDims, *, round_to_int: bool = False) -> Box:
    """Scale unit-interval corners to absolute pixels: (W*rx, H*ry).

    Exact by default; rounding is opt-in and can reject boxes that
    collapse to zero width or height at integer resolution.
    """
    coords = (
        box.r_x1 * dims.width,
        box.r_y1 * dims.height,
        box.r_x2 * dims.width,
        box.r_y2 * dims.height,
    )
    if round_to_int:
        coords = tuple(float(round_half_away_from_zero(c)) for c in coords)
    return Box(*coords)


def normalize(box: Box, dims: ImageDims) -> NormalizedBox:
    """Inverse of denormalize for boxes inside the image bounds."""
    return NormalizedBox(
        box.x1 / dims.width,
        box.y1 / dims.height,
        box.x2 / dims.width,
        box.y2 / dims.height,
    )
