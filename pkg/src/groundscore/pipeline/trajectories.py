"""Reasoning-trajectory records and the reflection-injection transform."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..geometry import Box, ImageDims, iou
from ..parsing import render_response
from .coords import NormalizedBox, denormalize
from .seeding import record_rng

__all__ = [
    "REFLECTION_MARKER",
    "Trajectory",
    "trajectory_from_dict",
    "trajectory_to_dict",
    "filter_multibox",
    "inject_reflection",
    "sample_reflective_subset",
    "denormalize_trajectory",
    "read_trajectories",
    "write_trajectories",
]

REFLECTION_MARKER = "Wait, this box seems to be wrong"

DECOY_ATTEMPT_BUDGET = 1000
DECOY_MIN_SIDE_FRACTION = 0.02
DECOY_MAX_SIDE_FRACTION = 0.20
# Observed reflective-subset share of the multi-box pool; override per run.
DEFAULT_REFLECTIVE_FRACTION = 4.7 / 35.0


@dataclass(frozen=True)
class Trajectory:
    """One grounded-reasoning training record.

    `parts` is the think segment as an ordered mix of text fragments and
    boxes; `render()` serializes it into the tagged response format.
    """

    id: str
    image_ref: str
    dims: ImageDims
    question: str
    parts: tuple[str | Box, ...]
    answer: str
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        for part in self.parts:
            if not isinstance(part, (str, Box)):
                raise TypeError(f"trajectory parts must be str or Box, got {type(part).__name__}")

    @property
    def boxes(self) -> tuple[Box, ...]:
        return tuple(part for part in self.parts if isinstance(part, Box))

    @property
    def box_count(self) -> int:
        return len(self.boxes)

    def render(self) -> str:
        return render_response(self.parts, self.answer)


def trajectory_from_dict(data: dict) -> Trajectory:
    known = {"id", "image_ref", "dims", "question", "parts", "answer"}
    parts: list[str | Box] = []
    for part in data["parts"]:
        if "text" in part:
            parts.append(part["text"])
        elif "box" in part:
            parts.append(Box.from_xyxy(part["box"]))
        else:
            raise ValueError(f"trajectory part needs a 'text' or 'box' key, got {part!r}")
    return Trajectory(
        id=str(data["id"]),
        image_ref=data["image_ref"],
        dims=ImageDims(data["dims"]["width"], data["dims"]["height"]),
        question=data["question"],
        parts=tuple(parts),
        answer=data["answer"],
        extra={k: v for k, v in data.items() if k not in known},
    )


def trajectory_to_dict(trajectory: Trajectory) -> dict:
    parts = [
        {"box": list(part.as_xyxy())} if isinstance(part, Box) else {"text": part}
        for part in trajectory.parts
    ]
    return {
        "id": trajectory.id,
        "image_ref": trajectory.image_ref,
        "dims": {"width": trajectory.dims.width, "height": trajectory.dims.height},
        "question": trajectory.question,
        "parts": parts,
        "answer": trajectory.answer,
        **trajectory.extra,
    }


def filter_multibox(trajectories: Iterable[Trajectory]) -> list[Trajectory]:
    """Keep only trajectories citing at least two boxes, in input order."""
    return [t for t in trajectories if t.box_count >= 2]


def _sample_decoy(rng, dims: ImageDims) -> Box:
    w = rng.uniform(DECOY_MIN_SIDE_FRACTION, DECOY_MAX_SIDE_FRACTION) * dims.width
    h = rng.uniform(DECOY_MIN_SIDE_FRACTION, DECOY_MAX_SIDE_FRACTION) * dims.height
    x1 = rng.uniform(0.0, dims.width - w)
    y1 = rng.uniform(0.0, dims.height - h)
    return Box(x1, y1, x1 + w, y1 + h)


def inject_reflection(
    trajectory: Trajectory, seed: int, iou_ceiling: float = 0.1
) -> Trajectory:
    """Insert a deliberately wrong box plus a self-correction marker.

    The decoy lands immediately before a seeded-random original box and
    must overlap every original box at IoU <= iou_ceiling, found by
    rejection sampling; a crowded image can exhaust the attempt budget.
    Original parts are untouched.
    """
    if not 0.0 <= iou_ceiling < 1.0:
        raise ValueError(f"iou_ceiling must lie in [0, 1), got {iou_ceiling!r}")
    originals = trajectory.boxes
    if not originals:
        raise ValueError(f"trajectory {trajectory.id!r} has no boxes to reflect on")

    rng = record_rng(seed, f"decoy:{trajectory.id}")
    target_ordinal = rng.randrange(len(originals))
    decoy = None
    for _ in range(DECOY_ATTEMPT_BUDGET):
        candidate = _sample_decoy(rng, trajectory.dims)
        if all(iou(candidate, original) <= iou_ceiling for original in originals):
            decoy = candidate
            break
    if decoy is None:
        raise ValueError(
            f"cannot place decoy for trajectory {trajectory.id!r}: "
            f"no placement under iou_ceiling={iou_ceiling} in {DECOY_ATTEMPT_BUDGET} attempts"
        )

    seen = 0
    insert_at = None
    for index, part in enumerate(trajectory.parts):
        if isinstance(part, Box):
            if seen == target_ordinal:
                insert_at = index
                break
            seen += 1
    assert insert_at is not None  # target_ordinal < len(originals)
    new_parts = (
        trajectory.parts[:insert_at] + (decoy, REFLECTION_MARKER) + trajectory.parts[insert_at:]
    )
    return dataclasses.replace(trajectory, parts=new_parts)


def sample_reflective_subset(
    trajectories: Iterable[Trajectory],
    seed: int,
    fraction: float = DEFAULT_REFLECTIVE_FRACTION,
) -> list[Trajectory]:
    """Seeded per-record draw of which trajectories get a reflection.

    Membership depends only on (seed, record id), so the subset is
    stable under reordering and parallel sharding of the input.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction!r}")
    return [
        t for t in trajectories if record_rng(seed, f"subset:{t.id}").random() < fraction
    ]


def denormalize_trajectory(trajectory: Trajectory, *, round_to_int: bool = False) -> Trajectory:
    """Convert unit-interval box parts to absolute pixels in place."""
    converted: list[str | Box] = []
    for part in trajectory.parts:
        if isinstance(part, Box):
            normalized = NormalizedBox(part.x1, part.y1, part.x2, part.y2)
            converted.append(denormalize(normalized, trajectory.dims, round_to_int=round_to_int))
        else:
            converted.append(part)
    return dataclasses.replace(trajectory, parts=tuple(converted))


def read_trajectories(path: str | Path) -> list[Trajectory]:
    trajectories = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                trajectories.append(trajectory_from_dict(json.loads(line)))
    return trajectories


def write_trajectories(trajectories: Sequence[Trajectory], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for trajectory in trajectories:
            handle.write(json.dumps(trajectory_to_dict(trajectory), sort_keys=True) + "\n")
