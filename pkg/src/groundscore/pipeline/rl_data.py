"""Hard-sample filtering and counting-question construction for RL training data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..geometry import Box, BoxSet, ImageDims
from .seeding import record_rng

__all__ = [
    "ImageAnnotation",
    "CountingSample",
    "annotation_from_dict",
    "counting_sample_from_dict",
    "counting_sample_to_dict",
    "filter_hard",
    "make_counting_mcq",
    "read_annotations",
    "read_counting_samples",
    "write_counting_samples",
]

COUNT_MIN = 5
COUNT_MAX = 10
DISTRACTOR_OFFSETS = (1, 2, 3)
_MCQ_LETTERS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class ImageAnnotation:
    """Detection-style annotation: all labeled object boxes for one image."""

    id: str
    image_ref: str
    dims: ImageDims
    boxes_by_category: dict[str, tuple[Box, ...]]
    extra: dict = field(default_factory=dict, compare=False)


def annotation_from_dict(data: dict) -> ImageAnnotation:
    """Adapt a per-image object list: objects: [{category, box}, ...]."""
    grouped: dict[str, list[Box]] = {}
    for obj in data["objects"]:
        grouped.setdefault(obj["category"], []).append(Box.from_xyxy(obj["box"]))
    known = {"id", "image_ref", "dims", "objects"}
    return ImageAnnotation(
        id=str(data["id"]),
        image_ref=data["image_ref"],
        dims=ImageDims(data["dims"]["width"], data["dims"]["height"]),
        boxes_by_category={k: tuple(v) for k, v in grouped.items()},
        extra={k: v for k, v in data.items() if k not in known},
    )


@dataclass(frozen=True)
class CountingSample:
    """A how-many multiple-choice question with its evidence boxes."""

    id: str
    image_ref: str
    dims: ImageDims
    category: str
    gt_count: int
    gt_boxes: BoxSet
    options: tuple[tuple[str, int], ...]  # (letter, count), 4 entries
    answer: str

    def __post_init__(self) -> None:
        if not COUNT_MIN <= self.gt_count <= COUNT_MAX:
            raise ValueError(
                f"gt_count must lie in [{COUNT_MIN}, {COUNT_MAX}], got {self.gt_count}"
            )
        counts = [count for _, count in self.options]
        if len(self.options) != 4 or len(set(counts)) != 4:
            raise ValueError(f"need 4 distinct option counts, got {counts!r}")
        if self.gt_count not in counts:
            raise ValueError(f"gt_count {self.gt_count} missing from options {counts!r}")
        answer_counts = dict(self.options)
        if self.answer not in answer_counts or answer_counts[self.answer] != self.gt_count:
            raise ValueError(f"answer letter {self.answer!r} does not select gt_count")
        if len(self.gt_boxes) != self.gt_count:
            raise ValueError(
                f"gt_boxes has {len(self.gt_boxes)} boxes but gt_count is {self.gt_count}"
            )

    @property
    def question(self) -> str:
        return f"How many {self.category} are in the image?"


def filter_hard(
    samples: Sequence,
    verdicts: Mapping[str, Sequence[bool]],
    k: int = 1,
) -> list:
    """Retain samples the reference model got wrong in all of its first k attempts.

    Works on anything with an `.id`; verdicts map id to per-attempt
    correctness booleans and must supply at least k per sample.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    short = [s.id for s in samples if len(verdicts.get(s.id, ())) < k]
    if short:
        raise ValueError(
            f"missing verdicts (need {k}) for {len(short)} sample(s): " + ", ".join(short)
        )
    return [s for s in samples if not any(verdicts[s.id][:k])]


def make_counting_mcq(annotation: ImageAnnotation, seed: int) -> CountingSample | None:
    """Build one counting question from an annotation, or skip it.

    Only categories with a countable-but-nontrivial number of instances
    qualify; images without one are skipped rather than erroring, since
    that is the normal case in detection data.
    """
    qualifying = sorted(
        category
        for category, boxes in annotation.boxes_by_category.items()
        if COUNT_MIN <= len(boxes) <= COUNT_MAX
    )
    if not qualifying:
        return None
    rng = record_rng(seed, f"mcq:{annotation.id}")
    category = qualifying[rng.randrange(len(qualifying))]
    boxes = annotation.boxes_by_category[category]
    gt_count = len(boxes)

    near_counts = {max(gt_count + delta, 0) for delta in DISTRACTOR_OFFSETS} | {
        max(gt_count - delta, 0) for delta in DISTRACTOR_OFFSETS
    }
    pool = sorted(near_counts - {gt_count})
    distractors = rng.sample(pool, 3)
    counts = [gt_count, *distractors]
    rng.shuffle(counts)

    return CountingSample(
        id=annotation.id,
        image_ref=annotation.image_ref,
        dims=annotation.dims,
        category=category,
        gt_count=gt_count,
        gt_boxes=BoxSet(boxes, role="ground_truth"),
        options=tuple(zip(_MCQ_LETTERS, counts)),
        answer=_MCQ_LETTERS[counts.index(gt_count)],
    )


def counting_sample_to_dict(sample: CountingSample) -> dict:
    # Field names mirror the benchmark schema so downstream reward
    # scoring can consume these files directly.
    return {
        "id": sample.id,
        "image_ref": sample.image_ref,
        "dims": {"width": sample.dims.width, "height": sample.dims.height},
        "category": sample.category,
        "question": sample.question,
        "options": [[letter, str(count)] for letter, count in sample.options],
        "answer": sample.answer,
        "target_boxes": [list(box.as_xyxy()) for box in sample.gt_boxes],
        "gt_count": sample.gt_count,
    }


def counting_sample_from_dict(data: dict) -> CountingSample:
    return CountingSample(
        id=str(data["id"]),
        image_ref=data["image_ref"],
        dims=ImageDims(data["dims"]["width"], data["dims"]["height"]),
        category=data["category"],
        gt_count=int(data["gt_count"]),
        gt_boxes=BoxSet.from_xyxy(data["target_boxes"], role="ground_truth"),
        options=tuple((letter, int(count)) for letter, count in data["options"]),
        answer=data["answer"],
    )


def read_annotations(path: str | Path) -> list[ImageAnnotation]:
    annotations = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                annotations.append(annotation_from_dict(json.loads(line)))
    return annotations


def read_counting_samples(path: str | Path) -> list[CountingSample]:
    samples = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                samples.append(counting_sample_from_dict(json.loads(line)))
    return samples


def write_counting_samples(samples: Iterable[CountingSample], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps(counting_sample_to_dict(sample), sort_keys=True) + "\n")
