"""Benchmark dataset schema and loader.

Datasets are line-delimited JSON, one sample per line:

    {"id": "q0001", "image_ref": "images/q0001.jpg",
     "dims": {"width": 2048, "height": 1536},
     "category": "Ordering", "protocol": "Reasoning",
     "question": "...",
     "options": [["A", "..."], ["B", "..."]],
     "answer": "A",
     "target_boxes": [[100, 200, 340, 410]]}

Unknown fields are preserved on the sample and written back on
serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..geometry import Box, BoxSet, ImageDims
from ..parsing import OPTION_LETTERS

__all__ = [
    "CATEGORY_PROTOCOLS",
    "PERCEPTION_CATEGORIES",
    "REASONING_CATEGORIES",
    "BenchmarkSample",
    "DatasetError",
    "load_dataset",
    "sample_from_dict",
    "sample_to_dict",
    "write_dataset",
]

PERCEPTION_CATEGORIES = (
    "Attributes",
    "Material",
    "Physical State",
    "Object Retrieval",
    "OCR",
)
REASONING_CATEGORIES = (
    "Perspective Transform",
    "Ordering",
    "Contact & Occlusion",
    "Spatial Containment",
    "Comparison",
)
CATEGORY_PROTOCOLS: dict[str, str] = {
    **{c: "Perception" for c in PERCEPTION_CATEGORIES},
    **{c: "Reasoning" for c in REASONING_CATEGORIES},
}


class DatasetError(ValueError):
    """One or more dataset lines violate the sample schema."""

    def __init__(self, path: str | Path, violations: list[tuple[int, str]]):
        self.path = str(path)
        self.violations = violations
        shown = violations[:10]
        lines = "\n".join(f"  line {line_no}: {message}" for line_no, message in shown)
        more = "" if len(violations) <= 10 else f"\n  ... and {len(violations) - 10} more"
        super().__init__(f"{self.path}: {len(violations)} invalid sample(s)\n{lines}{more}")


@dataclass(frozen=True)
class BenchmarkSample:
    """One benchmark question with its traceable ground truth."""

    id: str
    image_ref: str
    dims: ImageDims
    category: str
    question: str
    options: tuple[tuple[str, str], ...]
    answer: str
    target_boxes: BoxSet
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.category not in CATEGORY_PROTOCOLS:
            raise ValueError(f"unknown category {self.category!r}")
        letters = [letter for letter, _ in self.options]
        if not 2 <= len(letters) <= 6:
            raise ValueError(f"need 2-6 options, got {len(letters)}")
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate option letters: {letters}")
        for letter in letters:
            if letter not in OPTION_LETTERS:
                raise ValueError(f"option letter {letter!r} not in {OPTION_LETTERS}")
        if self.answer not in letters:
            raise ValueError(f"answer {self.answer!r} not among option letters {letters}")
        if len(self.target_boxes) == 0:
            raise ValueError("target_boxes must be nonempty")

    @property
    def protocol(self) -> str:
        return CATEGORY_PROTOCOLS[self.category]

    @property
    def option_letters(self) -> tuple[str, ...]:
        return tuple(letter for letter, _ in self.options)


_KNOWN_FIELDS = {"id", "image_ref", "dims", "category", "protocol", "question", "options", "answer", "target_boxes"}


def sample_from_dict(data: dict) -> BenchmarkSample:
    for key in ("id", "image_ref", "dims", "category", "question", "options", "answer", "target_boxes"):
        if key not in data:
            raise ValueError(f"missing field {key!r}")
    dims = ImageDims(width=data["dims"]["width"], height=data["dims"]["height"])
    boxes = BoxSet(tuple(Box.from_xyxy(b) for b in data["target_boxes"]), role="ground_truth")
    options = tuple((str(letter), str(text)) for letter, text in data["options"])
    sample = BenchmarkSample(
        id=str(data["id"]),
        image_ref=str(data["image_ref"]),
        dims=dims,
        category=str(data["category"]),
        question=str(data["question"]),
        options=options,
        answer=str(data["answer"]),
        target_boxes=boxes,
        extra={k: v for k, v in data.items() if k not in _KNOWN_FIELDS},
    )
    if "protocol" in data and data["protocol"] != sample.protocol:
        raise ValueError(
            f"protocol {data['protocol']!r} inconsistent with category "
            f"{sample.category!r} (expected {sample.protocol!r})"
        )
    return sample


def sample_to_dict(sample: BenchmarkSample) -> dict:
    out = {
        "id": sample.id,
        "image_ref": sample.image_ref,
        "dims": {"width": sample.dims.width, "height": sample.dims.height},
        "category": sample.category,
        "protocol": sample.protocol,
        "question": sample.question,
        "options": [[letter, text] for letter, text in sample.options],
        "answer": sample.answer,
        "target_boxes": [list(b.as_xyxy()) for b in sample.target_boxes],
    }
    out.update(sample.extra)
    return out


def load_dataset(path: str | Path) -> list[BenchmarkSample]:
    """Load and validate a JSONL dataset; raises `DatasetError` on violations."""
    path = Path(path)
    samples: list[BenchmarkSample] = []
    violations: list[tuple[int, str]] = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                samples.append(sample_from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                violations.append((line_no, str(exc)))
    if violations:
        raise DatasetError(path, violations)
    return samples


def write_dataset(samples: list[BenchmarkSample], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps(sample_to_dict(sample), sort_keys=True) + "\n")
