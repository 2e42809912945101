"""Turn raw model output into a structured record.

A well-formed response is exactly one ``<think>...</think>`` block
followed by exactly one ``<answer>...</answer>`` block, with nothing but
whitespace outside the blocks and no repeated or nested tags. Parsing is
total: malformed input never raises, it just yields ``format_ok=False``
with best-effort field extraction.

Box syntax
    Bracketed or parenthesized quadruples of numbers, e.g.
    ``[10, 20, 30, 40]`` or ``(10, 20, 30, 40)``. This also covers the
    JSON-style ``"bbox_2d": [10, 20, 30, 40]`` convention, since the
    quadruple itself is bracketed. Quadruples that do not form a valid
    box (x1 >= x2, y1 >= y2) are skipped and counted.

Choice extraction precedence
    1. the entire trimmed answer is a single allowed letter
       (case-insensitive);
    2. exactly one distinct allowed uppercase letter appears standalone
       (not adjacent to letters or digits), e.g. ``(C)``, ``C.``,
       ``answer is C``;
    if several distinct letters tie at a tier, the result is ambiguous
    and no choice is returned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import Box

__all__ = [
    "OPTION_LETTERS",
    "ParsedResponse",
    "ExtractedBoxes",
    "parse_response",
    "extract_boxes",
    "extract_choice",
    "format_box",
    "render_response",
]

# The full multiple-choice alphabet; datasets may allow any nonempty subset.
OPTION_LETTERS: tuple[str, ...] = ("A", "B", "C", "D", "E", "F")

_NUM = r"-?(?:\d+\.?\d*|\.\d+)"
_QUAD = rf"({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})"
_BOX_RE = re.compile(rf"\[\s*{_QUAD}\s*\]|\(\s*{_QUAD}\s*\)")

_THINK_OPEN, _THINK_CLOSE = "<think>", "</think>"
_ANSWER_OPEN, _ANSWER_CLOSE = "<answer>", "</answer>"
_STRICT_RE = re.compile(
    r"\A\s*<think>(?P<think>.*?)</think>\s*<answer>(?P<answer>.*?)</answer>\s*\Z",
    re.DOTALL,
)
_THINK_BLOCK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ANSWER_BLOCK_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)


@dataclass(frozen=True)
class ExtractedBoxes:
    """Boxes found in a piece of text, in textual order."""

    boxes: tuple[Box, ...]
    skipped: int  # quadruples that matched the syntax but were not valid boxes

    def __len__(self) -> int:
        return len(self.boxes)


@dataclass(frozen=True)
class ParsedResponse:
    """Structured view of one model response."""

    raw: str
    think: str | None = None
    answer: str | None = None
    boxes: tuple[Box, ...] = ()
    choice: str | None = None
    format_ok: bool = False
    skipped_boxes: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))


def extract_boxes(text: str) -> ExtractedBoxes:
    """Find every box-shaped quadruple in `text`, preserving order.

    Duplicates are preserved; invalid quadruples are skipped and tallied.
    """
    boxes: list[Box] = []
    skipped = 0
    for match in _BOX_RE.finditer(text):
        values = [g for g in match.groups() if g is not None]
        try:
            boxes.append(Box.from_xyxy([float(v) for v in values]))
        except ValueError:
            skipped += 1
    return ExtractedBoxes(boxes=tuple(boxes), skipped=skipped)


def extract_choice(answer_text: str, allowed: Sequence[str] = OPTION_LETTERS) -> str | None:
    """Pick the selected option letter out of free-form answer text.

    Returns None when no allowed letter is found or when several
    distinct allowed letters compete at the same precedence tier.
    """
    allowed_set = {letter.upper() for letter in allowed}
    if not allowed_set:
        raise ValueError("allowed letter set must be nonempty")

    trimmed = answer_text.strip()
    if trimmed.upper() in allowed_set:
        return trimmed.upper()

    # Standalone uppercase letters only: a lowercase "a" is usually the
    # article, not the option.
    standalone = re.findall(r"(?<![A-Za-z0-9])([A-F])(?![A-Za-z0-9])", answer_text)
    found = {letter for letter in standalone if letter in allowed_set}
    if len(found) == 1:
        return found.pop()
    return None


def _tag_counts_ok(raw: str) -> bool:
    return (
        raw.count(_THINK_OPEN) == 1
        and raw.count(_THINK_CLOSE) == 1
        and raw.count(_ANSWER_OPEN) == 1
        and raw.count(_ANSWER_CLOSE) == 1
    )


def parse_response(raw: str, allowed: Sequence[str] = OPTION_LETTERS) -> ParsedResponse:
    """Parse one raw response; never raises.

    When the response is well-formed, boxes are taken from the think
    segment only and the choice from the answer segment. Otherwise boxes
    come from the whole text, and the choice from the answer block if
    one is recoverable, else from the whole text.
    """
    strict = _STRICT_RE.match(raw)
    format_ok = bool(strict) and _tag_counts_ok(raw)

    if format_ok:
        think = strict.group("think")
        answer = strict.group("answer")
        extraction = extract_boxes(think)
        choice = extract_choice(answer, allowed)
    else:
        think_match = _THINK_BLOCK_RE.search(raw)
        answer_match = _ANSWER_BLOCK_RE.search(raw)
        think = think_match.group(1) if think_match else None
        answer = answer_match.group(1) if answer_match else None
        extraction = extract_boxes(raw)
        choice = extract_choice(answer if answer is not None else raw, allowed)

    return ParsedResponse(
        raw=raw,
        think=think,
        answer=answer,
        boxes=extraction.boxes,
        choice=choice,
        format_ok=format_ok,
        skipped_boxes=extraction.skipped,
    )


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def format_box(box: Box) -> str:
    """Canonical text rendering of a box: ``[x1, y1, x2, y2]``."""
    return "[{}, {}, {}, {}]".format(*(_format_number(v) for v in box.as_xyxy()))


def render_response(think_parts: Iterable[str | Box], answer: str) -> str:
    """Serialize think parts (text or boxes) and an answer into the tag format.

    ``parse_response`` recovers the boxes and choice from the result;
    this is the canonical serializer the round-trip property is stated
    against, and the same rendering the data pipeline uses.
    """
    rendered: list[str] = []
    for part in think_parts:
        rendered.append(format_box(part) if isinstance(part, Box) else part)
    return f"<think>{''.join(rendered)}</think><answer>{answer}</answer>"
