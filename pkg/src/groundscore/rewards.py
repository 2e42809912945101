"""Per-response reward breakdowns and rollout-group advantages.

The total reward for one response is the sum of three parts: a binary
accuracy reward, a binary format reward, and the dual IoU reward in
[0, 1], giving a total in [0, 3]. Samples without ground-truth boxes
keep all IoU components at 0 rather than rescaling, so mixed datasets
stay comparable.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import templates
from .geometry import BoxSet, dual_iou_reward
from .judge import JudgeClient
from .parsing import OPTION_LETTERS, ParsedResponse, parse_response

__all__ = [
    "FORMULA_VERSION",
    "PARSER_VERSION",
    "GroundTruth",
    "RewardBreakdown",
    "RolloutGroup",
    "accuracy_reward",
    "format_reward",
    "total_reward",
    "score_batch",
    "group_advantages",
    "compute_advantages",
    "reward_spec_hash",
]

FORMULA_VERSION = "dual-iou-v1"
PARSER_VERSION = "tagged-v1"

DEFAULT_ADVANTAGE_EPSILON = 1e-6


@dataclass(frozen=True)
class GroundTruth:
    """Reference signal for one training sample."""

    answer_kind: str  # "mcq" | "open_ended"
    answer: str
    target_boxes: BoxSet = field(default_factory=BoxSet)
    with_boxes: bool | None = None  # None: inferred from target_boxes
    question: str = ""  # forwarded to the judge prompt for open-ended grading

    def __post_init__(self) -> None:
        if self.answer_kind not in ("mcq", "open_ended"):
            raise ValueError(f"answer_kind must be 'mcq' or 'open_ended', got {self.answer_kind!r}")
        if self.answer_kind == "mcq" and self.answer not in OPTION_LETTERS:
            raise ValueError(f"mcq answer must be one of {OPTION_LETTERS}, got {self.answer!r}")
        if not isinstance(self.target_boxes, BoxSet):
            object.__setattr__(self, "target_boxes", BoxSet(tuple(self.target_boxes), role="ground_truth"))
        if self.with_boxes is None:
            object.__setattr__(self, "with_boxes", len(self.target_boxes) > 0)
        if self.with_boxes and len(self.target_boxes) == 0:
            raise ValueError("with_boxes=True requires nonempty target_boxes")


@dataclass(frozen=True)
class RewardBreakdown:
    """The three reward parts and their sum for one response."""

    acc: int
    format: int
    iou_recall: float
    iou_precision: float

    @property
    def iou(self) -> float:
        return (self.iou_recall + self.iou_precision) / 2.0

    @property
    def total(self) -> float:
        return self.acc + self.format + self.iou


def accuracy_reward(
    parsed: ParsedResponse, gt: GroundTruth, judge: JudgeClient | None = None
) -> int:
    """1 iff the final answer is correct.

    Multiple-choice answers are exact-matched against the extracted
    choice; open-ended answers go to the judge, whose transport errors
    propagate rather than being scored 0.
    """
    if gt.answer_kind == "mcq":
        return int(parsed.choice == gt.answer)
    if judge is None:
        raise ValueError("judge required for open-ended accuracy scoring")
    candidate = parsed.answer if parsed.answer is not None else parsed.raw
    verdict = judge.judge(question=gt.question, reference=gt.answer, candidate=candidate)
    return int(verdict.correct)


def format_reward(parsed: ParsedResponse) -> int:
    """1 iff the response follows the think/answer tag contract."""
    return int(parsed.format_ok)


def _breakdown(parsed: ParsedResponse, gt: GroundTruth, acc: int) -> RewardBreakdown:
    if gt.with_boxes:
        dual = dual_iou_reward(parsed.boxes, gt.target_boxes)
        recall, precision = dual.recall, dual.precision
    else:
        recall, precision = 0.0, 0.0
    return RewardBreakdown(
        acc=acc, format=format_reward(parsed), iou_recall=recall, iou_precision=precision
    )


def total_reward(
    parsed: ParsedResponse, gt: GroundTruth, judge: JudgeClient | None = None
) -> RewardBreakdown:
    """Compose accuracy, format, and dual IoU into one breakdown."""
    return _breakdown(parsed, gt, accuracy_reward(parsed, gt, judge))


def score_batch(
    items: Sequence[tuple[str | ParsedResponse, GroundTruth]],
    judge: JudgeClient | None = None,
    max_judge_concurrency: int = 8,
) -> list[RewardBreakdown]:
    """Score a batch of (response, ground truth) pairs, order preserved.

    Judge calls fan out with bounded parallelism; any judge failure
    fails the whole batch so trainers never see partial reward batches.
    """
    parsed_items = [
        (resp if isinstance(resp, ParsedResponse) else parse_response(resp), gt)
        for resp, gt in items
    ]
    needs_judge = [i for i, (_, gt) in enumerate(parsed_items) if gt.answer_kind == "open_ended"]
    if needs_judge and judge is None:
        raise ValueError("judge required: batch contains open-ended samples")

    acc_by_index: dict[int, int] = {}
    if needs_judge:
        workers = max(1, min(max_judge_concurrency, len(needs_judge)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                i: pool.submit(accuracy_reward, parsed_items[i][0], parsed_items[i][1], judge)
                for i in needs_judge
            }
            acc_by_index = {i: future.result() for i, future in futures.items()}

    return [
        _breakdown(parsed, gt, acc_by_index[i] if i in acc_by_index else accuracy_reward(parsed, gt))
        for i, (parsed, gt) in enumerate(parsed_items)
    ]


def group_advantages(
    rewards: Sequence[float], epsilon: float = DEFAULT_ADVANTAGE_EPSILON
) -> list[float]:
    """Group-relative advantages: (r - mean) / (population std + epsilon).

    A constant group yields exactly zero advantages, not merely values
    damped by the epsilon floor.
    """
    if len(rewards) < 2:
        raise ValueError(f"group too small: need at least 2 rollouts, got {len(rewards)}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    values = np.asarray(rewards, dtype=np.float64)
    if np.all(values == values[0]):
        return [0.0] * len(rewards)
    centered = values - values.mean()
    return (centered / (values.std() + epsilon)).tolist()


@dataclass
class RolloutGroup:
    """The G sampled responses to one prompt, scored and ready to normalize."""

    responses: list[tuple[ParsedResponse, RewardBreakdown]]
    advantages: list[float] | None = None

    def __post_init__(self) -> None:
        if len(self.responses) < 2:
            raise ValueError(f"group too small: need at least 2 rollouts, got {len(self.responses)}")

    @property
    def rewards(self) -> list[float]:
        return [breakdown.total for _, breakdown in self.responses]


def compute_advantages(
    group: RolloutGroup, epsilon: float = DEFAULT_ADVANTAGE_EPSILON
) -> list[float]:
    """Fill and return the group's advantages from its total rewards."""
    group.advantages = group_advantages(group.rewards, epsilon=epsilon)
    return group.advantages


def reward_spec_hash(judge_prompt_template: str = templates.JUDGE_PROMPT) -> str:
    """Fingerprint of the reward definition echoed in service responses.

    Covers the formula version, the parser version, and the judge prompt
    content, so training logs can prove which reward produced a run.
    """
    material = "|".join(
        [FORMULA_VERSION, PARSER_VERSION, templates.template_hash(judge_prompt_template)]
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:16]
