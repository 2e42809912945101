"""Run a model over a dataset and score each response."""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .. import templates
from ..clients import TransportError
from ..geometry import BoxSet, dual_iou_reward
from ..parsing import ParsedResponse, parse_response
from .dataset import BenchmarkSample
from .model import ModelClient

__all__ = ["EvalRecord", "question_iou", "evaluate", "write_records", "read_records"]


@dataclass(frozen=True)
class EvalRecord:
    """Scored outcome for one benchmark question.

    question_iou is the (recall + precision) / 2 combined score used as
    the headline localization metric; question_iou_recall keeps the
    recall-only term so reports can show both aggregations side by side.
    """

    sample_id: str
    parsed: ParsedResponse
    correct: bool
    question_iou: float
    question_iou_recall: float
    latency: float
    answered: bool = True  # False when the model never produced a response


def question_iou(parsed: ParsedResponse, gt_boxes: BoxSet) -> float:
    """Combined dual IoU between a response's boxes and the ground truth.

    A response without boxes scores 0; the ground-truth set must be
    nonempty (benchmark samples guarantee that).
    """
    if len(gt_boxes) == 0:
        raise ValueError("ground-truth box set must be nonempty")
    if not parsed.boxes:
        return 0.0
    return dual_iou_reward(parsed.boxes, gt_boxes).combined


def render_prompt(sample: BenchmarkSample, template_name: str = templates.EVAL_PROMPT) -> str:
    options = "\n".join(f"{letter}. {text}" for letter, text in sample.options)
    return templates.load_template(template_name).substitute(
        question=sample.question, options=options
    )


def _score_one(
    model: ModelClient, sample: BenchmarkSample, template_name: str
) -> EvalRecord:
    prompt = render_prompt(sample, template_name)
    start = time.perf_counter()
    try:
        raw = model.query(sample, prompt)
    except TransportError:
        # Unanswered questions score 0 instead of being dropped so
        # reports stay comparable across runs.
        return EvalRecord(
            sample_id=sample.id,
            parsed=parse_response(""),
            correct=False,
            question_iou=0.0,
            question_iou_recall=0.0,
            latency=time.perf_counter() - start,
            answered=False,
        )
    latency = time.perf_counter() - start
    parsed = parse_response(raw, allowed=sample.option_letters)
    if parsed.boxes:
        scored = dual_iou_reward(parsed.boxes, sample.target_boxes)
        combined, recall = scored.combined, scored.recall
    else:
        combined = recall = 0.0
    return EvalRecord(
        sample_id=sample.id,
        parsed=parsed,
        correct=parsed.choice == sample.answer,
        question_iou=combined,
        question_iou_recall=recall,
        latency=latency,
    )


def evaluate(
    model: ModelClient,
    samples: Sequence[BenchmarkSample],
    prompt_template: str = templates.EVAL_PROMPT,
    seed: int = 0,
    concurrency: int = 1,
) -> list[EvalRecord]:
    """One record per sample, in sample order.

    Queries run with bounded parallelism; scoring itself is pure, so
    results depend only on the model transcripts. The seed is recorded
    for provenance and forwarded to models that sample.
    """
    del seed  # provenance only; deterministic models and cassettes ignore it
    if concurrency <= 1:
        return [_score_one(model, sample, prompt_template) for sample in samples]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        futures = [pool.submit(_score_one, model, sample, prompt_template) for sample in samples]
        return [future.result() for future in futures]


def _record_to_dict(record: EvalRecord) -> dict:
    return {
        "sample_id": record.sample_id,
        "raw_response": record.parsed.raw,
        "choice": record.parsed.choice,
        "correct": record.correct,
        "question_iou": record.question_iou,
        "question_iou_recall": record.question_iou_recall,
        "latency": record.latency,
        "answered": record.answered,
    }


def _record_from_dict(data: dict) -> EvalRecord:
    # The stored choice wins over re-extraction: it was computed against
    # the sample's own option letters, which the file does not carry.
    parsed = dataclasses.replace(parse_response(data["raw_response"]), choice=data["choice"])
    return EvalRecord(
        sample_id=data["sample_id"],
        parsed=parsed,
        correct=bool(data["correct"]),
        question_iou=float(data["question_iou"]),
        question_iou_recall=float(data["question_iou_recall"]),
        latency=float(data["latency"]),
        answered=bool(data.get("answered", True)),
    )


def write_records(records: Sequence[EvalRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(_record_to_dict(record), sort_keys=True) + "\n")


def read_records(path: str | Path) -> list[EvalRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(_record_from_dict(json.loads(line)))
    return records
