"""Aggregate evaluation records into accuracy, localization, and distribution stats."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .. import templates
from ..geometry import relative_area
from ..version import __version__
from .dataset import CATEGORY_PROTOCOLS, BenchmarkSample
from .evaluate import EvalRecord

__all__ = ["EvalReport", "build_report", "write_report", "histogram_bin", "build_histogram"]

HISTOGRAM_BINS = 20  # fixed width 0.05 over [0, 1]

IOU_FORMULA_NOTE = (
    "Question-level IoU is (recall + precision) / 2 between extracted and "
    "ground-truth boxes; mIoU is its mean over all questions. A recall-only "
    "mean is reported alongside for comparison."
)


def histogram_bin(value: float) -> int:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"histogram value out of [0, 1]: {value}")
    # 1.0 belongs to the top bin, not a phantom 21st one
    return min(int(value * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)


def build_histogram(values: Sequence[float]) -> list[int]:
    counts = [0] * HISTOGRAM_BINS
    for value in values:
        counts[histogram_bin(value)] += 1
    return counts


def _pct(correct: int, total: int) -> float:
    return 0.0 if total == 0 else 100.0 * correct / total


def _mean(values: Sequence[float]) -> float:
    return 0.0 if not values else sum(values) / len(values)


@dataclass(frozen=True)
class EvalReport:
    """Everything a run produces besides the raw records.

    Counts are kept alongside percentages so exact aggregation checks
    (per-protocol totals summing to the overall) stay possible.
    """

    total: int
    correct: int
    unanswered: int
    per_category: dict[str, tuple[int, int]]  # category -> (correct, total)
    per_protocol: dict[str, tuple[int, int]]
    miou: float
    miou_recall_only: float
    per_category_miou: dict[str, float]
    iou_histograms: dict[str, list[int]]
    answer_letter_counts: dict[str, int]
    predicted_letter_counts: dict[str, int]
    instances_per_question: dict[int, int]
    relative_area_histogram: list[int]
    mean_relative_area: float
    prompt_template_name: str
    prompt_template_sha256: str
    seed: int
    engine_version: str = __version__

    @property
    def overall_accuracy(self) -> float:
        return _pct(self.correct, self.total)

    def category_accuracy(self, category: str) -> float:
        correct, total = self.per_category[category]
        return _pct(correct, total)

    def protocol_accuracy(self, protocol: str) -> float:
        correct, total = self.per_protocol[protocol]
        return _pct(correct, total)

    def to_dict(self) -> dict:
        return {
            "answer_letter_counts": dict(sorted(self.answer_letter_counts.items())),
            "engine_version": self.engine_version,
            "instances_per_question": {
                str(k): v for k, v in sorted(self.instances_per_question.items())
            },
            "iou_formula": IOU_FORMULA_NOTE,
            "iou_histograms": {k: list(v) for k, v in sorted(self.iou_histograms.items())},
            "mean_relative_area": self.mean_relative_area,
            "miou": self.miou,
            "miou_recall_only": self.miou_recall_only,
            "overall": {
                "accuracy_pct": self.overall_accuracy,
                "correct": self.correct,
                "total": self.total,
                "unanswered": self.unanswered,
            },
            "per_category": {
                category: {
                    "accuracy_pct": self.category_accuracy(category),
                    "correct": self.per_category[category][0],
                    "mean_iou": self.per_category_miou[category],
                    "protocol": CATEGORY_PROTOCOLS[category],
                    "total": self.per_category[category][1],
                }
                for category in sorted(self.per_category)
            },
            "per_protocol": {
                protocol: {
                    "accuracy_pct": self.protocol_accuracy(protocol),
                    "correct": counts[0],
                    "total": counts[1],
                }
                for protocol, counts in sorted(self.per_protocol.items())
            },
            "predicted_letter_counts": dict(sorted(self.predicted_letter_counts.items())),
            "prompt_template": {
                "name": self.prompt_template_name,
                "sha256": self.prompt_template_sha256,
            },
            "relative_area_histogram": list(self.relative_area_histogram),
            "seed": self.seed,
        }


def build_report(
    records: Sequence[EvalRecord],
    samples: Sequence[BenchmarkSample],
    *,
    prompt_template: str = templates.EVAL_PROMPT,
    seed: int = 0,
) -> EvalReport:
    """Aggregate records against their samples; pure, so regeneration is stable.

    Records and samples must cover the same ids exactly once each; order
    does not matter because records are matched to samples by id.
    """
    if not records:
        raise ValueError("cannot build a report from zero records")
    sample_by_id = {sample.id: sample for sample in samples}
    if len(sample_by_id) != len(samples):
        raise ValueError("duplicate sample ids")
    record_ids = [record.sample_id for record in records]
    if len(set(record_ids)) != len(record_ids):
        raise ValueError("duplicate record sample ids")
    missing = sorted(set(record_ids) - set(sample_by_id))
    extra = sorted(set(sample_by_id) - set(record_ids))
    if missing or extra:
        raise ValueError(
            f"records and samples do not align: records without samples {missing}, "
            f"samples without records {extra}"
        )

    per_category = {category: [0, 0] for category in CATEGORY_PROTOCOLS}
    per_protocol = {"Perception": [0, 0], "Reasoning": [0, 0]}
    category_ious: dict[str, list[float]] = {category: [] for category in CATEGORY_PROTOCOLS}
    split_ious: dict[str, list[float]] = {
        "all_correct": [],
        "all_incorrect": [],
        "perception_correct": [],
        "perception_incorrect": [],
        "reasoning_correct": [],
        "reasoning_incorrect": [],
    }
    predicted_counts: dict[str, int] = {}
    unanswered = 0
    correct_total = 0

    for record in records:
        sample = sample_by_id[record.sample_id]
        protocol = sample.protocol
        per_category[sample.category][1] += 1
        per_protocol[protocol][1] += 1
        if record.correct:
            correct_total += 1
            per_category[sample.category][0] += 1
            per_protocol[protocol][0] += 1
        if not record.answered:
            unanswered += 1
        category_ious[sample.category].append(record.question_iou)
        suffix = "correct" if record.correct else "incorrect"
        split_ious[f"all_{suffix}"].append(record.question_iou)
        split_ious[f"{protocol.lower()}_{suffix}"].append(record.question_iou)
        label = record.parsed.choice or "none"
        predicted_counts[label] = predicted_counts.get(label, 0) + 1

    answer_counts: dict[str, int] = {}
    instance_counts: dict[int, int] = {}
    question_areas = []
    for sample in samples:
        answer_counts[sample.answer] = answer_counts.get(sample.answer, 0) + 1
        n_boxes = len(sample.target_boxes)
        instance_counts[n_boxes] = instance_counts.get(n_boxes, 0) + 1
        question_areas.append(
            _mean([relative_area(box, sample.dims) for box in sample.target_boxes])
        )

    return EvalReport(
        total=len(records),
        correct=correct_total,
        unanswered=unanswered,
        per_category={k: (v[0], v[1]) for k, v in per_category.items()},
        per_protocol={k: (v[0], v[1]) for k, v in per_protocol.items()},
        miou=_mean([record.question_iou for record in records]),
        miou_recall_only=_mean([record.question_iou_recall for record in records]),
        per_category_miou={k: _mean(v) for k, v in category_ious.items()},
        iou_histograms={k: build_histogram(v) for k, v in split_ious.items()},
        answer_letter_counts=answer_counts,
        predicted_letter_counts=predicted_counts,
        instances_per_question=instance_counts,
        relative_area_histogram=build_histogram(question_areas),
        mean_relative_area=_mean(question_areas),
        prompt_template_name=prompt_template,
        prompt_template_sha256=templates.template_hash(prompt_template),
        seed=seed,
    )


def _write_categories_csv(report: EvalReport, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["category", "protocol", "total", "correct", "accuracy_pct", "mean_iou"])
        for category, protocol in CATEGORY_PROTOCOLS.items():
            correct, total = report.per_category[category]
            writer.writerow(
                [
                    category,
                    protocol,
                    total,
                    correct,
                    f"{report.category_accuracy(category):.4f}",
                    f"{report.per_category_miou[category]:.6f}",
                ]
            )


def _write_histograms_csv(report: EvalReport, path: Path) -> None:
    split_names = sorted(report.iou_histograms)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_low", "bin_high", *split_names, "relative_area"])
        width = 1.0 / HISTOGRAM_BINS
        for i in range(HISTOGRAM_BINS):
            writer.writerow(
                [
                    f"{i * width:.2f}",
                    f"{(i + 1) * width:.2f}",
                    *[report.iou_histograms[name][i] for name in split_names],
                    report.relative_area_histogram[i],
                ]
            )


def _write_markdown(report: EvalReport, path: Path) -> None:
    lines = [
        "# Evaluation report",
        "",
        f"- Engine version: {report.engine_version}",
        f"- Prompt template: {report.prompt_template_name} "
        f"(sha256 {report.prompt_template_sha256[:12]})",
        f"- Seed: {report.seed}",
        f"- IoU metric: {IOU_FORMULA_NOTE}",
        "",
        "## Overall",
        "",
        "| metric | value |",
        "| --- | --- |",
        f"| accuracy | {report.overall_accuracy:.2f}% ({report.correct}/{report.total}) |",
        f"| mIoU | {report.miou:.4f} |",
        f"| mIoU (recall only) | {report.miou_recall_only:.4f} |",
        f"| unanswered | {report.unanswered} |",
        f"| mean relative box area | {report.mean_relative_area:.4f} |",
        "",
        "## Per protocol",
        "",
        "| protocol | accuracy | correct | total |",
        "| --- | --- | --- | --- |",
    ]
    for protocol in ("Perception", "Reasoning"):
        correct, total = report.per_protocol[protocol]
        lines.append(
            f"| {protocol} | {report.protocol_accuracy(protocol):.2f}% | {correct} | {total} |"
        )
    lines += [
        "",
        "## Per category",
        "",
        "| category | protocol | accuracy | correct | total | mean IoU |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for category, protocol in CATEGORY_PROTOCOLS.items():
        correct, total = report.per_category[category]
        lines.append(
            f"| {category} | {protocol} | {report.category_accuracy(category):.2f}% "
            f"| {correct} | {total} | {report.per_category_miou[category]:.4f} |"
        )
    lines += [
        "",
        "## Distributions",
        "",
        "- Ground-truth answer letters: "
        + ", ".join(f"{k}: {v}" for k, v in sorted(report.answer_letter_counts.items())),
        "- Predicted letters: "
        + ", ".join(f"{k}: {v}" for k, v in sorted(report.predicted_letter_counts.items())),
        "- Target instances per question: "
        + ", ".join(f"{k}: {v}" for k, v in sorted(report.instances_per_question.items())),
        "",
    ]
    path.write_text("\n".join(lines), encoding="utf-8")


def write_report(report: EvalReport, out_dir: str | Path) -> dict[str, Path]:
    """Emit report.json, categories.csv, histograms.csv, and report.md.

    Every artifact is deterministic for a given report, so re-running
    produces byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "categories": out / "categories.csv",
        "histograms": out / "histograms.csv",
        "markdown": out / "report.md",
    }
    paths["json"].write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _write_categories_csv(report, paths["categories"])
    _write_histograms_csv(report, paths["histograms"])
    _write_markdown(report, paths["markdown"])
    return paths
