"""Command-line front end.

Heavy lifting stays in the library; commands wire files to functions.
Reward scoring for trainers should normally go through the HTTP service
(`serve`); `rewards score` exists for offline batch work.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import config as config_mod
from . import templates
from .geometry import BoxSet
from .harness import (
    ChatVisionModel,
    build_report,
    consensus_filter,
    evaluate,
    load_dataset,
    read_records,
    write_dataset,
    write_records,
    write_report,
)
from .parsing import parse_response
from .pipeline import (
    denormalize_trajectory,
    filter_hard,
    filter_multibox,
    inject_reflection,
    make_counting_mcq,
    read_annotations,
    read_trajectories,
    sample_reflective_subset,
    write_counting_samples,
    write_trajectories,
)
from .pipeline.trajectories import DEFAULT_REFLECTIVE_FRACTION
from .rewards import GroundTruth, score_batch
from .version import __version__


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Grounded-reasoning reward engine: evaluation, data transforms, serving."""


def _load_verdicts(path: str) -> dict[str, list[bool]]:
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    return {str(k): [bool(v) for v in vs] for k, vs in data.items()}


# ---------------------------------------------------------------- eval


@main.group()
def eval() -> None:
    """Run and report benchmark evaluations."""


@eval.command("run")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def eval_run(dataset: str, config_path: str, seed: int, out_dir: str) -> None:
    """Evaluate the configured model on DATASET and write records + report."""
    cfg = config_mod.load_eval_config(config_path)
    endpoint = cfg.model
    model = ChatVisionModel(
        base_url=endpoint.base_url,
        model=endpoint.model,
        api_key=endpoint.api_key(),
        timeout=endpoint.timeout,
        max_retries=endpoint.max_retries,
        cassette=endpoint.cassette(),
        image_root=cfg.image_root,
    )
    samples = load_dataset(dataset)
    records = evaluate(
        model,
        samples,
        prompt_template=cfg.prompt_template,
        seed=seed,
        concurrency=cfg.concurrency,
    )
    out = Path(out_dir)
    write_records(records, out / "records.jsonl")
    report = build_report(records, samples, prompt_template=cfg.prompt_template, seed=seed)
    write_report(report, out)
    click.echo(
        f"accuracy {report.overall_accuracy:.2f}% ({report.correct}/{report.total}), "
        f"mIoU {report.miou:.4f}, unanswered {report.unanswered} -> {out}"
    )


@eval.command("report")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def eval_report(
    records_path: str, dataset: str, config_path: str | None, seed: int, out_dir: str
) -> None:
    """Rebuild the report for RECORDS_PATH against DATASET; pure, so stable."""
    template = templates.EVAL_PROMPT
    if config_path is not None:
        template = config_mod.load_eval_config(config_path).prompt_template
    records = read_records(records_path)
    samples = load_dataset(dataset)
    report = build_report(records, samples, prompt_template=template, seed=seed)
    write_report(report, out_dir)
    click.echo(f"report for {len(records)} records -> {out_dir}")


@eval.command("filter-consensus")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.argument("verdicts", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, type=int, help="provenance only")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def eval_filter_consensus(
    dataset: str, verdicts: str, seed: int, config_path: str | None, out: str
) -> None:
    """Drop samples all four reference models answered correctly.

    VERDICTS is a JSON object mapping sample id to four booleans.
    """
    del seed, config_path  # the rule itself has no knobs
    samples = load_dataset(dataset)
    kept = consensus_filter(samples, _load_verdicts(verdicts))
    write_dataset(kept, out)
    click.echo(f"kept {len(kept)}/{len(samples)} samples -> {out}")


# ---------------------------------------------------------------- parser


@main.group()
def parser() -> None:
    """Response-parser utilities."""


@parser.command("conformance")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, type=int, help="provenance only")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def parser_conformance(corpus: str, seed: int, config_path: str | None, out: str | None) -> None:
    """Check the parser against a fixture corpus of expected extractions.

    Each CORPUS line holds raw plus expected_format_ok, expected_choice,
    expected_boxes, and optionally expected_skipped. Exits 1 on any
    mismatch.
    """
    del seed, config_path
    results = []
    failures = 0
    with open(corpus, encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            line = line.strip()
            if not line:
                continue
            fixture = json.loads(line)
            parsed = parse_response(fixture["raw"])
            mismatches = []
            if parsed.format_ok != fixture["expected_format_ok"]:
                mismatches.append(f"format_ok: got {parsed.format_ok}")
            if parsed.choice != fixture["expected_choice"]:
                mismatches.append(f"choice: got {parsed.choice!r}")
            got_boxes = [list(box.as_xyxy()) for box in parsed.boxes]
            want_boxes = [[float(v) for v in box] for box in fixture["expected_boxes"]]
            if got_boxes != want_boxes:
                mismatches.append(f"boxes: got {got_boxes}")
            if "expected_skipped" in fixture and parsed.skipped_boxes != fixture["expected_skipped"]:
                mismatches.append(f"skipped: got {parsed.skipped_boxes}")
            if mismatches:
                failures += 1
            results.append({"index": index, "ok": not mismatches, "mismatches": mismatches})
    if out is not None:
        with open(out, "w", encoding="utf-8") as handle:
            for result in results:
                handle.write(json.dumps(result, sort_keys=True) + "\n")
    click.echo(f"{len(results) - failures}/{len(results)} fixtures pass")
    if failures:
        sys.exit(1)


# ---------------------------------------------------------------- data


@main.group()
def data() -> None:
    """Deterministic dataset-construction transforms."""


_in_opt = click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
_out_opt = click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
_seed_opt = click.option("--seed", default=0, show_default=True, type=int)


@data.command("denormalize")
@_in_opt
@_out_opt
@_seed_opt
@click.option("--round-to-int", is_flag=True, help="round half away from zero to integer pixels")
def data_denormalize(in_path: str, out_path: str, seed: int, round_to_int: bool) -> None:
    """Scale unit-interval trajectory boxes to absolute pixels."""
    del seed  # transform is seed-free
    trajectories = read_trajectories(in_path)
    converted = [denormalize_trajectory(t, round_to_int=round_to_int) for t in trajectories]
    write_trajectories(converted, out_path)
    click.echo(f"denormalized {len(converted)} trajectories -> {out_path}")


@data.command("filter-multibox")
@_in_opt
@_out_opt
@_seed_opt
def data_filter_multibox(in_path: str, out_path: str, seed: int) -> None:
    """Keep only trajectories citing two or more boxes."""
    del seed
    trajectories = read_trajectories(in_path)
    kept = filter_multibox(trajectories)
    write_trajectories(kept, out_path)
    click.echo(f"kept {len(kept)}/{len(trajectories)} trajectories -> {out_path}")


@data.command("inject-reflection")
@_in_opt
@_out_opt
@_seed_opt
@click.option("--iou-ceiling", default=0.1, show_default=True, type=float)
@click.option(
    "--fraction",
    default=DEFAULT_REFLECTIVE_FRACTION,
    show_default=True,
    type=float,
    help="seeded share of trajectories that receive a decoy; 1.0 for all",
)
def data_inject_reflection(
    in_path: str, out_path: str, seed: int, iou_ceiling: float, fraction: float
) -> None:
    """Insert decoy boxes plus correction markers into a seeded subset."""
    trajectories = read_trajectories(in_path)
    chosen = {t.id for t in sample_reflective_subset(trajectories, seed, fraction)}
    output = [
        inject_reflection(t, seed, iou_ceiling) if t.id in chosen else t for t in trajectories
    ]
    write_trajectories(output, out_path)
    click.echo(f"injected reflections into {len(chosen)}/{len(output)} -> {out_path}")


@data.command("filter-hard")
@_in_opt
@_out_opt
@_seed_opt
@click.option("--verdicts", "verdicts_path", required=True, type=click.Path(exists=True))
@click.option("--attempts", default=1, show_default=True, type=int)
def data_filter_hard(
    in_path: str, out_path: str, seed: int, verdicts_path: str, attempts: int
) -> None:
    """Keep samples the reference model failed in all of its attempts."""
    del seed
    samples = load_dataset(in_path)
    kept = filter_hard(samples, _load_verdicts(verdicts_path), k=attempts)
    write_dataset(kept, out_path)
    click.echo(f"kept {len(kept)}/{len(samples)} hard samples -> {out_path}")


@data.command("make-counting")
@_in_opt
@_out_opt
@_seed_opt
def data_make_counting(in_path: str, out_path: str, seed: int) -> None:
    """Turn detection annotations into counting multiple-choice questions."""
    annotations = read_annotations(in_path)
    samples = []
    skipped = 0
    for annotation in annotations:
        sample = make_counting_mcq(annotation, seed)
        if sample is None:
            skipped += 1
        else:
            samples.append(sample)
    write_counting_samples(samples, out_path)
    click.echo(f"built {len(samples)} counting questions ({skipped} skipped) -> {out_path}")


# ---------------------------------------------------------------- rewards / serve


@main.group()
def rewards() -> None:
    """Offline reward scoring."""


@rewards.command("score")
@_in_opt
@_out_opt
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def rewards_score(in_path: str, out_path: str, config_path: str | None) -> None:
    """Score a JSONL batch of {response_text, ground_truth} pairs locally.

    Open-ended items need a judge section in the config file.
    """
    judge = None
    if config_path is not None:
        service_cfg = config_mod.load_service_config(config_path)
        from .service.app import _judge_from_config

        judge = _judge_from_config(service_cfg)
    pairs = []
    with open(in_path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            item = json.loads(line)
            gt_raw = item["ground_truth"]
            pairs.append(
                (
                    item["response_text"],
                    GroundTruth(
                        answer_kind=gt_raw["answer_kind"],
                        answer=gt_raw["answer"],
                        target_boxes=BoxSet.from_xyxy(
                            gt_raw.get("boxes", []), role="ground_truth"
                        ),
                        question=gt_raw.get("question", ""),
                    ),
                )
            )
    breakdowns = score_batch(pairs, judge=judge)
    with open(out_path, "w", encoding="utf-8") as handle:
        for breakdown in breakdowns:
            handle.write(
                json.dumps(
                    {
                        "acc": breakdown.acc,
                        "format": breakdown.format,
                        "iou_recall": breakdown.iou_recall,
                        "iou_precision": breakdown.iou_precision,
                        "iou": breakdown.iou,
                        "total": breakdown.total,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    click.echo(f"scored {len(breakdowns)} responses -> {out_path}")


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--host", default=None, help="override the configured bind host")
@click.option("--port", default=None, type=int, help="override the configured port")
def serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the reward service."""
    import uvicorn

    from .service.app import create_app

    cfg = (
        config_mod.load_service_config(config_path)
        if config_path is not None
        else config_mod.ServiceConfig()
    )
    uvicorn.run(
        create_app(cfg),
        host=host if host is not None else cfg.host,
        port=port if port is not None else cfg.port,
        log_level="info",
    )


if __name__ == "__main__":
    main()
