"""Benchmark harness: dataset loading, model querying, scoring, reports."""

from .consensus import ConsensusError, consensus_filter
from .dataset import (
    CATEGORY_PROTOCOLS,
    PERCEPTION_CATEGORIES,
    REASONING_CATEGORIES,
    BenchmarkSample,
    DatasetError,
    load_dataset,
    sample_from_dict,
    sample_to_dict,
    write_dataset,
)
from .evaluate import EvalRecord, evaluate, question_iou, read_records, write_records
from .model import ChatVisionModel, ModelClient
from .report import EvalReport, build_report, write_report

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
    "ModelClient",
    "ChatVisionModel",
    "EvalRecord",
    "evaluate",
    "question_iou",
    "read_records",
    "write_records",
    "EvalReport",
    "build_report",
    "write_report",
    "ConsensusError",
    "consensus_filter",
]
