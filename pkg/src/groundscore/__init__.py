"""Reward engine for visually grounded reasoning.

The core reward stack (geometry, parsing, rewards, judging) lives at the
top level; the benchmark harness, data pipeline, and HTTP service are
subpackages imported on demand:

    from groundscore.harness import load_dataset, evaluate
    from groundscore.pipeline import inject_reflection
    from groundscore.service import create_app
"""

from .clients import Cassette, CassetteMiss, ChatCompletionsClient, TransportError
from .geometry import (
    Box,
    BoxSet,
    DualIouResult,
    ImageDims,
    dual_iou_reward,
    iou,
    max_iou_against,
    relative_area,
)
from .judge import JudgeClient, JudgeVerdict
from .parsing import (
    OPTION_LETTERS,
    ExtractedBoxes,
    ParsedResponse,
    extract_boxes,
    extract_choice,
    format_box,
    parse_response,
    render_response,
)
from .rewards import (
    DEFAULT_ADVANTAGE_EPSILON,
    FORMULA_VERSION,
    PARSER_VERSION,
    GroundTruth,
    RewardBreakdown,
    RolloutGroup,
    accuracy_reward,
    compute_advantages,
    format_reward,
    group_advantages,
    reward_spec_hash,
    score_batch,
    total_reward,
)
from .version import __version__

__all__ = [
    "__version__",
    "Box",
    "BoxSet",
    "DualIouResult",
    "ImageDims",
    "iou",
    "max_iou_against",
    "dual_iou_reward",
    "relative_area",
    "OPTION_LETTERS",
    "ExtractedBoxes",
    "ParsedResponse",
    "extract_boxes",
    "extract_choice",
    "format_box",
    "parse_response",
    "render_response",
    "GroundTruth",
    "RewardBreakdown",
    "RolloutGroup",
    "FORMULA_VERSION",
    "PARSER_VERSION",
    "DEFAULT_ADVANTAGE_EPSILON",
    "accuracy_reward",
    "format_reward",
    "total_reward",
    "score_batch",
    "group_advantages",
    "compute_advantages",
    "reward_spec_hash",
    "JudgeClient",
    "JudgeVerdict",
    "Cassette",
    "CassetteMiss",
    "ChatCompletionsClient",
    "TransportError",
]
