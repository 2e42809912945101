"""Deterministic, seeded dataset-construction transforms."""

from .coords import NormalizedBox, denormalize, normalize, round_half_away_from_zero
from .rl_data import (
    CountingSample,
    ImageAnnotation,
    annotation_from_dict,
    counting_sample_from_dict,
    counting_sample_to_dict,
    filter_hard,
    make_counting_mcq,
    read_annotations,
    read_counting_samples,
    write_counting_samples,
)
from .seeding import record_rng
from .trajectories import (
    DECOY_ATTEMPT_BUDGET,
    DECOY_MAX_SIDE_FRACTION,
    DECOY_MIN_SIDE_FRACTION,
    DEFAULT_REFLECTIVE_FRACTION,
    REFLECTION_MARKER,
    Trajectory,
    denormalize_trajectory,
    filter_multibox,
    inject_reflection,
    read_trajectories,
    sample_reflective_subset,
    trajectory_from_dict,
    trajectory_to_dict,
    write_trajectories,
)

__all__ = [
    "NormalizedBox",
    "denormalize",
    "normalize",
    "round_half_away_from_zero",
    "record_rng",
    "DECOY_ATTEMPT_BUDGET",
    "DECOY_MAX_SIDE_FRACTION",
    "DECOY_MIN_SIDE_FRACTION",
    "DEFAULT_REFLECTIVE_FRACTION",
    "REFLECTION_MARKER",
    "Trajectory",
    "denormalize_trajectory",
    "filter_multibox",
    "inject_reflection",
    "read_trajectories",
    "sample_reflective_subset",
    "trajectory_from_dict",
    "trajectory_to_dict",
    "write_trajectories",
    "CountingSample",
    "ImageAnnotation",
    "annotation_from_dict",
    "counting_sample_from_dict",
    "counting_sample_to_dict",
    "filter_hard",
    "make_counting_mcq",
    "read_annotations",
    "read_counting_samples",
    "write_counting_samples",
]
