"""Data-construction pipelines: coordinates, reflections, hard filtering, counting MCQs."""

from __future__ import annotations

import random

import pytest

from groundscore.geometry import Box, ImageDims, iou
from groundscore.parsing import parse_response
from groundscore.pipeline import (
    DECOY_MAX_SIDE_FRACTION,
    DECOY_MIN_SIDE_FRACTION,
    REFLECTION_MARKER,
    CountingSample,
    ImageAnnotation,
    NormalizedBox,
    Trajectory,
    annotation_from_dict,
    counting_sample_from_dict,
    counting_sample_to_dict,
    denormalize,
    denormalize_trajectory,
    filter_hard,
    filter_multibox,
    inject_reflection,
    make_counting_mcq,
    normalize,
    read_counting_samples,
    read_trajectories,
    record_rng,
    round_half_away_from_zero,
    sample_reflective_subset,
    trajectory_from_dict,
    trajectory_to_dict,
    write_counting_samples,
    write_trajectories,
)

DIMS = ImageDims(640, 480)


def _trajectory(ident: str = "t1", boxes=((10, 10, 80, 90), (200, 120, 320, 260))) -> Trajectory:
    parts: list = ["I see the first object at "]
    for i, quad in enumerate(boxes):
        parts.append(Box.from_xyxy(quad))
        parts.append(" and then " if i + 1 < len(boxes) else " which settles it.")
    return Trajectory(
        id=ident,
        image_ref=f"images/{ident}.jpg",
        dims=DIMS,
        question="Which object is closest?",
        parts=tuple(parts),
        answer="B",
    )


# ---------------------------------------------------------------- seeding


def test_record_rng_is_deterministic_and_purpose_scoped():
    a = record_rng(7, "decoy:t1").random()
    b = record_rng(7, "decoy:t1").random()
    assert a == b
    assert record_rng(7, "decoy:t1").random() != record_rng(8, "decoy:t1").random()
    assert record_rng(7, "decoy:t1").random() != record_rng(7, "subset:t1").random()


# ------------------------------------------------------------- coordinates


def test_round_half_away_from_zero():
    cases = {0.0: 0, 0.49: 0, 0.5: 1, 1.5: 2, 2.5: 3, 2.51: 3, -0.49: 0, -0.5: -1, -1.5: -2, -2.2: -2}
    for value, expected in cases.items():
        assert round_half_away_from_zero(value) == expected, value


def test_normalized_box_validation():
    NormalizedBox(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        NormalizedBox(0.0, 0.0, 1.2, 1.0)  # out of unit range
    with pytest.raises(ValueError):
        NormalizedBox(-0.1, 0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        NormalizedBox(0.6, 0.0, 0.6, 1.0)  # zero width
    with pytest.raises(ValueError):
        NormalizedBox(0.0, 0.9, 1.0, 0.1)  # inverted


def test_denormalize_known_values():
    dims = ImageDims(100, 50)
    assert denormalize(NormalizedBox(0.0, 0.0, 1.0, 1.0), dims).as_xyxy() == (0.0, 0.0, 100.0, 50.0)
    assert denormalize(NormalizedBox(0.25, 0.2, 0.75, 0.8), dims).as_xyxy() == (
        25.0, 10.0, 75.0, 40.0,
    )


def test_denormalize_round_to_int():
    dims = ImageDims(100, 100)
    box = denormalize(NormalizedBox(0.124, 0.125, 0.5, 0.8751), dims, round_to_int=True)
    assert box.as_xyxy() == (12.0, 13.0, 50.0, 88.0)  # halves round away from zero


def test_normalize_denormalize_round_trip():
    rng = random.Random(2024)
    dims = ImageDims(1920, 1080)
    for _ in range(300):
        x1, x2 = sorted(rng.uniform(0, dims.width) for _ in range(2))
        y1, y2 = sorted(rng.uniform(0, dims.height) for _ in range(2))
        if x2 - x1 < 1e-6 or y2 - y1 < 1e-6:
            continue
        box = Box(x1, y1, x2, y2)
        back = denormalize(normalize(box, dims), dims)
        for original, recovered in zip(box.as_xyxy(), back.as_xyxy()):
            assert abs(original - recovered) <= 1e-12 * max(1.0, abs(original))


# ------------------------------------------------------------ trajectories


def test_trajectory_accessors_and_render():
    trajectory = _trajectory()
    assert trajectory.box_count == 2
    raw = trajectory.render()
    parsed = parse_response(raw)
    assert parsed.format_ok
    assert parsed.choice == "B"
    assert parsed.boxes == trajectory.boxes


def test_trajectory_dict_round_trip():
    trajectory = _trajectory()
    data = trajectory_to_dict(trajectory)
    data["origin"] = "scene-graphs"
    again = trajectory_from_dict(data)
    assert again == trajectory
    assert again.extra == {"origin": "scene-graphs"}
    assert trajectory_to_dict(again)["origin"] == "scene-graphs"


def test_trajectory_rejects_bad_parts():
    with pytest.raises(TypeError, match="str or Box"):
        Trajectory(
            id="x", image_ref="x.jpg", dims=DIMS, question="?",
            parts=("ok", (1, 2, 3, 4)), answer="A",
        )


def test_filter_multibox():
    zero = Trajectory(id="z", image_ref="z.jpg", dims=DIMS, question="?", parts=("just text",), answer="A")
    one = _trajectory("one", boxes=((5, 5, 20, 20),))
    two = _trajectory("two")
    three = _trajectory("three", boxes=((5, 5, 20, 20), (30, 30, 60, 60), (70, 70, 90, 90)))
    kept = filter_multibox([zero, one, two, three])
    assert [t.id for t in kept] == ["two", "three"]


def test_inject_reflection_structure():
    trajectory = _trajectory()
    reflected = inject_reflection(trajectory, seed=11)

    # exactly one marker and one extra box
    texts = [p for p in reflected.parts if isinstance(p, str)]
    assert sum(REFLECTION_MARKER in t for t in texts) == 1
    assert reflected.box_count == trajectory.box_count + 1

    # original boxes keep their order; marker directly follows the decoy,
    # and the next part is one of the original boxes
    marker_at = next(i for i, p in enumerate(reflected.parts) if p == REFLECTION_MARKER)
    decoy = reflected.parts[marker_at - 1]
    assert isinstance(decoy, Box)
    follower = reflected.parts[marker_at + 1]
    assert isinstance(follower, Box) and follower in trajectory.boxes
    without_decoy = tuple(b for b in reflected.boxes if b != decoy)
    assert without_decoy == trajectory.boxes

    # everything else is untouched
    assert reflected.id == trajectory.id
    assert reflected.answer == trajectory.answer
    assert [p for p in trajectory.parts if isinstance(p, str)] == [
        t for t in texts if REFLECTION_MARKER not in t
    ]


def test_inject_reflection_decoy_properties():
    ceiling = 0.1
    placed = 0
    for seed in range(60):
        trajectory = _trajectory(f"traj-{seed}")
        reflected = inject_reflection(trajectory, seed=seed, iou_ceiling=ceiling)
        decoy = next(b for b in reflected.boxes if b not in trajectory.boxes)
        placed += 1
        for original in trajectory.boxes:
            assert iou(decoy, original) <= ceiling
        # decoy stays inside the image with sides in the configured band
        assert 0.0 <= decoy.x1 and decoy.x2 <= DIMS.width
        assert 0.0 <= decoy.y1 and decoy.y2 <= DIMS.height
        w_frac = (decoy.x2 - decoy.x1) / DIMS.width
        h_frac = (decoy.y2 - decoy.y1) / DIMS.height
        assert DECOY_MIN_SIDE_FRACTION <= w_frac <= DECOY_MAX_SIDE_FRACTION
        assert DECOY_MIN_SIDE_FRACTION <= h_frac <= DECOY_MAX_SIDE_FRACTION
    assert placed == 60


def test_inject_reflection_is_deterministic():
    trajectory = _trajectory()
    assert inject_reflection(trajectory, seed=3) == inject_reflection(trajectory, seed=3)
    assert inject_reflection(trajectory, seed=3) != inject_reflection(trajectory, seed=4)


def test_inject_reflection_requires_boxes():
    boxless = Trajectory(
        id="nb", image_ref="nb.jpg", dims=DIMS, question="?", parts=("thinking only",), answer="A"
    )
    with pytest.raises(ValueError, match="no boxes"):
        inject_reflection(boxless, seed=0)


def test_inject_reflection_budget_exhaustion():
    # a wall-to-wall original box overlaps every possible decoy, so a
    # zero ceiling can never be satisfied
    wall = Trajectory(
        id="wall", image_ref="wall.jpg", dims=DIMS, question="?",
        parts=(Box(0, 0, DIMS.width, DIMS.height),), answer="A",
    )
    with pytest.raises(ValueError, match="cannot place decoy"):
        inject_reflection(wall, seed=0, iou_ceiling=0.0)


def test_inject_reflection_validates_ceiling():
    with pytest.raises(ValueError, match="iou_ceiling"):
        inject_reflection(_trajectory(), seed=0, iou_ceiling=1.0)
    with pytest.raises(ValueError, match="iou_ceiling"):
        inject_reflection(_trajectory(), seed=0, iou_ceiling=-0.2)


def test_sample_reflective_subset():
    trajectories = [_trajectory(f"traj-{i}") for i in range(400)]
    subset = sample_reflective_subset(trajectories, seed=5)
    again = sample_reflective_subset(trajectories, seed=5)
    assert [t.id for t in subset] == [t.id for t in again]
    # default fraction is 4.7/35; 400 draws should land in a loose band
    assert 20 <= len(subset) <= 90
    # membership ignores input order
    shuffled = list(trajectories)
    random.Random(0).shuffle(shuffled)
    assert {t.id for t in sample_reflective_subset(shuffled, seed=5)} == {t.id for t in subset}
    assert sample_reflective_subset(trajectories, seed=5, fraction=0.0) == []
    assert len(sample_reflective_subset(trajectories, seed=5, fraction=1.0)) == 400
    with pytest.raises(ValueError, match="fraction"):
        sample_reflective_subset(trajectories, seed=5, fraction=1.5)


def test_denormalize_trajectory():
    trajectory = Trajectory(
        id="n", image_ref="n.jpg", dims=ImageDims(100, 50), question="?",
        parts=("at ", Box(0.25, 0.2, 0.75, 0.8), " done"), answer="A",
    )
    absolute = denormalize_trajectory(trajectory)
    assert absolute.boxes[0].as_xyxy() == (25.0, 10.0, 75.0, 40.0)
    assert absolute.parts[0] == "at "


def test_trajectory_jsonl_round_trip(tmp_path):
    trajectories = [inject_reflection(_trajectory(f"t{i}"), seed=1) for i in range(5)]
    path = tmp_path / "trajectories.jsonl"
    write_trajectories(trajectories, path)
    assert read_trajectories(path) == trajectories
    first = path.read_bytes()
    write_trajectories(trajectories, path)
    assert path.read_bytes() == first


# ---------------------------------------------------------------- hard filter


def test_filter_hard_first_attempt():
    samples = [_trajectory(f"s{i}") for i in range(4)]
    verdicts = {"s0": [True], "s1": [False], "s2": [False], "s3": [True]}
    kept = filter_hard(samples, verdicts)
    assert [s.id for s in kept] == ["s1", "s2"]


def test_filter_hard_k_attempts():
    samples = [_trajectory(f"s{i}") for i in range(3)]
    verdicts = {
        "s0": [False, False, True],  # wrong in first two
        "s1": [False, True, False],  # recovered on the second try
        "s2": [False, False, False],
    }
    assert [s.id for s in filter_hard(samples, verdicts, k=2)] == ["s0", "s2"]
    assert [s.id for s in filter_hard(samples, verdicts, k=3)] == ["s2"]


def test_filter_hard_validation():
    samples = [_trajectory("s0"), _trajectory("s1")]
    with pytest.raises(ValueError, match="k must be >= 1"):
        filter_hard(samples, {"s0": [True], "s1": [True]}, k=0)
    with pytest.raises(ValueError, match="missing verdicts.*s1"):
        filter_hard(samples, {"s0": [True]}, k=1)
    with pytest.raises(ValueError, match="missing verdicts"):
        filter_hard(samples, {"s0": [True], "s1": [True]}, k=2)


# --------------------------------------------------------------- counting MCQs


def _annotation(counts: dict[str, int], ident: str = "img1") -> ImageAnnotation:
    boxes_by_category = {}
    x = 0.0
    for category, count in counts.items():
        boxes = []
        for _ in range(count):
            boxes.append(Box(x, 0.0, x + 8.0, 8.0))
            x += 10.0
        boxes_by_category[category] = tuple(boxes)
    return ImageAnnotation(
        id=ident, image_ref=f"{ident}.jpg", dims=ImageDims(2000, 100),
        boxes_by_category=boxes_by_category,
    )


def test_make_counting_mcq_basic():
    sample = make_counting_mcq(_annotation({"bottle": 7, "person": 2}), seed=0)
    assert sample is not None
    assert sample.category == "bottle"  # only category in the countable band
    assert sample.gt_count == 7
    assert sample.question == "How many bottle are in the image?"
    assert len(sample.gt_boxes) == 7
    letters = [letter for letter, _ in sample.options]
    assert letters == ["A", "B", "C", "D"]
    counts = [count for _, count in sample.options]
    assert sample.gt_count in counts
    assert dict(sample.options)[sample.answer] == sample.gt_count
    for count in counts:
        assert count == 7 or abs(count - 7) in (1, 2, 3)


def test_make_counting_mcq_property_loop():
    rng = random.Random(99)
    built = 0
    for i in range(200):
        counts = {
            f"class{j}": rng.randint(1, 14) for j in range(rng.randint(1, 4))
        }
        annotation = _annotation(counts, ident=f"img-{i}")
        sample = make_counting_mcq(annotation, seed=7)
        qualifying = [c for c, n in counts.items() if 5 <= n <= 10]
        if not qualifying:
            assert sample is None
            continue
        built += 1
        assert sample.category in qualifying
        assert sample.gt_count == counts[sample.category]
        option_counts = [count for _, count in sample.options]
        assert len(set(option_counts)) == 4
        assert all(count >= 0 for count in option_counts)
        for count in option_counts:
            assert count == sample.gt_count or abs(count - sample.gt_count) in (1, 2, 3)
        assert dict(sample.options)[sample.answer] == sample.gt_count
    assert built > 50


def test_make_counting_mcq_deterministic():
    annotation = _annotation({"bottle": 7, "cup": 6, "person": 9})
    first = make_counting_mcq(annotation, seed=3)
    assert make_counting_mcq(annotation, seed=3) == first
    different = [make_counting_mcq(annotation, seed=s) for s in range(12)]
    assert len({d.options for d in different}) > 1


def test_make_counting_mcq_skips_unqualified():
    assert make_counting_mcq(_annotation({"person": 2}), seed=0) is None
    assert make_counting_mcq(_annotation({"crowd": 30}), seed=0) is None
    assert make_counting_mcq(_annotation({}), seed=0) is None


def test_annotation_from_dict():
    data = {
        "id": "img9",
        "image_ref": "img9.jpg",
        "dims": {"width": 640, "height": 480},
        "objects": [
            {"category": "cup", "box": [0, 0, 10, 10]},
            {"category": "cup", "box": [20, 0, 30, 10]},
            {"category": "plate", "box": [40, 0, 60, 20]},
        ],
        "license": "cc",
    }
    annotation = annotation_from_dict(data)
    assert set(annotation.boxes_by_category) == {"cup", "plate"}
    assert len(annotation.boxes_by_category["cup"]) == 2
    assert annotation.extra == {"license": "cc"}


def test_counting_sample_invariants():
    good = make_counting_mcq(_annotation({"bottle": 7}), seed=0)
    base = counting_sample_to_dict(good)
    assert counting_sample_from_dict(base) == good

    bad_count = dict(base, gt_count=3, target_boxes=base["target_boxes"][:3])
    with pytest.raises(ValueError, match="gt_count must lie"):
        counting_sample_from_dict(bad_count)

    with pytest.raises(ValueError, match="does not select"):
        counting_sample_from_dict(dict(base, answer="A" if base["answer"] != "A" else "B"))

    short_boxes = dict(base, target_boxes=base["target_boxes"][:5])
    with pytest.raises(ValueError, match="gt_boxes has 5"):
        counting_sample_from_dict(short_boxes)

    dup_options = dict(base, options=[["A", "7"], ["B", "7"], ["C", "8"], ["D", "9"]])
    with pytest.raises(ValueError, match="distinct"):
        counting_sample_from_dict(dup_options)


def test_counting_jsonl_round_trip(tmp_path):
    samples = [
        make_counting_mcq(_annotation({"bottle": 5 + (i % 6)}, ident=f"img{i}"), seed=2)
        for i in range(6)
    ]
    path = tmp_path / "counting.jsonl"
    write_counting_samples(samples, path)
    assert read_counting_samples(path) == samples
    first = path.read_bytes()
    write_counting_samples(samples, path)
    assert path.read_bytes() == first
