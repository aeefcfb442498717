import math
from dataclasses import replace

import numpy as np
import pytest

from rigalign.lib.alignment import align_recording
from rigalign.lib.metrics import (
    EmptyMatchesError,
    SceneMismatchError,
    best_ious,
    bootstrap_difference,
    center_offset,
    evaluate_alignment,
    iou,
    match_run,
    metrics_row,
    recall_at,
)
from rigalign.models.alignment import AlignmentRun
from rigalign.models.boxes import Box2D
from rigalign.models.evaluation import THRESHOLDS, MatchRecord
from rigalign.models.motion import Motion
from rigalign.models.scene import ObjectsConfig, VehicleConfig
from rigalign.sim import simulate_scene

from testing_utils import small_scene_config


def match(object_id, iou_value, offset=None, scan_index=0):
    return MatchRecord(
        "ego", scan_index, "front", object_id, None, Box2D(0, 0, 10, 10), iou_value, offset
    )


def raster_iou(a, b, size=64):
    """IoU and union area from counting pixels."""
    def mask(box):
        grid = np.zeros((size, size), dtype=bool)
        grid[int(box.min_y) : int(box.max_y), int(box.min_x) : int(box.max_x)] = True
        return grid

    mask_a, mask_b = mask(a), mask(b)
    union = (mask_a | mask_b).sum()
    return (mask_a & mask_b).sum() / union, union


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((0, 0, 10, 10), (0, 0, 10, 10), 1.0),
        ((0, 0, 10, 10), (5, 0, 15, 10), 1 / 3),
        ((0, 0, 10, 10), (2, 2, 8, 8), 0.36),
        ((0, 0, 10, 10), (10, 0, 20, 10), 0.0),
        ((0, 0, 10, 10), (20, 20, 30, 30), 0.0),
    ],
)
def test_iou(a, b, expected):
    assert iou(Box2D(*a), Box2D(*b)) == pytest.approx(expected)
    assert iou(Box2D(*b), Box2D(*a)) == pytest.approx(expected)


def test_iou_matches_raster_oracle():
    rng = np.random.default_rng(0)

    for _ in range(1000):
        boxes = []
        for _ in range(2):
            x = np.sort(rng.choice(64, 2, replace=False))
            y = np.sort(rng.choice(64, 2, replace=False))
            boxes.append(Box2D(x[0], y[0], x[1], y[1]))
        expected, union = raster_iou(*boxes)

        assert abs(iou(*boxes) - expected) <= 2 / union


def test_center_offset():
    assert center_offset(Box2D(0, 0, 10, 10), Box2D(3, 4, 13, 14)) == pytest.approx(5.0)


def test_best_ious_keeps_best_per_box():
    matches = [match(1, 0.2), match(1, 0.6), match(2, 0.1), match(1, 0.6, scan_index=1)]

    assert best_ious(matches) == [0.6, 0.1, 0.6]


@pytest.mark.parametrize(
    "threshold, expected",
    [(0.0, 1.0), (0.3, 0.75), (0.5, 0.5), (0.7, 0.25), (0.95, 0.0)],
)
def test_recall_at(threshold, expected):
    matches = [match(1, 0.2), match(2, 0.4), match(3, 0.5), match(4, 0.9)]

    assert recall_at(matches, threshold) == pytest.approx(expected)


def test_recall_at_raises_on_empty():
    with pytest.raises(EmptyMatchesError):
        recall_at([], 0.5)


def test_recall_never_increases_with_threshold():
    rng = np.random.default_rng(1)
    thresholds = np.linspace(0, 1, 21)

    for _ in range(1000):
        ious = rng.uniform(0, 1, rng.integers(1, 20))
        matches = [match(i, float(value)) for i, value in enumerate(ious)]
        recalls = [recall_at(matches, threshold) for threshold in thresholds]

        assert all(later <= earlier for earlier, later in zip(recalls, recalls[1:]))


def test_metrics_row():
    matches = [match(1, 0.2, 10.0), match(2, 0.4, 20.0), match(3, 0.0, None)]

    row = metrics_row("frame", matches)

    assert row.average_iou == pytest.approx(0.2)
    assert row.recall_at == pytest.approx({0.3: 1 / 3, 0.5: 0.0, 0.7: 0.0})
    assert row.mean_center_offset == pytest.approx(15.0)
    assert row.count == 3


def test_metrics_row_without_offsets():
    row = metrics_row("stamp", [match(1, 0.0)])

    assert math.isnan(row.mean_center_offset)


def test_metrics_row_raises_on_empty():
    with pytest.raises(EmptyMatchesError):
        metrics_row("stamp", [])


def test_bootstrap_difference_significant():
    rng = np.random.default_rng(2)
    baseline = [match(i, float(v)) for i, v in enumerate(rng.uniform(0.2, 0.4, 50))]
    better = [
        match(m.object_id, min(1.0, m.iou + float(rng.uniform(0.1, 0.2))))
        for m in baseline
    ]

    result = bootstrap_difference("target", better, "stamp", baseline, seed=3)

    assert result.low > 0
    assert result.low <= result.mean_difference <= result.high
    assert result.significant


def test_bootstrap_difference_is_deterministic():
    rng = np.random.default_rng(4)
    baseline = [match(i, float(v)) for i, v in enumerate(rng.uniform(0, 1, 30))]
    other = [match(i, float(v)) for i, v in enumerate(rng.uniform(0, 1, 30))]

    first = bootstrap_difference("frame", other, "stamp", baseline, seed=5)
    second = bootstrap_difference("frame", other, "stamp", baseline, seed=5)

    assert first == second


def test_bootstrap_difference_constant():
    baseline = [match(1, 0.2), match(2, 0.3)]
    other = [match(1, 0.3), match(2, 0.4)]

    result = bootstrap_difference("frame", other, "stamp", baseline)

    assert (result.low, result.mean_difference, result.high) == pytest.approx(
        (0.1, 0.1, 0.1)
    )


def test_bootstrap_difference_raises_without_shared_matches():
    with pytest.raises(EmptyMatchesError):
        bootstrap_difference("frame", [match(1, 0.2)], "stamp", [match(2, 0.2)])


@pytest.fixture(scope="module")
def static_recording():
    return simulate_scene(
        small_scene_config(
            objects=ObjectsConfig(
                count=4, speed_range=(0.0, 0.0), distance_range=(8.0, 15.0)
            ),
            vehicles=(VehicleConfig("ego", Motion(z=0.5)),),
        )
    )


@pytest.fixture(scope="module")
def moving_recording():
    return simulate_scene(
        small_scene_config(
            seed=7,
            objects=ObjectsConfig(
                count=6, speed_range=(15.0, 20.0), distance_range=(8.0, 15.0)
            ),
            vehicles=(VehicleConfig("ego", Motion(speed=10.0, z=0.5)),),
        )
    )


def test_evaluate_alignment_static_scene_agrees(static_recording):
    runs = [
        align_recording(static_recording, strategy)
        for strategy in ["target", "stamp", "frame"]
    ]

    table = evaluate_alignment(static_recording, runs)

    assert [row.strategy for row in table.rows] == ["stamp", "frame", "target"]
    for row in table.rows:
        assert row.average_iou == pytest.approx(1.0)
        assert row.mean_center_offset == pytest.approx(0.0, abs=1e-6)
    assert [c.strategy for c in table.comparisons] == ["frame", "target"]


def test_evaluate_alignment_moving_scene(moving_recording):
    runs = [align_recording(moving_recording, strategy) for strategy in ["stamp", "target"]]

    table = evaluate_alignment(moving_recording, runs, seed=1)

    stamp, target = table.rows
    assert stamp.count == target.count > 0
    assert target.average_iou >= stamp.average_iou
    assert table.recording_id == moving_recording.recording_id


def test_evaluate_alignment_camera_subset(static_recording):
    run = align_recording(static_recording, "frame")
    camera_id = match_run(static_recording, run)[0].camera_id

    table = evaluate_alignment(static_recording, [run], camera_ids=[camera_id])

    expected = match_run(static_recording, run, [camera_id])
    assert table.rows[0].count == len(expected)
    assert {m.camera_id for m in expected} == {camera_id}
    assert table.comparisons == []


def test_evaluate_alignment_raises_on_foreign_run(static_recording, moving_recording):
    run = align_recording(moving_recording, "frame", vehicles=["ego"])

    with pytest.raises(SceneMismatchError):
        evaluate_alignment(static_recording, [run])


def test_evaluate_alignment_raises_on_duplicate_strategy(static_recording):
    run = align_recording(static_recording, "frame")

    with pytest.raises(SceneMismatchError):
        evaluate_alignment(static_recording, [run, run])


def test_evaluate_alignment_raises_on_different_scans(static_recording):
    runs = [
        align_recording(static_recording, "frame"),
        AlignmentRun(static_recording.recording_id, "stamp", []),
    ]

    with pytest.raises(SceneMismatchError):
        evaluate_alignment(static_recording, runs)


def test_evaluate_alignment_raises_on_run_of_another_strategy(static_recording):
    frame_run = align_recording(static_recording, "frame")
    mislabelled = AlignmentRun(static_recording.recording_id, "stamp", frame_run.scans)

    with pytest.raises(SceneMismatchError):
        evaluate_alignment(static_recording, [mislabelled])


def moving_scene_config(seed):
    return small_scene_config(
        seed=seed,
        duration=0.5,
        objects=ObjectsConfig(count=8, speed_range=(5.0, 20.0), distance_range=(8.0, 15.0)),
        vehicles=(VehicleConfig("ego", Motion(speed=10.0, z=0.5)),),
    )


@pytest.fixture(scope="module")
def pooled_matches():
    """Match records of several scenes, keyed apart by the scene seed."""
    matches = {strategy: [] for strategy in ["stamp", "frame", "target"]}
    for seed in [11, 12, 13, 14]:
        recording = simulate_scene(moving_scene_config(seed))
        for strategy, records in matches.items():
            run = align_recording(recording, strategy)
            records.extend(
                replace(m, vehicle=f"{seed}/{m.vehicle}") for m in match_run(recording, run)
            )
    return matches


def test_strategies_ordered_over_scenes(pooled_matches):
    stamp, frame, target = (
        metrics_row(strategy, records) for strategy, records in pooled_matches.items()
    )

    assert stamp.count == frame.count == target.count > 0
    assert target.average_iou >= frame.average_iou - 0.005
    assert frame.average_iou > stamp.average_iou
    for threshold in THRESHOLDS:
        assert target.recall_at[threshold] >= frame.recall_at[threshold] - 0.02
        assert frame.recall_at[threshold] >= stamp.recall_at[threshold]
    assert target.mean_center_offset <= frame.mean_center_offset + 0.5
    assert frame.mean_center_offset < stamp.mean_center_offset


def test_frame_beats_stamp_with_bootstrap_separation(pooled_matches):
    comparison = bootstrap_difference(
        "frame", pooled_matches["frame"], "stamp", pooled_matches["stamp"], seed=1
    )

    assert comparison.low > 0
    assert comparison.significant
