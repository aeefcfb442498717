import numpy as np
import pytest

from rigalign.models.alignment import (
    AlignmentAssignment,
    AlignmentRun,
    CameraFrameSchedule,
    ObjectAlignment,
    ScanAlignment,
    ScheduleError,
    Strategy,
    from_ranges,
    to_ranges,
)


def test_schedule():
    schedule = CameraFrameSchedule("front", np.arange(10) / 30 + 0.004, 30.0)

    assert len(schedule) == 10
    assert schedule.period == pytest.approx(1 / 30)


@pytest.mark.parametrize(
    "timestamps",
    [
        [0.0, 0.0333, 0.0333],
        [0.0, 0.0333, 0.02],
        [0.0, 0.0333, 0.1],
    ],
)
def test_schedule_raises(timestamps):
    with pytest.raises(ScheduleError):
        CameraFrameSchedule("front", timestamps, 30.0)


def test_schedule_tolerates_jitter():
    timestamps = np.arange(5) / 30 + [0, 0.001, -0.001, 0.002, 0]

    assert len(CameraFrameSchedule("front", timestamps, 30.0)) == 5


def test_schedule_shifted():
    schedule = CameraFrameSchedule("front", [0.0, 0.1, 0.2], 10.0).shifted(0.01)

    assert schedule.frame_timestamps.tolist() == pytest.approx([0.01, 0.11, 0.21])


@pytest.mark.parametrize(
    "indices, expected",
    [
        ([], []),
        ([3], [[3, 4]]),
        ([0, 1, 2, 5, 6, 9], [[0, 3], [5, 7], [9, 10]]),
        ([6, 5, 2, 1, 0, 9], [[0, 3], [5, 7], [9, 10]]),
    ],
)
def test_to_ranges(indices, expected):
    assert to_ranges(indices) == expected


def test_from_ranges():
    assert from_ranges([[0, 3], [5, 7]]).tolist() == [0, 1, 2, 5, 6]
    assert from_ranges([]).dtype == np.int64


@pytest.fixture
def assignment():
    return AlignmentAssignment(
        camera_id="front",
        chosen_frame_time=0.1333,
        point_indices=[4, 5, 6, 20],
        compensation_time=0.1333,
        representative_time=0.1321,
        compensated=True,
        per_object={7: ObjectAlignment(0.1333, 0.1333, 0.1321)},
        positions=np.zeros((4, 3)),
    )


def test_assignment_to_dict(assignment):
    assert assignment.to_dict() == {
        "camera_id": "front",
        "chosen_frame_time": 0.1333,
        "compensation_time": 0.1333,
        "representative_time": 0.1321,
        "compensated": True,
        "index_ranges": [[4, 7], [20, 21]],
        "per_object": {
            "7": {"frame_time": 0.1333, "compensation_time": 0.1333, "mean_time": 0.1321}
        },
    }


def test_assignment_from_dict_drops_positions(assignment):
    result = AlignmentAssignment.from_dict(assignment.to_dict())

    assert result == assignment
    assert result.positions is None
    assert result.point_indices.tolist() == [4, 5, 6, 20]
    assert result.per_object[7].mean_time == 0.1321


def test_assignment_raises_on_positions_mismatch():
    with pytest.raises(ValueError):
        AlignmentAssignment("front", 0.1, [1, 2], 0.1, 0.1, False, positions=np.zeros((3, 3)))


def test_scan_alignment_assignment(assignment):
    scan = ScanAlignment("ego", 2, 0.3, [assignment])

    assert scan.assignment("front") is assignment
    with pytest.raises(KeyError):
        scan.assignment("rear")


def test_run_coerces_strategy(assignment):
    run = AlignmentRun("abc", "frame", [ScanAlignment("ego", 0, 0.1, [assignment])])

    assert run.strategy is Strategy.FRAME
    assert AlignmentRun.from_dict(run.to_dict()) == run


def test_run_raises_on_unknown_strategy():
    with pytest.raises(ValueError):
        AlignmentRun("abc", "magic", [])


@pytest.mark.parametrize(
    "strategy, expected",
    [(Strategy.STAMP, False), (Strategy.FRAME, True), (Strategy.TARGET, True)],
)
def test_strategy_compensates(strategy, expected):
    assert strategy.compensates is expected
