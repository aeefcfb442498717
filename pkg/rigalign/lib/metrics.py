"""Projected-box metrics: IoU, Recall@IoU and center offset per alignment strategy.

The annotated 3D box of an object is its ground-truth box at the mean true
acquisition time of its points, expressed the way the points were: in the
LiDAR frame at the compensation time when the strategy compensates, as raw
geometry otherwise. It is projected with the camera extrinsic and compared
with the ground-truth 2D box of the frame the strategy chose.
"""

import math
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from rigalign.lib import loggers
from rigalign.lib.alignment import nearest_frame
from rigalign.lib.deskew import lidar_pose, relative_motion
from rigalign.models.alignment import AlignmentAssignment, AlignmentRun, Strategy
from rigalign.models.base import DataError
from rigalign.models.boxes import Box2D
from rigalign.models.camera import project_box3d
from rigalign.models.evaluation import (
    THRESHOLDS,
    Comparison,
    MatchRecord,
    MetricsRow,
    MetricsTable,
)
from rigalign.models.scene import INS, LIDAR, SceneRecording, VehicleRecording
from rigalign.models.transform import compose_all, invert


BOOTSTRAP_RESAMPLES = 2000

CONFIDENCE_LEVEL = 0.95


logger = loggers.from_path(__file__)


class EmptyMatchesError(DataError):
    pass


class SceneMismatchError(DataError):
    pass


def iou(a: Box2D, b: Box2D) -> float:
    width = min(a.max_x, b.max_x) - max(a.min_x, b.min_x)
    height = min(a.max_y, b.max_y) - max(a.min_y, b.min_y)
    if width <= 0 or height <= 0:
        return 0.0
    intersection = width * height
    return intersection / (a.area + b.area - intersection)


def center_offset(a: Box2D, b: Box2D) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def best_ious(matches: Iterable[MatchRecord]) -> list[float]:
    best = {}
    for match in matches:
        best[match.key] = max(best.get(match.key, 0.0), match.iou)
    return list(best.values())


def recall_at(matches: Sequence[MatchRecord], threshold: float) -> float:
    """Share of ground-truth boxes whose best projection reaches ``threshold``."""
    ious = best_ious(matches)
    if not ious:
        raise EmptyMatchesError("Can't compute recall of no matches")
    return sum(1 for value in ious if value >= threshold) / len(ious)


def metrics_row(
    strategy: str,
    matches: Sequence[MatchRecord],
    thresholds: Sequence[float] = THRESHOLDS,
) -> MetricsRow:
    if not matches:
        raise EmptyMatchesError(f"Strategy {strategy!r} has no matches to evaluate")
    offsets = [m.center_offset for m in matches if m.center_offset is not None]
    return MetricsRow(
        strategy=strategy,
        average_iou=float(np.mean(best_ious(matches))),
        recall_at={threshold: recall_at(matches, threshold) for threshold in thresholds},
        mean_center_offset=float(np.mean(offsets)) if offsets else math.nan,
        count=len(matches),
    )


def bootstrap_difference(
    strategy: str,
    matches: Sequence[MatchRecord],
    baseline: str,
    baseline_matches: Sequence[MatchRecord],
    seed: int = 0,
) -> Comparison:
    """Paired bootstrap interval of the mean IoU difference."""
    baseline_ious = {m.key: m.iou for m in baseline_matches}
    differences = np.array(
        [m.iou - baseline_ious[m.key] for m in matches if m.key in baseline_ious]
    )
    if not len(differences):
        raise EmptyMatchesError(f"{strategy!r} and {baseline!r} share no matches")
    mean = float(differences.mean())
    if len(differences) < 2 or np.all(differences == differences[0]):
        return Comparison(strategy, baseline, mean, mean, mean)
    result = stats.bootstrap(
        (differences,),
        np.mean,
        n_resamples=BOOTSTRAP_RESAMPLES,
        confidence_level=CONFIDENCE_LEVEL,
        method="percentile",
        random_state=np.random.default_rng(seed),
    )
    interval = result.confidence_interval
    return Comparison(strategy, baseline, mean, float(interval.low), float(interval.high))


def _check_runs(recording: SceneRecording, runs: Sequence[AlignmentRun]) -> None:
    if not runs:
        raise SceneMismatchError("Nothing to evaluate")
    strategies = [run.strategy for run in runs]
    if len(set(strategies)) != len(strategies):
        raise SceneMismatchError(f"Duplicate strategies: {strategies}")
    for run in runs:
        if run.recording_id != recording.recording_id:
            raise SceneMismatchError(
                f"The {run.strategy} run belongs to recording {run.recording_id}, "
                f"not {recording.recording_id}"
            )
        if any(
            assignment.compensated != run.strategy.compensates
            for scan in run.scans
            for assignment in scan.assignments
        ):
            raise SceneMismatchError(
                f"The {run.strategy} run has assignments of another strategy"
            )
    scan_sets = [
        {(scan.vehicle, scan.scan_index) for scan in run.scans} for run in runs
    ]
    if any(scans != scan_sets[0] for scans in scan_sets):
        raise SceneMismatchError("The runs didn't align the same scans")


def match_assignment(
    recording: SceneRecording,
    vehicle: VehicleRecording,
    scan_index: int,
    assignment: AlignmentAssignment,
) -> list[MatchRecord]:
    camera = vehicle.camera(assignment.camera_id)
    schedule = vehicle.schedule(assignment.camera_id)
    lidar_offset = recording.clock_offset(vehicle.name, LIDAR)
    reported = vehicle.trajectory
    true = reported.shifted(-recording.clock_offset(vehicle.name, INS))

    records = []
    for object_id, alignment in sorted(assignment.per_object.items()):
        reference_index = nearest_frame(schedule.frame_timestamps, alignment.mean_time)
        reference_box = recording.box2d(
            vehicle.name, camera.camera_id, reference_index, object_id
        )
        if reference_box is None:
            continue  # not visible in this camera
        frame_index = nearest_frame(schedule.frame_timestamps, alignment.frame_time)
        ground_truth = recording.box2d(vehicle.name, camera.camera_id, frame_index, object_id)

        true_mean_time = alignment.mean_time - lidar_offset
        box = recording.object(object_id).box_at(true_mean_time)
        expressed_at = (
            alignment.compensation_time if assignment.compensated else alignment.mean_time
        )
        box_to_camera = compose_all(
            [
                camera.extrinsic,
                relative_motion(
                    reported, vehicle.lidar_extrinsic, alignment.mean_time, expressed_at
                ),
                invert(lidar_pose(true, vehicle.lidar_extrinsic, true_mean_time)),
            ]
        )
        projected = project_box3d(camera, box, box_to_camera)
        if projected is None or ground_truth is None:
            records.append(
                MatchRecord(
                    vehicle.name,
                    scan_index,
                    camera.camera_id,
                    object_id,
                    projected,
                    ground_truth or reference_box,
                    0.0,
                    None,
                )
            )
            continue
        records.append(
            MatchRecord(
                vehicle.name,
                scan_index,
                camera.camera_id,
                object_id,
                projected,
                ground_truth,
                iou(projected, ground_truth),
                center_offset(projected, ground_truth),
            )
        )
    return records


def match_run(
    recording: SceneRecording,
    run: AlignmentRun,
    camera_ids: Iterable[str] | None = None,
) -> list[MatchRecord]:
    camera_ids = set(camera_ids) if camera_ids is not None else None
    records = []
    progress = logger[run.strategy.value].progress
    for scan in progress(run.scans, chunk_size=50, total=len(run.scans)):
        vehicle = recording.vehicle(scan.vehicle)
        for assignment in scan.assignments:
            if camera_ids is None or assignment.camera_id in camera_ids:
                records.extend(
                    match_assignment(recording, vehicle, scan.scan_index, assignment)
                )
    return records


def evaluate_alignment(
    recording: SceneRecording,
    runs: Sequence[AlignmentRun],
    camera_ids: Iterable[str] | None = None,
    thresholds: Sequence[float] = THRESHOLDS,
    seed: int = 0,
) -> MetricsTable:
    """One row per strategy, stamp first, plus paired comparisons to stamp."""
    _check_runs(recording, runs)
    camera_ids = list(camera_ids) if camera_ids is not None else None
    order = list(Strategy)
    runs = sorted(runs, key=lambda run: order.index(run.strategy))

    matches = {}
    for run in runs:
        matches[run.strategy.value] = match_run(recording, run, camera_ids)
        logger.info(f"Strategy {run.strategy}: {len(matches[run.strategy.value])} matches")
    rows = [metrics_row(strategy, records, thresholds) for strategy, records in matches.items()]

    baseline = Strategy.STAMP.value
    comparisons = []
    if baseline in matches:
        comparisons = [
            bootstrap_difference(strategy, records, baseline, matches[baseline], seed)
            for strategy, records in matches.items()
            if strategy != baseline
        ]
    return MetricsTable(
        rows=rows,
        baseline=baseline,
        thresholds=tuple(thresholds),
        comparisons=comparisons,
        recording_id=recording.recording_id,
    )
