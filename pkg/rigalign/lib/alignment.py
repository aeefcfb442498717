"""Stamp-, frame- and target-based association of LiDAR points to camera frames."""

from dataclasses import replace
from typing import Any, Iterable, Sequence

import numpy as np

from rigalign.lib import loggers
from rigalign.lib.deskew import deskew_to, lidar_poses, world_positions
from rigalign.models.alignment import (
    AlignmentAssignment,
    AlignmentRun,
    CameraFrameSchedule,
    ObjectAlignment,
    ScanAlignment,
    Strategy,
)
from rigalign.models.base import DataError
from rigalign.models.camera import CameraModel
from rigalign.models.scan import NO_OBJECT, TWO_PI, LidarScan, azimuths_of
from rigalign.models.scene import ObjectTrack, SceneRecording, VehicleRecording
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import RigidTransform


TIE_TOLERANCE = 1e-12  # s

MEMBERSHIP_INFLATION = 0.05  # m


logger = loggers.from_path(__file__)


class EmptyScheduleError(DataError):
    pass


class ObjectWithoutPointsError(DataError):
    pass


def nearest_frame(frame_timestamps: Any, t: float) -> int:
    """Index of the frame closest to ``t``, the earlier one on a tie."""
    frame_timestamps = np.asarray(frame_timestamps, dtype=np.float64)
    if not len(frame_timestamps):
        raise EmptyScheduleError("Can't pick a frame from an empty schedule")
    index = int(np.searchsorted(frame_timestamps, t))
    if index == 0:
        return 0
    if index == len(frame_timestamps):
        return index - 1
    before = t - frame_timestamps[index - 1]
    after = frame_timestamps[index] - t
    return index - 1 if before <= after + TIE_TOLERANCE else index


def nearest_frame_time(schedule: CameraFrameSchedule, t: float) -> float:
    if not len(schedule):
        raise EmptyScheduleError(f"Camera {schedule.camera_id!r} has no frames")
    return float(schedule.frame_timestamps[nearest_frame(schedule.frame_timestamps, t)])


def camera_azimuth(camera: CameraModel) -> float:
    """Clockwise LiDAR azimuth of the camera's optical axis."""
    return float(azimuths_of(camera.optical_axis)[0])


def camera_wedge_mask(scan: LidarScan, camera: CameraModel) -> np.ndarray:
    """Points whose azimuth lies within the camera's horizontal FOV."""
    difference = np.mod(scan.azimuths - camera_azimuth(camera) + np.pi, TWO_PI) - np.pi
    return np.abs(difference) <= camera.horizontal_fov / 2


def object_membership(
    scan: LidarScan,
    tracks: Iterable[ObjectTrack],
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
    inflate: float = MEMBERSHIP_INFLATION,
) -> np.ndarray:
    """Object ID per point from box tests at each point's own acquisition instant.

    For external data without per-point labels. Points in several boxes go
    to the first track listed.
    """
    membership = np.full(len(scan), NO_OBJECT, dtype=np.int64)
    if not len(scan):
        return membership
    points = world_positions(scan, traj, lidar_extrinsic)
    for track in tracks:
        centers, yaws = track.states_at(scan.timestamps)
        offsets = points - centers
        cos, sin = np.cos(yaws), np.sin(yaws)
        local = np.column_stack(
            [
                cos * offsets[:, 0] + sin * offsets[:, 1],
                -sin * offsets[:, 0] + cos * offsets[:, 1],
                offsets[:, 2],
            ]
        )
        inside = np.all(np.abs(local) <= track.dimensions / 2 + inflate, axis=1)
        membership[inside & (membership == NO_OBJECT)] = track.object_id
    return membership


def _schedules_by_camera(
    schedules: Iterable[CameraFrameSchedule],
) -> dict[str, CameraFrameSchedule]:
    return {schedule.camera_id: schedule for schedule in schedules}


def _schedule_for(
    schedules: dict[str, CameraFrameSchedule], camera_id: str
) -> CameraFrameSchedule:
    try:
        schedule = schedules[camera_id]
    except KeyError:
        raise EmptyScheduleError(f"There is no schedule for camera {camera_id!r}")
    if not len(schedule):
        raise EmptyScheduleError(f"Camera {camera_id!r} has no frames")
    return schedule


def object_mean_times(scan: LidarScan, object_ids: Iterable[int] | None = None) -> dict[int, float]:
    object_ids = scan.object_ids_present() if object_ids is None else list(object_ids)
    mean_times = {}
    for object_id in object_ids:
        mask = scan.object_ids == object_id
        if not np.any(mask):
            raise ObjectWithoutPointsError(
                f"Object {object_id} has no points in the scan starting at {scan.scan_start:.3f}s"
            )
        mean_times[int(object_id)] = float(scan.timestamps[mask].mean())
    return mean_times


def stamp_align(
    scan: LidarScan, schedules: Sequence[CameraFrameSchedule]
) -> list[AlignmentAssignment]:
    """Whole scan to the frame nearest its header stamp, nothing compensated."""
    mean_times = object_mean_times(scan)
    indices = np.arange(len(scan))
    assignments = []
    for schedule in schedules:
        frame_time = nearest_frame_time(schedule, scan.scan_start)
        assignments.append(
            AlignmentAssignment(
                camera_id=schedule.camera_id,
                chosen_frame_time=frame_time,
                point_indices=indices,
                compensation_time=scan.scan_start,
                representative_time=scan.scan_start,
                compensated=False,
                per_object={
                    object_id: ObjectAlignment(frame_time, scan.scan_start, mean_time)
                    for object_id, mean_time in mean_times.items()
                },
                positions=scan.positions,
            )
        )
    return assignments


def _wedge_frame(
    scan: LidarScan, camera: CameraModel, schedule: CameraFrameSchedule
) -> tuple[np.ndarray, float, float]:
    indices = np.flatnonzero(camera_wedge_mask(scan, camera))
    if len(indices):
        representative_time = float(scan.timestamps[indices].mean())
    else:
        logger.debug(f"No points in the FOV of {camera.camera_id} at {scan.scan_start:.3f}s")
        representative_time = scan.scan_start + scan.period / 2
    return indices, representative_time, nearest_frame_time(schedule, representative_time)


def frame_align(
    scan: LidarScan,
    cameras: Sequence[CameraModel],
    schedules: Sequence[CameraFrameSchedule],
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
) -> list[AlignmentAssignment]:
    """Per camera: FOV wedge → mean point time → nearest frame → deskew to it.

    A camera without points in its wedge gets an empty assignment to the
    frame nearest the middle of the scan.
    """
    schedules = _schedules_by_camera(schedules)
    mean_times = object_mean_times(scan)
    assignments = []
    for camera in cameras:
        schedule = _schedule_for(schedules, camera.camera_id)
        indices, representative_time, frame_time = _wedge_frame(scan, camera, schedule)
        compensated = deskew_to(scan.subset(indices), traj, lidar_extrinsic, frame_time)
        assignments.append(
            AlignmentAssignment(
                camera_id=camera.camera_id,
                chosen_frame_time=frame_time,
                point_indices=indices,
                compensation_time=frame_time,
                representative_time=representative_time,
                compensated=True,
                per_object={
                    object_id: ObjectAlignment(frame_time, frame_time, mean_time)
                    for object_id, mean_time in mean_times.items()
                },
                positions=compensated.positions,
            )
        )
    return assignments


def target_align(
    scan: LidarScan,
    cameras: Sequence[CameraModel],
    schedules: Sequence[CameraFrameSchedule],
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
    object_ids: Iterable[int] | None = None,
) -> list[AlignmentAssignment]:
    """Frame-based for the background, per object for object points.

    Every object goes to the frame nearest the mean timestamp of its own
    points, in every camera, and its points are compensated to that frame.
    """
    schedules = _schedules_by_camera(schedules)
    mean_times = object_mean_times(scan, object_ids)
    source_times = scan.source_times
    assignments = []
    for camera in cameras:
        schedule = _schedule_for(schedules, camera.camera_id)
        indices, representative_time, frame_time = _wedge_frame(scan, camera, schedule)
        per_object = {}
        for object_id, mean_time in mean_times.items():
            object_frame_time = nearest_frame_time(schedule, mean_time)
            per_object[object_id] = ObjectAlignment(
                object_frame_time, object_frame_time, mean_time
            )

        compensation_times = np.full(len(indices), frame_time)
        subset_object_ids = scan.object_ids[indices]
        for object_id, alignment in per_object.items():
            compensation_times[subset_object_ids == object_id] = alignment.compensation_time
        positions = _compensate_to(
            scan.positions[indices],
            source_times[indices],
            compensation_times,
            traj,
            lidar_extrinsic,
        )
        assignments.append(
            AlignmentAssignment(
                camera_id=camera.camera_id,
                chosen_frame_time=frame_time,
                point_indices=indices,
                compensation_time=frame_time,
                representative_time=representative_time,
                compensated=True,
                per_object=per_object,
                positions=positions,
            )
        )
    return assignments


def _compensate_to(
    positions: np.ndarray,
    source_times: np.ndarray,
    target_times: np.ndarray,
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
) -> np.ndarray:
    """Per-point deskew, each point to its own target time."""
    if not len(positions):
        return np.empty((0, 3))
    source_rotations, source_translations = lidar_poses(traj, lidar_extrinsic, source_times)
    target_rotations, target_translations = lidar_poses(traj, lidar_extrinsic, target_times)
    inverse = target_rotations.inv()
    return (inverse * source_rotations).apply(positions) + inverse.apply(
        source_translations - target_translations
    )


def align_scan(
    strategy: Strategy,
    scan: LidarScan,
    cameras: Sequence[CameraModel],
    schedules: Sequence[CameraFrameSchedule],
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
) -> list[AlignmentAssignment]:
    strategy = Strategy(strategy)
    if strategy == Strategy.STAMP:
        camera_ids = {camera.camera_id for camera in cameras}
        return stamp_align(
            scan, [schedule for schedule in schedules if schedule.camera_id in camera_ids]
        )
    if strategy == Strategy.FRAME:
        return frame_align(scan, cameras, schedules, traj, lidar_extrinsic)
    return target_align(scan, cameras, schedules, traj, lidar_extrinsic)


def align_recording(
    recording: SceneRecording,
    strategy: Strategy,
    vehicles: Iterable[str] | None = None,
    camera_ids: Iterable[str] | None = None,
) -> AlignmentRun:
    """Aligns every scan of the chosen vehicles (all by default) to their cameras."""
    strategy = Strategy(strategy)
    names = list(vehicles) if vehicles is not None else [v.name for v in recording.vehicles]
    camera_ids = list(camera_ids) if camera_ids is not None else None

    scans = []
    for name in names:
        try:
            vehicle = recording.vehicle(name)
        except KeyError:
            raise DataError(f"There is no vehicle {name!r} in the recording")
        cameras = vehicle.cameras
        if camera_ids is not None:
            unknown = sorted(set(camera_ids) - set(vehicle.camera_ids))
            if unknown:
                raise DataError(f"Vehicle {name!r} has no cameras {unknown}")
            cameras = [camera for camera in cameras if camera.camera_id in camera_ids]
        logger.info(
            f"Aligning {len(vehicle.scans)} scans of {name} to {len(cameras)} cameras "
            f"with the {strategy} strategy"
        )
        scans_to_align = labelled_scans(recording, vehicle)
        for scan_index, scan in enumerate(logger.progress(scans_to_align)):
            assignments = align_scan(
                strategy,
                scan,
                cameras,
                vehicle.schedules,
                vehicle.trajectory,
                vehicle.lidar_extrinsic,
            )
            assignments = [
                observed_objects(recording, vehicle, assignment) for assignment in assignments
            ]
            scans.append(ScanAlignment(name, scan_index, scan.scan_start, assignments))
    return AlignmentRun(recording.recording_id, strategy, scans)


def labelled_scans(recording: SceneRecording, vehicle: VehicleRecording) -> list[LidarScan]:
    """The vehicle's scans, labelled by box membership if none carries object IDs."""
    if not recording.objects or any(scan.object_ids_present() for scan in vehicle.scans):
        return list(vehicle.scans)
    logger[vehicle.name].info("Scans carry no object IDs, labelling points by box membership")
    return [
        scan.replace(
            object_ids=object_membership(
                scan, recording.objects, vehicle.trajectory, vehicle.lidar_extrinsic
            )
        )
        for scan in vehicle.scans
    ]


def observed_objects(
    recording: SceneRecording, vehicle: VehicleRecording, assignment: AlignmentAssignment
) -> AlignmentAssignment:
    """Keeps the objects the camera has a 2D box for at their own acquisition time."""
    if not recording.boxes2d:
        return assignment
    schedule = vehicle.schedule(assignment.camera_id)
    per_object = {
        object_id: alignment
        for object_id, alignment in assignment.per_object.items()
        if recording.box2d(
            vehicle.name,
            assignment.camera_id,
            nearest_frame(schedule.frame_timestamps, alignment.mean_time),
            object_id,
        )
        is not None
    }
    return replace(assignment, per_object=per_object)
