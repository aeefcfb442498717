from typing import Any

import numpy as np
from scipy.spatial.transform import Rotation

from rigalign.lib import loggers
from rigalign.models.base import FrameMismatchError
from rigalign.models.scan import LidarScan
from rigalign.models.trajectory import PoseTrajectory, interpolate_pose
from rigalign.models.transform import RigidTransform, compose


logger = loggers.from_path(__file__)


def check_frames(
    traj: PoseTrajectory, lidar_extrinsic: RigidTransform, sensor_frame: str | None = None
) -> None:
    if sensor_frame is not None and lidar_extrinsic.source_frame != sensor_frame:
        raise FrameMismatchError(sensor_frame, lidar_extrinsic.source_frame, "deskew")
    if lidar_extrinsic.target_frame != traj.body_frame:
        raise FrameMismatchError(traj.body_frame, lidar_extrinsic.target_frame, "deskew")


def lidar_poses(
    traj: PoseTrajectory, lidar_extrinsic: RigidTransform, times: Any
) -> tuple[Rotation, np.ndarray]:
    """Batched T_WL(t) = T_WI(t) ∘ T_IL as rotations and (N, 3) translations."""
    check_frames(traj, lidar_extrinsic)
    rotations, translations = traj.interpolate(times)
    return (
        rotations * lidar_extrinsic.rotation,
        rotations.apply(lidar_extrinsic.translation) + translations,
    )


def lidar_pose(
    traj: PoseTrajectory, lidar_extrinsic: RigidTransform, t: float
) -> RigidTransform:
    return compose(interpolate_pose(traj, t), lidar_extrinsic)


def relative_motion(
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
    from_time: float,
    to_time: float,
) -> RigidTransform:
    """Maps the LiDAR frame at ``from_time`` into the LiDAR frame at ``to_time``."""
    rotations, translations = lidar_poses(traj, lidar_extrinsic, [from_time, to_time])
    inverse = rotations[1].inv()
    return RigidTransform(
        inverse * rotations[0],
        inverse.apply(translations[0] - translations[1]),
        lidar_extrinsic.source_frame,
        lidar_extrinsic.source_frame,
    )


def world_positions(
    scan: LidarScan, traj: PoseTrajectory, lidar_extrinsic: RigidTransform
) -> np.ndarray:
    check_frames(traj, lidar_extrinsic, scan.sensor_frame)
    if not len(scan):
        return np.empty((0, 3))
    rotations, translations = lidar_poses(traj, lidar_extrinsic, scan.source_times)
    return rotations.apply(scan.positions) + translations


def deskew_to(
    scan: LidarScan,
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
    ref_time: float,
) -> LidarScan:
    """Re-expresses every point in the LiDAR frame as it was at ``ref_time``.

    p' = T_WL(ref)⁻¹ · T_WL(t_point) · p. Already deskewed scans are
    retargeted from their current reference time.
    """
    check_frames(traj, lidar_extrinsic, scan.sensor_frame)
    traj.check_coverage(ref_time)
    if not len(scan):
        return scan.replace(reference_time=float(ref_time))

    source_times = scan.source_times
    traj.check_coverage(source_times)
    rotations, translations = lidar_poses(
        traj, lidar_extrinsic, np.append(source_times, ref_time)
    )
    ref_inverse = rotations[-1].inv()
    relative_rotations = ref_inverse * rotations[:-1]
    relative_translations = ref_inverse.apply(translations[:-1] - translations[-1])
    positions = relative_rotations.apply(scan.positions) + relative_translations
    logger.debug(
        f"Deskewed {len(scan)} points of {scan.sensor_frame} "
        f"from {scan.scan_start:.3f}s to {ref_time:.6f}s"
    )
    return scan.replace(positions=positions, reference_time=float(ref_time))
