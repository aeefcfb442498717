import math

import numpy as np
import pytest

from rigalign.lib.deskew import (
    deskew_to,
    lidar_pose,
    lidar_poses,
    relative_motion,
    world_positions,
)
from rigalign.models.base import FrameMismatchError, TrajectoryCoverageError
from rigalign.models.scan import LidarScan, point_timestamps
from rigalign.models.transform import compose, invert

from testing_utils import lidar_extrinsic, make_scan, straight_trajectory


SCAN_START = 0.3

PERIOD = 0.1


def static_world_scan(trajectory, extrinsic, count=360):
    """Points of a static ring of walls, as a moving LiDAR reports them."""
    azimuths = np.arange(count) * (2 * math.pi / count)
    timestamps = point_timestamps(SCAN_START, azimuths, PERIOD)
    start_pose = lidar_pose(trajectory, extrinsic, SCAN_START)
    world = start_pose.apply(
        np.column_stack(
            [15 * np.cos(azimuths), -15 * np.sin(azimuths), np.full(count, -1.0)]
        )
    )
    rotations, translations = lidar_poses(trajectory, extrinsic, timestamps)
    positions = rotations.inv().apply(world - translations)
    scan = LidarScan(
        scan_start=SCAN_START,
        period=PERIOD,
        sensor_frame=extrinsic.source_frame,
        positions=positions,
        intensities=np.ones(count),
        azimuths=azimuths,
        timestamps=timestamps,
        object_ids=np.full(count, -1),
    )
    return scan, world


@pytest.mark.parametrize("yaw_rate", [0.0, 0.5])
def test_deskew_recovers_static_geometry(yaw_rate):
    trajectory = straight_trajectory(speed=20.0, yaw_rate=yaw_rate)
    extrinsic = lidar_extrinsic(yaw=math.radians(45))
    scan, world = static_world_scan(trajectory, extrinsic)

    deskewed = deskew_to(scan, trajectory, extrinsic, SCAN_START)

    expected = invert(lidar_pose(trajectory, extrinsic, SCAN_START)).apply(world)
    assert np.abs(deskewed.positions - expected).max() < 0.01
    assert deskewed.reference_time == SCAN_START
    assert deskewed.is_deskewed


def test_skew_magnitude_at_72_kmh():
    trajectory = straight_trajectory(speed=20.0)
    extrinsic = lidar_extrinsic()
    scan, _ = static_world_scan(trajectory, extrinsic)

    deskewed = deskew_to(scan, trajectory, extrinsic, SCAN_START)

    displacement = np.linalg.norm(deskewed.positions - scan.positions, axis=1)
    assert displacement.max() == pytest.approx(2.0, rel=0.01)
    assert displacement[0] == pytest.approx(0.0, abs=1e-9)


def test_deskew_keeps_everything_else():
    trajectory = straight_trajectory()
    extrinsic = lidar_extrinsic()
    scan, _ = static_world_scan(trajectory, extrinsic, count=8)

    deskewed = deskew_to(scan, trajectory, extrinsic, SCAN_START + 0.05)

    np.testing.assert_array_equal(deskewed.timestamps, scan.timestamps)
    np.testing.assert_array_equal(deskewed.azimuths, scan.azimuths)
    assert deskewed.scan_start == scan.scan_start


def test_deskew_retargets_deskewed_scan():
    trajectory = straight_trajectory(speed=15.0, yaw_rate=0.2)
    extrinsic = lidar_extrinsic()
    scan, _ = static_world_scan(trajectory, extrinsic, count=36)

    twice = deskew_to(
        deskew_to(scan, trajectory, extrinsic, 0.32), trajectory, extrinsic, 0.37
    )
    once = deskew_to(scan, trajectory, extrinsic, 0.37)

    np.testing.assert_allclose(twice.positions, once.positions, atol=1e-9)


def test_world_positions_agree_before_and_after_deskew():
    trajectory = straight_trajectory(speed=15.0, yaw_rate=0.2)
    extrinsic = lidar_extrinsic()
    scan, world = static_world_scan(trajectory, extrinsic, count=36)

    deskewed = deskew_to(scan, trajectory, extrinsic, 0.35)

    np.testing.assert_allclose(
        world_positions(scan, trajectory, extrinsic), world, atol=1e-9
    )
    np.testing.assert_allclose(
        world_positions(deskewed, trajectory, extrinsic), world, atol=1e-9
    )


def test_deskew_empty_scan():
    trajectory = straight_trajectory()
    scan = make_scan([])

    deskewed = deskew_to(scan, trajectory, lidar_extrinsic(), 0.15)

    assert len(deskewed) == 0
    assert deskewed.reference_time == 0.15


def test_deskew_raises_on_reference_outside_trajectory():
    trajectory = straight_trajectory(end=0.5)
    scan = make_scan([0.0, 1.0])

    with pytest.raises(TrajectoryCoverageError):
        deskew_to(scan, trajectory, lidar_extrinsic(), 0.6)


def test_deskew_raises_on_scan_outside_trajectory():
    trajectory = straight_trajectory(end=0.5)
    scan = make_scan([0.0, 6.0], scan_start=0.45)

    with pytest.raises(TrajectoryCoverageError):
        deskew_to(scan, trajectory, lidar_extrinsic(), 0.45)


def test_deskew_raises_on_sensor_frame_mismatch():
    scan = make_scan([0.0, 1.0], sensor_frame="cav/lidar")

    with pytest.raises(FrameMismatchError):
        deskew_to(scan, straight_trajectory(), lidar_extrinsic(), 0.15)


def test_deskew_raises_on_trajectory_frame_mismatch():
    scan = make_scan([0.0, 1.0])

    with pytest.raises(FrameMismatchError):
        deskew_to(scan, straight_trajectory("cav/ins"), lidar_extrinsic(), 0.15)


def test_relative_motion():
    trajectory = straight_trajectory(speed=10.0)
    extrinsic = lidar_extrinsic(yaw=math.pi / 2)

    motion = relative_motion(trajectory, extrinsic, 0.2, 0.3)

    # the earlier origin lies 1 m behind, which is LiDAR +y at 90° yaw
    np.testing.assert_allclose(motion.apply([0, 0, 0]), [0, 1, 0], atol=1e-12)
    expected = compose(
        invert(lidar_pose(trajectory, extrinsic, 0.3)),
        lidar_pose(trajectory, extrinsic, 0.2),
    )
    np.testing.assert_allclose(motion.as_matrix(), expected.as_matrix(), atol=1e-12)
