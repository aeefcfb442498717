import math

import numpy as np
import pytest

from rigalign.models.motion import Motion
from rigalign.models.scene import DEFAULT_CAMERAS, CameraSpec, VehicleConfig
from rigalign.sim.rig import (
    camera_azimuth,
    camera_direction,
    camera_extrinsic,
    camera_models,
    lidar_extrinsic,
)


@pytest.fixture
def vehicle():
    return VehicleConfig("ego", Motion())


def spec(camera_id):
    return next(s for s in DEFAULT_CAMERAS if s.camera_id == camera_id)


def test_lidar_extrinsic(vehicle):
    extrinsic = lidar_extrinsic(vehicle)

    assert (extrinsic.source_frame, extrinsic.target_frame) == ("ego/lidar", "ego/ins")
    np.testing.assert_allclose(
        extrinsic.apply([1.0, 0.0, 0.0]),
        [math.sqrt(0.5), math.sqrt(0.5), 1.5],
        atol=1e-12,
    )


@pytest.mark.parametrize(
    "camera_id, expected_degrees",
    [
        ("front_wide", 45),
        ("front_right", 105),
        ("rear_right", 205),
        ("rear", 225),
        ("rear_left", 255),
        ("front_left", 325),
    ],
)
def test_camera_azimuth(vehicle, camera_id, expected_degrees):
    assert camera_azimuth(vehicle, spec(camera_id)) == pytest.approx(
        math.radians(expected_degrees)
    )


def test_camera_direction(vehicle):
    assert camera_direction(vehicle, spec("front_left")) == pytest.approx(
        math.radians(35)
    )


def test_camera_extrinsic_looks_along_yaw():
    vehicle = VehicleConfig("ego", Motion(), lidar_yaw=0.0)
    extrinsic = camera_extrinsic(vehicle, CameraSpec("front", 0.0, math.radians(90)))

    assert (extrinsic.source_frame, extrinsic.target_frame) == ("ego/lidar", "ego/front")
    np.testing.assert_allclose(
        extrinsic.apply([[10.0, 0.0, 0.0], [10.0, -1.0, 0.0], [10.0, 0.0, 1.0]]),
        [[0.0, -0.2, 9.8], [1.0, -0.2, 9.8], [0.0, -1.2, 9.8]],
        atol=1e-12,
    )


@pytest.mark.parametrize("yaw_degrees", [-160, -60, 0, 80, 180])
def test_camera_extrinsic_optical_axis(vehicle, yaw_degrees):
    camera = CameraSpec("cam", math.radians(yaw_degrees), math.radians(60))
    angle = camera_direction(vehicle, camera)
    point = [20 * math.cos(angle), 20 * math.sin(angle), -0.2]

    result = camera_extrinsic(vehicle, camera).apply(point)

    np.testing.assert_allclose(result, [0.0, 0.0, 19.8], atol=1e-9)


def test_camera_models(vehicle):
    cameras = camera_models(vehicle, 25.0)

    assert [camera.camera_id for camera in cameras] == [s.camera_id for s in DEFAULT_CAMERAS]
    assert all(camera.frame_rate == 25.0 for camera in cameras)
    assert cameras[0].horizontal_fov == pytest.approx(math.radians(80))
    assert cameras[0].extrinsic.target_frame == "ego/front_wide"
