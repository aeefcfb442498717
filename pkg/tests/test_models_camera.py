import math

import numpy as np
import pytest

from rigalign.models.base import DataError, FrameMismatchError
from rigalign.models.boxes import Box3D, ObjectClass
from rigalign.models.camera import (
    CameraModel,
    back_project,
    project_box3d,
    project_point,
    project_points,
)
from rigalign.models.transform import RigidTransform


@pytest.fixture
def camera():
    return CameraModel.from_fov(
        "front", math.radians(90), 1000, 500, RigidTransform.identity("lidar", "front")
    )


def box(center, dimensions=(2, 2, 2), yaw=0.0, frame="front"):
    return Box3D(center, dimensions, yaw, 1, ObjectClass.CAR, frame)


def test_from_fov(camera):
    assert camera.fx == pytest.approx(500)
    assert camera.horizontal_fov == pytest.approx(math.radians(90))
    assert (camera.cx, camera.cy) == (500, 250)


def test_optical_axis():
    extrinsic = RigidTransform.from_matrix(
        [[0, -1, 0, 0], [0, 0, -1, 0], [1, 0, 0, 0], [0, 0, 0, 1]], "lidar", "front"
    )
    camera = CameraModel.from_fov("front", math.radians(60), 640, 480, extrinsic)

    np.testing.assert_allclose(camera.optical_axis, [1, 0, 0], atol=1e-12)


@pytest.mark.parametrize(
    "point, expected",
    [
        ((0, 0, 10), (500, 250)),
        ((1, 0, 10), (550, 250)),
        ((0, -2, 10), (500, 150)),
        ((0, 0, -10), None),
        ((0, 0, 0.05), None),
        ((30, 0, 10), None),
    ],
)
def test_project_point(camera, point, expected):
    result = project_point(camera, point)

    if expected is None:
        assert result is None
    else:
        assert result == pytest.approx(expected)


@pytest.mark.parametrize("u, v, depth", [(500, 250, 10), (10, 490, 3.5), (999, 1, 80)])
def test_back_project_then_project(camera, u, v, depth):
    point = back_project(camera, u, v, depth)

    assert point[2] == pytest.approx(depth)
    assert project_point(camera, point) == pytest.approx((u, v))


def test_project_points_marks_points_behind(camera):
    _, in_front = project_points(camera, np.array([[0, 0, 5], [0, 0, -5], [0, 0, 0.1]]))

    assert in_front.tolist() == [True, False, False]


def test_project_box3d(camera):
    result = project_box3d(camera, box((0, 0, 10)), RigidTransform.identity("front"))

    assert result.as_tuple() == pytest.approx(
        (500 - 500 / 9, 250 - 500 / 9, 500 + 500 / 9, 250 + 500 / 9)
    )


def test_project_box3d_clamps_to_image(camera):
    result = project_box3d(camera, box((9, 0, 10)), RigidTransform.identity("front"))

    assert result.max_x == 1000
    assert result.min_x < 1000


@pytest.mark.parametrize("center", [(0, 0, -10), (60, 0, 10), (0, 40, 10)])
def test_project_box3d_invisible(camera, center):
    assert project_box3d(camera, box(center), RigidTransform.identity("front")) is None


def test_project_box3d_raises_on_frame_mismatch(camera):
    with pytest.raises(FrameMismatchError):
        project_box3d(
            camera, box((0, 0, 10), frame="world"), RigidTransform.identity("front")
        )


def test_raises_on_principal_point_outside(camera):
    with pytest.raises(DataError):
        CameraModel("x", 500, 500, 1200, 250, 1000, 500, camera.extrinsic)


def test_from_dict_checks_fov(camera):
    data = camera.to_dict()
    data["horizontal_fov"] = math.radians(60)

    with pytest.raises(DataError):
        CameraModel.from_dict(data)


def test_to_dict_from_dict(camera):
    result = CameraModel.from_dict(camera.to_dict())

    assert result.to_dict() == camera.to_dict()
