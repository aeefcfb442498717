import math
from dataclasses import dataclass

import numpy as np

from rigalign.models.base import DataError, FrameMismatchError
from rigalign.models.boxes import Box2D, Box3D
from rigalign.models.transform import RigidTransform, invert


NEAR_PLANE = 0.1  # m

FOV_TOLERANCE = 0.01


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Ideal pinhole camera (no distortion).

    The extrinsic maps LiDAR coordinates into the camera frame, which has
    +z along the optical axis, +x to the right and +y down.
    """

    camera_id: str
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsic: RigidTransform
    frame_rate: float = 30.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise DataError(
                f"Camera {self.camera_id!r} has non-positive focal length ({self.fx}, {self.fy})"
            )
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise DataError(
                f"Camera {self.camera_id!r} principal point ({self.cx}, {self.cy}) "
                f"is outside of the {self.width}x{self.height} image"
            )
        if self.frame_rate <= 0:
            raise DataError(f"Camera {self.camera_id!r} needs a positive frame rate")

    @classmethod
    def from_fov(
        cls,
        camera_id: str,
        horizontal_fov: float,
        width: int,
        height: int,
        extrinsic: RigidTransform,
        frame_rate: float = 30.0,
    ) -> "CameraModel":
        focal = width / (2 * math.tan(horizontal_fov / 2))
        return cls(
            camera_id=camera_id,
            fx=focal,
            fy=focal,
            cx=width / 2,
            cy=height / 2,
            width=width,
            height=height,
            extrinsic=extrinsic,
            frame_rate=frame_rate,
        )

    @property
    def horizontal_fov(self) -> float:
        return 2 * math.atan(self.width / (2 * self.fx))

    @property
    def frame_period(self) -> float:
        return 1 / self.frame_rate

    @property
    def optical_axis(self) -> np.ndarray:
        """Optical axis direction expressed in the LiDAR frame."""
        return invert(self.extrinsic).rotation.apply([0.0, 0.0, 1.0])

    def check_fov(self, horizontal_fov: float) -> None:
        if abs(horizontal_fov - self.horizontal_fov) > FOV_TOLERANCE * self.horizontal_fov:
            raise DataError(
                f"Camera {self.camera_id!r} declares FOV {horizontal_fov:.6f} rad, "
                f"but its intrinsics give {self.horizontal_fov:.6f} rad"
            )

    def to_dict(self) -> dict:
        return dict(
            camera_id=self.camera_id,
            fx=self.fx,
            fy=self.fy,
            cx=self.cx,
            cy=self.cy,
            width=self.width,
            height=self.height,
            horizontal_fov=self.horizontal_fov,
            frame_rate=self.frame_rate,
            extrinsic=self.extrinsic.to_dict(),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "CameraModel":
        data = dict(data)
        horizontal_fov = data.pop("horizontal_fov", None)
        camera = cls(
            extrinsic=RigidTransform.from_dict(data.pop("extrinsic")),
            **data,
        )
        if horizontal_fov is not None:
            camera.check_fov(horizontal_fov)
        return camera


def project_points(cam: CameraModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projects (N, 3) camera-frame points without bounds checks.

    Returns (N, 2) pixels and a mask of points in front of the near plane.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    in_front = points[:, 2] > NEAR_PLANE
    z = np.where(in_front, points[:, 2], 1.0)
    pixels = np.column_stack(
        [
            cam.fx * points[:, 0] / z + cam.cx,
            cam.fy * points[:, 1] / z + cam.cy,
        ]
    )
    return pixels, in_front


def project_point(cam: CameraModel, p) -> tuple[float, float] | None:
    x, y, z = (float(value) for value in p)
    if z <= NEAR_PLANE:
        return None
    u = cam.fx * x / z + cam.cx
    v = cam.fy * y / z + cam.cy
    if not (0 <= u <= cam.width and 0 <= v <= cam.height):
        return None
    return (u, v)


def back_project(cam: CameraModel, u: float, v: float, depth: float) -> np.ndarray:
    return np.array(
        [(u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth]
    )


def project_box3d(
    cam: CameraModel, box: Box3D, box_to_camera: RigidTransform
) -> Box2D | None:
    """Axis-aligned hull of the projected corners, clamped to the image.

    Corners behind the near plane are dropped; with fewer than two corners
    left, or a hull entirely outside of the image, there is no box.
    """
    if box_to_camera.source_frame != box.frame:
        raise FrameMismatchError(box.frame, box_to_camera.source_frame, "project_box3d")
    corners = box_to_camera.apply(box.corners())
    pixels, in_front = project_points(cam, corners)
    if np.count_nonzero(in_front) < 2:
        return None
    pixels = pixels[in_front]
    min_x, min_y = np.clip(pixels.min(axis=0), 0, [cam.width, cam.height])
    max_x, max_y = np.clip(pixels.max(axis=0), 0, [cam.width, cam.height])
    if max_x <= min_x or max_y <= min_y:
        return None
    return Box2D(min_x, min_y, max_x, max_y)
