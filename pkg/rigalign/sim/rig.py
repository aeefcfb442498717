import math

import numpy as np

from rigalign.models.camera import CameraModel
from rigalign.models.scene import CameraSpec, VehicleConfig
from rigalign.models.transform import RigidTransform, invert


CAMERA_FORWARD_OFFSET = 0.2  # m, along the optical axis from the LiDAR origin

CAMERA_DROP = 0.2  # m, below the LiDAR origin


def lidar_extrinsic(vehicle: VehicleConfig) -> RigidTransform:
    """LiDAR → INS."""
    return RigidTransform.from_yaw(
        vehicle.lidar_yaw,
        vehicle.lidar_translation,
        vehicle.lidar_frame,
        vehicle.ins_frame,
    )


def camera_direction(vehicle: VehicleConfig, spec: CameraSpec) -> float:
    """Counter-clockwise angle of the optical axis from the LiDAR +x axis."""
    return spec.yaw - vehicle.lidar_yaw


def camera_azimuth(vehicle: VehicleConfig, spec: CameraSpec) -> float:
    """Clockwise LiDAR azimuth at which the sensor sweeps across the camera's axis."""
    return (vehicle.lidar_yaw - spec.yaw) % (2 * math.pi)


def camera_extrinsic(vehicle: VehicleConfig, spec: CameraSpec) -> RigidTransform:
    """LiDAR → camera, for a level camera looking along ``spec.yaw``."""
    angle = camera_direction(vehicle, spec)
    forward = np.array([math.cos(angle), math.sin(angle), 0.0])
    right = np.array([math.sin(angle), -math.cos(angle), 0.0])
    down = np.array([0.0, 0.0, -1.0])
    camera_to_lidar = np.eye(4)
    camera_to_lidar[:3, :3] = np.column_stack([right, down, forward])
    camera_to_lidar[:3, 3] = CAMERA_FORWARD_OFFSET * forward + CAMERA_DROP * down
    return invert(
        RigidTransform.from_matrix(
            camera_to_lidar, vehicle.camera_frame(spec.camera_id), vehicle.lidar_frame
        )
    )


def camera_models(vehicle: VehicleConfig, frame_rate: float) -> list[CameraModel]:
    return [
        CameraModel.from_fov(
            spec.camera_id,
            spec.horizontal_fov,
            spec.width,
            spec.height,
            camera_extrinsic(vehicle, spec),
            frame_rate,
        )
        for spec in vehicle.cameras
    ]
