import hashlib
import math
from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Any

import numpy as np

from rigalign.models.alignment import CameraFrameSchedule
from rigalign.models.base import ConfigError, json_dumps, readonly
from rigalign.models.boxes import Box2D, Box3D, ObjectClass
from rigalign.models.camera import CameraModel
from rigalign.models.motion import Motion
from rigalign.models.scan import LidarScan
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import RigidTransform


MAX_SPEED = 40.0  # m/s

INS = "ins"

LIDAR = "lidar"


@dataclass(frozen=True)
class CameraSpec:
    camera_id: str
    yaw: float  # rad, counter-clockwise from the vehicle +x axis
    horizontal_fov: float  # rad
    width: int = 1920
    height: int = 1080

    def __post_init__(self):
        if not 0 < self.horizontal_fov < math.pi:
            raise ConfigError(
                f"Camera {self.camera_id!r} FOV must be within (0, 180)°, "
                f"got {math.degrees(self.horizontal_fov):.1f}°"
            )
        if self.width <= 0 or self.height <= 0:
            raise ConfigError(f"Camera {self.camera_id!r} needs a positive image size")


# two front, one rear, four side; the LiDAR spins clockwise from its own
# +x axis, which points 45° to the left of the vehicle heading
DEFAULT_CAMERAS = (
    CameraSpec("front_wide", math.radians(0), math.radians(80)),
    CameraSpec("front_tele", math.radians(0), math.radians(30)),
    CameraSpec("front_right", math.radians(-60), math.radians(80)),
    CameraSpec("rear_right", math.radians(-160), math.radians(80)),
    CameraSpec("rear", math.radians(180), math.radians(90)),
    CameraSpec("rear_left", math.radians(150), math.radians(80)),
    CameraSpec("front_left", math.radians(80), math.radians(60)),
)

DEFAULT_LIDAR_YAW = math.radians(45)


@dataclass(frozen=True)
class VehicleConfig:
    name: str
    motion: Motion
    lidar_yaw: float = DEFAULT_LIDAR_YAW  # rad, LiDAR +x relative to the vehicle +x
    lidar_translation: tuple[float, float, float] = (0.0, 0.0, 1.5)  # m, in the INS frame
    cameras: tuple[CameraSpec, ...] = DEFAULT_CAMERAS

    def __post_init__(self):
        if "/" in self.name or not self.name:
            raise ConfigError(f"Invalid vehicle name: {self.name!r}")
        if abs(self.motion.speed) > MAX_SPEED:
            raise ConfigError(
                f"Vehicle {self.name!r} speed {self.motion.speed} m/s exceeds {MAX_SPEED} m/s"
            )
        camera_ids = [camera.camera_id for camera in self.cameras]
        if len(set(camera_ids)) != len(camera_ids):
            raise ConfigError(f"Vehicle {self.name!r} has duplicate camera IDs: {camera_ids}")

    @property
    def ins_frame(self) -> str:
        return f"{self.name}/{INS}"

    @property
    def lidar_frame(self) -> str:
        return f"{self.name}/{LIDAR}"

    def camera_frame(self, camera_id: str) -> str:
        return f"{self.name}/{camera_id}"


DEFAULT_VEHICLES = (
    VehicleConfig("ego", Motion(x=0.0, y=0.0, z=0.5, yaw=0.0, speed=10.0)),
    VehicleConfig("cav", Motion(x=-15.0, y=-3.5, z=0.5, yaw=0.0, speed=10.0)),
)


@dataclass(frozen=True)
class ObjectsConfig:
    count: int = 6
    speed_range: tuple[float, float] = (5.0, 20.0)  # m/s, relative to the first vehicle
    distance_range: tuple[float, float] = (8.0, 35.0)  # m, from the first vehicle mid-clip
    length_range: tuple[float, float] = (3.5, 5.0)
    width_range: tuple[float, float] = (1.6, 2.1)
    height_range: tuple[float, float] = (1.4, 2.0)

    def __post_init__(self):
        if self.count < 0:
            raise ConfigError(f"Object count can't be negative: {self.count}")
        for f in fields(self):
            if f.name == "count":
                continue
            low, high = getattr(self, f.name)
            if not 0 <= low <= high:
                raise ConfigError(f"Invalid objects {f.name}: [{low}, {high}]")
        if self.speed_range[1] > MAX_SPEED:
            raise ConfigError(f"Object speeds can't exceed {MAX_SPEED} m/s")
        for name in ["length_range", "width_range", "height_range"]:
            if getattr(self, name)[0] <= 0:
                raise ConfigError(f"Objects {name} must be positive")


@dataclass(frozen=True)
class LidarConfig:
    rings: int = 16
    min_elevation: float = math.radians(-15)
    max_elevation: float = math.radians(15)
    azimuth_resolution: float = math.radians(0.4)
    max_range: float = 100.0  # m

    def __post_init__(self):
        if self.rings < 1:
            raise ConfigError(f"LiDAR needs at least one ring, got {self.rings}")
        if self.max_elevation < self.min_elevation:
            raise ConfigError("LiDAR max_elevation is below min_elevation")
        if not 0 < self.azimuth_resolution < math.pi:
            raise ConfigError(f"Invalid azimuth resolution: {self.azimuth_resolution}")
        if self.max_range <= 0:
            raise ConfigError(f"LiDAR max_range must be positive, got {self.max_range}")

    @property
    def elevations(self) -> np.ndarray:
        if self.rings == 1:
            return np.array([self.min_elevation])
        return np.linspace(self.min_elevation, self.max_elevation, self.rings)

    @property
    def azimuth_count(self) -> int:
        return int(round(2 * math.pi / self.azimuth_resolution))


@dataclass(frozen=True)
class NoiseConfig:
    range_sigma: float = 0.01  # m
    timestamp_jitter: float = 0.0  # s, sigma of the per-sensor clock offsets

    def __post_init__(self):
        if self.range_sigma < 0 or self.timestamp_jitter < 0:
            raise ConfigError("Noise sigmas can't be negative")


@dataclass(frozen=True)
class SceneConfig:
    seed: int = 0
    duration: float = 1.0  # s
    lidar_rate: float = 10.0  # Hz
    camera_rate: float = 30.0  # Hz
    ins_rate: float = 125.0  # Hz
    buildings: int = 10
    vehicles: tuple[VehicleConfig, ...] = DEFAULT_VEHICLES
    objects: ObjectsConfig = field(default_factory=ObjectsConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def __post_init__(self):
        for name in ["lidar_rate", "camera_rate", "ins_rate"]:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.duration < 2 / self.lidar_rate:
            raise ConfigError(
                f"Duration {self.duration} s is shorter than 2 LiDAR periods"
            )
        if self.buildings < 0:
            raise ConfigError(f"Building count can't be negative: {self.buildings}")
        if not self.vehicles:
            raise ConfigError("At least one vehicle is needed")
        names = [vehicle.name for vehicle in self.vehicles]
        if len(set(names)) != len(names):
            raise ConfigError(f"Duplicate vehicle names: {names}")

    @property
    def scan_count(self) -> int:
        return int(round(self.duration * self.lidar_rate))

    @property
    def end_time(self) -> float:
        return self.duration + 2 / self.lidar_rate

    def scan_start(self, index: int) -> float:
        return (index + 1) / self.lidar_rate

    def vehicle(self, name: str) -> VehicleConfig:
        for vehicle in self.vehicles:
            if vehicle.name == name:
                return vehicle
        raise KeyError(name)

    def to_dict(self) -> dict:
        return to_plain(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SceneConfig":
        data = dict(data)
        vehicles = tuple(
            VehicleConfig(
                name=vehicle["name"],
                motion=Motion.from_dict(vehicle["motion"]),
                lidar_yaw=vehicle["lidar_yaw"],
                lidar_translation=tuple(vehicle["lidar_translation"]),
                cameras=tuple(CameraSpec(**camera) for camera in vehicle["cameras"]),
            )
            for vehicle in data.pop("vehicles")
        )
        objects = {
            key: tuple(value) if isinstance(value, list) else value
            for key, value in data.pop("objects").items()
        }
        return cls(
            vehicles=vehicles,
            objects=ObjectsConfig(**objects),
            lidar=LidarConfig(**data.pop("lidar")),
            noise=NoiseConfig(**data.pop("noise")),
            **data,
        )


def to_plain(value: Any) -> Any:
    if hasattr(value, "__dataclass_fields__"):
        return {f.name: to_plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    return value


@dataclass(frozen=True, eq=False)
class ObjectTrack:
    object_id: int
    class_label: ObjectClass
    dimensions: np.ndarray
    motion: Motion

    def __post_init__(self):
        object.__setattr__(self, "dimensions", readonly(self.dimensions, shape=(3,)))
        object.__setattr__(self, "class_label", ObjectClass(self.class_label))

    def states_at(self, times: Any) -> tuple[np.ndarray, np.ndarray]:
        """Box centers and yaws; the box bottom sits on ``motion.z``."""
        positions, yaws = self.motion.states_at(times)
        positions[:, 2] += self.dimensions[2] / 2
        return positions, yaws

    def box_at(self, t: float) -> Box3D:
        centers, yaws = self.states_at(t)
        return Box3D(centers[0], self.dimensions, yaws[0], self.object_id, self.class_label)

    def to_dict(self) -> dict:
        return dict(
            object_id=self.object_id,
            class_label=self.class_label.value,
            dimensions=self.dimensions.tolist(),
            motion=self.motion.to_dict(),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectTrack":
        return cls(
            object_id=data["object_id"],
            class_label=data["class_label"],
            dimensions=data["dimensions"],
            motion=Motion.from_dict(data["motion"]),
        )


@dataclass(frozen=True)
class GroundTruthBox2D:
    vehicle: str
    camera_id: str
    frame_index: int
    object_id: int
    box: Box2D

    def to_dict(self) -> dict:
        return dict(
            vehicle=self.vehicle,
            camera_id=self.camera_id,
            frame_index=self.frame_index,
            object_id=self.object_id,
            box=self.box.to_dict(),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthBox2D":
        return cls(**{**data, "box": Box2D.from_dict(data["box"])})


@dataclass(frozen=True, eq=False)
class VehicleRecording:
    name: str
    trajectory: PoseTrajectory
    lidar_extrinsic: RigidTransform
    cameras: list[CameraModel]
    scans: list[LidarScan]
    schedules: list[CameraFrameSchedule]

    def camera(self, camera_id: str) -> CameraModel:
        for camera in self.cameras:
            if camera.camera_id == camera_id:
                return camera
        raise KeyError(camera_id)

    def schedule(self, camera_id: str) -> CameraFrameSchedule:
        for schedule in self.schedules:
            if schedule.camera_id == camera_id:
                return schedule
        raise KeyError(camera_id)

    @property
    def camera_ids(self) -> list[str]:
        return [camera.camera_id for camera in self.cameras]


@dataclass(frozen=True, eq=False)
class SceneRecording:
    """Simulated clip: what the sensors reported plus the exact ground truth.

    ``clock_offsets`` maps vehicle → sensor (``ins``, ``lidar`` or a camera
    ID) → how much that sensor's clock runs ahead of the true time.
    """

    config: SceneConfig
    vehicles: list[VehicleRecording]
    objects: list[ObjectTrack]
    buildings: list[Box3D]
    boxes2d: list[GroundTruthBox2D]
    clock_offsets: dict[str, dict[str, float]] = field(default_factory=dict)

    def vehicle(self, name: str) -> VehicleRecording:
        for vehicle in self.vehicles:
            if vehicle.name == name:
                return vehicle
        raise KeyError(name)

    def object(self, object_id: int) -> ObjectTrack:
        return self._objects_by_id[object_id]

    @cached_property
    def _objects_by_id(self) -> dict[int, ObjectTrack]:
        return {track.object_id: track for track in self.objects}

    @cached_property
    def _boxes2d_index(self) -> dict[tuple, Box2D]:
        return {
            (box.vehicle, box.camera_id, box.frame_index, box.object_id): box.box
            for box in self.boxes2d
        }

    def box2d(
        self, vehicle: str, camera_id: str, frame_index: int, object_id: int
    ) -> Box2D | None:
        return self._boxes2d_index.get((vehicle, camera_id, frame_index, object_id))

    def clock_offset(self, vehicle: str, sensor: str) -> float:
        return self.clock_offsets.get(vehicle, {}).get(sensor, 0.0)

    @property
    def recording_id(self) -> str:
        payload = json_dumps(
            dict(config=self.config.to_dict(), clock_offsets=self.clock_offsets),
            indent=None,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "SceneRecording":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SceneRecording(**values)
