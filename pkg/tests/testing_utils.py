import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation
from strictyaml import load

from rigalign.models.motion import Motion
from rigalign.models.scan import NO_OBJECT, LidarScan, point_timestamps
from rigalign.models.scene import (
    CameraSpec,
    LidarConfig,
    NoiseConfig,
    ObjectsConfig,
    SceneConfig,
    VehicleConfig,
)
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import RigidTransform


FIXTURES_DIR = Path(__file__).parent / "fixtures"


def load_yaml(s, schema):
    """
    Uses json.loads/json.dumps to recursively convert all ordered dicts
    to dicts, which significantly improves readability of the pytest diff
    """
    return json.loads(json.dumps(load(s, schema).data))


def random_transform(
    rng: np.random.Generator,
    source_frame: str = "a",
    target_frame: str = "b",
    scale: float = 10.0,
) -> RigidTransform:
    return RigidTransform(
        Rotation.random(random_state=rng),
        rng.uniform(-scale, scale, 3),
        source_frame,
        target_frame,
    )


def straight_trajectory(
    body_frame: str = "ego/ins",
    speed: float = 10.0,
    yaw: float = 0.0,
    yaw_rate: float = 0.0,
    end: float = 1.0,
    rate: float = 100.0,
) -> PoseTrajectory:
    """Samples a constant-velocity (or constant-turn) motion from 0 to ``end``."""
    times = np.arange(int(round(end * rate)) + 1) / rate
    rotations, translations = Motion(
        yaw=yaw, speed=speed, yaw_rate=yaw_rate
    ).poses_at(times)
    return PoseTrajectory(times, rotations, translations, body_frame)


def lidar_extrinsic(vehicle: str = "ego", yaw: float = 0.0) -> RigidTransform:
    return RigidTransform.from_yaw(yaw, [0.0, 0.0, 1.5], f"{vehicle}/lidar", f"{vehicle}/ins")


def make_scan(
    azimuths,
    positions=None,
    object_ids=None,
    scan_start: float = 0.1,
    period: float = 0.1,
    sensor_frame: str = "ego/lidar",
) -> LidarScan:
    """Scan with points at the given azimuths, 10 m away unless positions are given."""
    azimuths = np.asarray(azimuths, dtype=np.float64)
    if positions is None:
        positions = np.column_stack(
            [10 * np.cos(azimuths), -10 * np.sin(azimuths), np.zeros(len(azimuths))]
        )
    if object_ids is None:
        object_ids = np.full(len(azimuths), NO_OBJECT)
    return LidarScan(
        scan_start=scan_start,
        period=period,
        sensor_frame=sensor_frame,
        positions=np.asarray(positions, dtype=np.float64).reshape(-1, 3),
        intensities=np.full(len(azimuths), 0.5),
        azimuths=azimuths,
        timestamps=point_timestamps(scan_start, azimuths, period),
        object_ids=object_ids,
    )


def small_scene_config(**kwargs) -> SceneConfig:
    """A couple of coarse scans, cheap enough to simulate in every test."""
    defaults = dict(
        seed=42,
        duration=0.2,
        buildings=4,
        objects=ObjectsConfig(count=3, distance_range=(8.0, 20.0)),
        lidar=LidarConfig(rings=6, azimuth_resolution=math.radians(2.0)),
        noise=NoiseConfig(range_sigma=0.0),
        vehicles=(
            VehicleConfig("ego", Motion(speed=10.0, z=0.5)),
            VehicleConfig(
                "cav",
                Motion(x=-15.0, y=-3.5, speed=10.0, z=0.5),
                cameras=(CameraSpec("front_wide", 0.0, math.radians(80)),),
            ),
        ),
    )
    defaults.update(kwargs)
    return SceneConfig(**defaults)


# the same scene as small_scene_config(), written as a run configuration
SMALL_SCENE_YAML = """\
simulate:
  seed: 42
  duration: 0.2
  buildings: 4
  range_sigma: 0
  objects:
    count: 3
    max_distance: 20
  lidar:
    rings: 6
    azimuth_resolution: 2
  vehicles:
    - name: ego
      speed: 10
    - name: cav
      x: -15
      y: -3.5
      speed: 10
      cameras:
        - id: front_wide
          yaw: 0
          fov: 80
"""


def write_small_recording(path: Path, **kwargs) -> Path:
    from rigalign.lib.storage import write_recording
    from rigalign.sim import simulate_scene

    return write_recording(simulate_scene(small_scene_config(**kwargs)), path)
