"""Synthetic rig: vehicles with an INS, a spinning LiDAR and cameras, driving
among static buildings and moving objects, with exact ground truth."""

import math
from multiprocessing import Pool

import numpy as np

from rigalign.lib import loggers
from rigalign.lib.deskew import lidar_pose
from rigalign.models.alignment import CameraFrameSchedule
from rigalign.models.boxes import Box3D, ObjectClass
from rigalign.models.camera import CameraModel, project_box3d
from rigalign.models.motion import Motion
from rigalign.models.scan import LidarScan
from rigalign.models.scene import (
    GroundTruthBox2D,
    ObjectTrack,
    SceneConfig,
    SceneRecording,
    VehicleConfig,
    VehicleRecording,
)
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import compose, invert
from rigalign.sim.jitter import apply_sync_jitter
from rigalign.sim.raycast import simulate_scan
from rigalign.sim.rig import camera_models, lidar_extrinsic


WORKERS = 1

ROAD_CLEARANCE = 12.0  # m, buildings keep off the first vehicle's path

BUILDING_DEPTH = (6.0, 12.0)

BUILDING_LENGTH = (8.0, 20.0)

BUILDING_HEIGHT = (4.0, 12.0)

TIME_EPSILON = 1e-9  # s


logger = loggers.from_path(__file__)


def sample_times(rate: float, end_time: float) -> np.ndarray:
    """Multiples of 1/rate from 0 up to and including ``end_time``."""
    count = int(math.floor(end_time * rate + TIME_EPSILON)) + 1
    return np.arange(count) / rate


def ins_trajectory(config: SceneConfig, vehicle: VehicleConfig) -> PoseTrajectory:
    times = sample_times(config.ins_rate, config.end_time)
    if times[-1] < config.end_time:
        times = np.append(times, times[-1] + 1 / config.ins_rate)
    rotations, positions = vehicle.motion.poses_at(times)
    return PoseTrajectory(times, rotations, positions, vehicle.ins_frame)


def generate_buildings(config: SceneConfig, rng: np.random.Generator) -> list[Box3D]:
    motion = config.vehicles[0].motion
    travel = abs(motion.speed) * config.end_time
    heading = np.array([math.cos(motion.yaw), math.sin(motion.yaw), 0.0])
    normal = np.array([-heading[1], heading[0], 0.0])
    start = np.array([motion.x, motion.y, 0.0])
    buildings = []
    for index in range(config.buildings):
        depth = rng.uniform(*BUILDING_DEPTH)
        dimensions = np.array(
            [rng.uniform(*BUILDING_LENGTH), depth, rng.uniform(*BUILDING_HEIGHT)]
        )
        along = rng.uniform(-30.0, travel + 40.0)
        side = 1 if index % 2 == 0 else -1
        across = side * (ROAD_CLEARANCE + depth / 2 + rng.uniform(0.0, 10.0))
        center = start + along * heading + across * normal
        center[2] = dimensions[2] / 2
        buildings.append(
            Box3D(
                center,
                dimensions,
                motion.yaw + rng.uniform(-0.1, 0.1),
                index,
                ObjectClass.OTHERS,
            )
        )
    return buildings


def generate_objects(config: SceneConfig, rng: np.random.Generator) -> list[ObjectTrack]:
    """Cars around the first vehicle, each moving straight at a relative speed
    drawn from the configured range and passing its sampled spot mid-clip."""
    settings = config.objects
    ego = config.vehicles[0].motion
    middle = config.end_time / 2
    ego_positions, _ = ego.states_at(middle)
    ego_velocity = ego.velocities_at(middle)[0]
    tracks = []
    for index in range(settings.count):
        bearing = rng.uniform(-math.pi, math.pi)
        distance = rng.uniform(*settings.distance_range)
        spot = ego_positions[0] + distance * np.array(
            [math.cos(bearing), math.sin(bearing), 0.0]
        )
        direction = rng.uniform(-math.pi, math.pi)
        relative_speed = rng.uniform(*settings.speed_range)
        velocity = ego_velocity + relative_speed * np.array(
            [math.cos(direction), math.sin(direction), 0.0]
        )
        speed = float(np.linalg.norm(velocity[:2]))
        yaw = math.atan2(velocity[1], velocity[0]) if speed > 0 else direction
        origin = spot - velocity * middle
        dimensions = [
            rng.uniform(*settings.length_range),
            rng.uniform(*settings.width_range),
            rng.uniform(*settings.height_range),
        ]
        tracks.append(
            ObjectTrack(
                object_id=index + 1,
                class_label=ObjectClass.CAR,
                dimensions=dimensions,
                motion=Motion(x=origin[0], y=origin[1], z=0.0, yaw=yaw, speed=speed),
            )
        )
    return tracks


def frame_schedules(
    config: SceneConfig, cameras: list[CameraModel]
) -> list[CameraFrameSchedule]:
    times = sample_times(config.camera_rate, config.end_time)
    return [
        CameraFrameSchedule(camera.camera_id, times, config.camera_rate)
        for camera in cameras
    ]


def ground_truth_boxes(
    vehicle: VehicleRecording, objects: list[ObjectTrack]
) -> list[GroundTruthBox2D]:
    """Every object projected at the exact time of every frame."""
    boxes = []
    for camera in vehicle.cameras:
        schedule = vehicle.schedule(camera.camera_id)
        for frame_index, frame_time in enumerate(schedule.frame_timestamps):
            world_to_camera = compose(
                camera.extrinsic,
                invert(lidar_pose(vehicle.trajectory, vehicle.lidar_extrinsic, frame_time)),
            )
            for track in objects:
                box = project_box3d(camera, track.box_at(frame_time), world_to_camera)
                if box is not None:
                    boxes.append(
                        GroundTruthBox2D(
                            vehicle.name, camera.camera_id, frame_index, track.object_id, box
                        )
                    )
    return boxes


def scan_task(args: tuple) -> LidarScan:
    (
        config,
        vehicle_index,
        scan_index,
        trajectory,
        extrinsic,
        buildings,
        objects,
    ) = args
    rng = np.random.default_rng([config.seed, vehicle_index, scan_index])
    return simulate_scan(
        config.scan_start(scan_index),
        1 / config.lidar_rate,
        trajectory,
        extrinsic,
        config.lidar,
        buildings,
        objects,
        config.noise.range_sigma,
        rng,
    )


def simulate_scene(config: SceneConfig, workers: int | None = None) -> SceneRecording:
    """Deterministic given the config; the worker count doesn't change the output."""
    workers = workers or WORKERS
    rng = np.random.default_rng(config.seed)
    buildings = generate_buildings(config, rng)
    objects = generate_objects(config, rng)
    logger.info(
        f"Simulating {config.duration} s with {len(config.vehicles)} vehicles, "
        f"{len(objects)} objects and {len(buildings)} buildings"
    )

    setups = []
    for vehicle_config in config.vehicles:
        trajectory = ins_trajectory(config, vehicle_config)
        cameras = camera_models(vehicle_config, config.camera_rate)
        setups.append(
            (vehicle_config, trajectory, lidar_extrinsic(vehicle_config), cameras)
        )

    tasks = [
        (config, vehicle_index, scan_index, trajectory, extrinsic, buildings, objects)
        for vehicle_index, (_, trajectory, extrinsic, _) in enumerate(setups)
        for scan_index in range(config.scan_count)
    ]
    if workers > 1:
        with Pool(workers) as pool:
            scans = list(logger.progress(pool.imap(scan_task, tasks), total=len(tasks)))
    else:
        scans = list(logger.progress(map(scan_task, tasks), total=len(tasks)))

    vehicles = []
    boxes2d = []
    for vehicle_index, (vehicle_config, trajectory, extrinsic, cameras) in enumerate(setups):
        first = vehicle_index * config.scan_count
        vehicle = VehicleRecording(
            name=vehicle_config.name,
            trajectory=trajectory,
            lidar_extrinsic=extrinsic,
            cameras=cameras,
            scans=scans[first : first + config.scan_count],
            schedules=frame_schedules(config, cameras),
        )
        vehicles.append(vehicle)
        boxes2d.extend(ground_truth_boxes(vehicle, objects))
    logger.info(f"Generated {len(scans)} scans and {len(boxes2d)} ground truth 2D boxes")

    recording = SceneRecording(
        config=config,
        vehicles=vehicles,
        objects=objects,
        buildings=buildings,
        boxes2d=boxes2d,
    )
    if config.noise.timestamp_jitter > 0:
        recording = apply_sync_jitter(recording, config.noise.timestamp_jitter, config.seed)
    return recording
