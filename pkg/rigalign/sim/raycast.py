"""Analytic ray casting against the ground plane and oriented boxes."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from rigalign.lib.deskew import lidar_poses
from rigalign.models.boxes import Box3D
from rigalign.models.scan import NO_OBJECT, LidarScan, beam_directions, point_timestamps
from rigalign.models.scene import LidarConfig, ObjectTrack
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import RigidTransform


class Surface(IntEnum):
    GROUND = 0
    BUILDING = 1
    OBJECT = 2


# indexed by Surface
INTENSITIES = np.array([0.15, 0.45, 0.8])

MIN_RANGE = 0.5  # m


@dataclass(frozen=True)
class Hits:
    distances: np.ndarray
    surfaces: np.ndarray
    object_ids: np.ndarray


def ray_box_distances(
    origins: np.ndarray,
    directions: np.ndarray,
    centers: np.ndarray,
    yaws: np.ndarray,
    dimensions: np.ndarray,
) -> np.ndarray:
    """Entry distance of every ray into its oriented box, inf when missed.

    Box poses may differ per ray (a moving box seen at each ray's instant);
    rays starting inside the box don't hit it.
    """
    cos, sin = np.cos(yaws), np.sin(yaws)
    offsets = origins - centers

    def to_local(vectors):
        return np.column_stack(
            [
                cos * vectors[:, 0] + sin * vectors[:, 1],
                -sin * vectors[:, 0] + cos * vectors[:, 1],
                vectors[:, 2],
            ]
        )

    local_origins = to_local(offsets)
    local_directions = to_local(directions)
    half = np.asarray(dimensions) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        near = (-half - local_origins) / local_directions
        far = (half - local_origins) / local_directions
    entry = np.nanmax(np.minimum(near, far), axis=1)
    leave = np.nanmin(np.maximum(near, far), axis=1)
    hit = (entry > 0) & (leave >= entry)
    return np.where(hit, entry, np.inf)


def ray_ground_distances(origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        distances = -origins[:, 2] / directions[:, 2]
    return np.where((directions[:, 2] < 0) & (distances > 0), distances, np.inf)


def cast(
    origins: np.ndarray,
    directions: np.ndarray,
    times: np.ndarray,
    buildings: list[Box3D],
    objects: list[ObjectTrack],
) -> Hits:
    distances = ray_ground_distances(origins, directions)
    surfaces = np.full(len(origins), Surface.GROUND, dtype=np.int64)
    object_ids = np.full(len(origins), NO_OBJECT, dtype=np.int64)

    for building in buildings:
        candidate = ray_box_distances(
            origins,
            directions,
            building.center,
            np.full(len(origins), building.yaw),
            building.dimensions,
        )
        closer = candidate < distances
        distances[closer] = candidate[closer]
        surfaces[closer] = Surface.BUILDING
        object_ids[closer] = NO_OBJECT

    for track in objects:
        centers, yaws = track.states_at(times)
        candidate = ray_box_distances(origins, directions, centers, yaws, track.dimensions)
        closer = candidate < distances
        distances[closer] = candidate[closer]
        surfaces[closer] = Surface.OBJECT
        object_ids[closer] = track.object_id

    return Hits(distances=distances, surfaces=surfaces, object_ids=object_ids)


def simulate_scan(
    scan_start: float,
    period: float,
    traj: PoseTrajectory,
    lidar_extrinsic: RigidTransform,
    lidar: LidarConfig,
    buildings: list[Box3D],
    objects: list[ObjectTrack],
    range_sigma: float,
    rng: np.random.Generator,
) -> LidarScan:
    """One clockwise revolution; every azimuth column fires all rings at once."""
    azimuth_count = lidar.azimuth_count
    elevations = lidar.elevations
    column_azimuths = np.arange(azimuth_count) * (2 * np.pi / azimuth_count)
    column_times = point_timestamps(scan_start, column_azimuths, period)

    rotations, translations = lidar_poses(traj, lidar_extrinsic, column_times)
    column = np.repeat(np.arange(azimuth_count), len(elevations))
    azimuths = column_azimuths[column]
    times = column_times[column]
    local_directions = beam_directions(azimuths, np.tile(elevations, azimuth_count))
    directions = rotations[column].apply(local_directions)
    origins = translations[column]

    hits = cast(origins, directions, times, buildings, objects)
    valid = (hits.distances >= MIN_RANGE) & (hits.distances <= lidar.max_range)
    ranges = hits.distances[valid]
    if range_sigma > 0:
        ranges = ranges + rng.normal(0.0, range_sigma, len(ranges))
    surfaces = hits.surfaces[valid]
    return LidarScan(
        scan_start=scan_start,
        period=period,
        sensor_frame=lidar_extrinsic.source_frame,
        positions=local_directions[valid] * ranges[:, np.newaxis],
        intensities=INTENSITIES[surfaces],
        azimuths=azimuths[valid],
        timestamps=times[valid],
        object_ids=hits.object_ids[valid],
    )
