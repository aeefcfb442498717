"""Sensor clock offsets and the object misalignment they cause."""

from typing import Iterable

import numpy as np

from rigalign.lib import loggers
from rigalign.lib.deskew import lidar_poses
from rigalign.models.scan import NO_OBJECT
from rigalign.models.scene import INS, LIDAR, SceneRecording, VehicleRecording


logger = loggers.from_path(__file__)


def vehicle_sensors(vehicle: VehicleRecording) -> list[str]:
    return [INS, LIDAR, *vehicle.camera_ids]


def clock_offsets(
    sensors: Iterable[str], sigma: float, rng: np.random.Generator
) -> dict[str, float]:
    """Constant offset of every sensor clock, drawn from N(0, sigma)."""
    sensors = list(sensors)
    if sigma == 0:
        return {sensor: 0.0 for sensor in sensors}
    drawn = rng.normal(0.0, sigma, len(sensors))
    return {sensor: float(offset) for sensor, offset in zip(sensors, drawn)}


def apply_sync_jitter(
    rec: SceneRecording,
    sigma: float,
    seed: int = 0,
    offsets: dict[str, dict[str, float]] | None = None,
) -> SceneRecording:
    """Shifts the reported timestamps of every sensor by its clock offset.

    Offsets are drawn per vehicle and sensor unless given explicitly;
    ground truth stays untouched and the offsets are recorded with it.
    """
    if sigma < 0:
        raise ValueError(f"Jitter sigma can't be negative: {sigma}")
    if sigma == 0 and not offsets:
        return rec

    rng = np.random.default_rng([seed, 1])
    vehicles = []
    all_offsets = {}
    for vehicle in rec.vehicles:
        sensors = vehicle_sensors(vehicle)
        if offsets is None:
            vehicle_offsets = clock_offsets(sensors, sigma, rng)
        else:
            vehicle_offsets = {sensor: 0.0 for sensor in sensors}
            vehicle_offsets.update(offsets.get(vehicle.name, {}))
        for sensor, offset in vehicle_offsets.items():
            logger.debug(f"Clock of {vehicle.name}/{sensor} runs {offset * 1000:+.3f} ms off")

        vehicles.append(
            VehicleRecording(
                name=vehicle.name,
                trajectory=vehicle.trajectory.shifted(vehicle_offsets[INS]),
                lidar_extrinsic=vehicle.lidar_extrinsic,
                cameras=vehicle.cameras,
                scans=[scan.shifted(vehicle_offsets[LIDAR]) for scan in vehicle.scans],
                schedules=[
                    schedule.shifted(vehicle_offsets[schedule.camera_id])
                    for schedule in vehicle.schedules
                ],
            )
        )
        previous = rec.clock_offsets.get(vehicle.name, {})
        all_offsets[vehicle.name] = {
            sensor: previous.get(sensor, 0.0) + offset
            for sensor, offset in vehicle_offsets.items()
        }
    return rec.replace(vehicles=vehicles, clock_offsets=all_offsets)


def misalignment(rec: SceneRecording, vehicle_name: str, scan_index: int) -> np.ndarray:
    """Per object point, how far the system believes it is from where it really is.

    The system places a point in the world through the reported trajectory at
    the reported point time. The object really is there where it has moved to
    by the true instant that reported time stands for on the INS clock.
    """
    vehicle = rec.vehicle(vehicle_name)
    scan = vehicle.scans[scan_index]
    ins_offset = rec.clock_offset(vehicle_name, INS)
    lidar_offset = rec.clock_offset(vehicle_name, LIDAR)

    mask = scan.object_ids != NO_OBJECT
    positions = scan.positions[mask]
    object_ids = scan.object_ids[mask]
    reported_times = scan.timestamps[mask]
    true_times = reported_times - lidar_offset
    if not len(positions):
        return np.empty(0)

    rotations, translations = lidar_poses(
        vehicle.trajectory, vehicle.lidar_extrinsic, reported_times
    )
    believed = rotations.apply(positions) + translations

    true_trajectory = vehicle.trajectory.shifted(-ins_offset)
    rotations, translations = lidar_poses(
        true_trajectory, vehicle.lidar_extrinsic, true_times
    )
    actual = rotations.apply(positions) + translations
    believed_instants = reported_times - ins_offset
    for object_id in np.unique(object_ids):
        members = object_ids == object_id
        track = rec.object(int(object_id))
        centers, yaws = track.states_at(true_times[members])
        later_centers, later_yaws = track.states_at(believed_instants[members])
        turn = later_yaws - yaws
        offsets = actual[members] - centers
        cos, sin = np.cos(turn), np.sin(turn)
        actual[members] = later_centers + np.column_stack(
            [
                cos * offsets[:, 0] - sin * offsets[:, 1],
                sin * offsets[:, 0] + cos * offsets[:, 1],
                offsets[:, 2],
            ]
        )
    return np.linalg.norm(believed - actual, axis=1)
