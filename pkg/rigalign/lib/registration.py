"""Cross-vehicle registration of simultaneous scans from a recording."""

import numpy as np

from rigalign.lib import loggers
from rigalign.lib.deskew import deskew_to
from rigalign.lib.gicp import (
    chain_initial_transform,
    gicp_refine,
    noisy_chain_initial_transform,
)
from rigalign.models.base import DataError
from rigalign.models.registration import RegistrationParams, RegistrationRun
from rigalign.models.scene import INS, SceneRecording, VehicleRecording
from rigalign.models.trajectory import interpolate_pose


logger = loggers.from_path(__file__)


def pick_vehicles(
    recording: SceneRecording, source: str | None, target: str | None
) -> tuple[VehicleRecording, VehicleRecording]:
    """Defaults to registering the second vehicle into the first one."""
    names = [vehicle.name for vehicle in recording.vehicles]
    if len(names) < 2 and (source is None or target is None):
        raise DataError(f"Registration needs two vehicles, the recording has {names}")
    source = source or names[1]
    target = target or names[0]
    if source == target:
        raise DataError(f"Can't register vehicle {source!r} to itself")
    try:
        return recording.vehicle(source), recording.vehicle(target)
    except KeyError as e:
        raise DataError(f"There is no vehicle {e.args[0]!r}, choose from {names}")


def register_recording(
    recording: SceneRecording,
    scan_index: int,
    source: str | None = None,
    target: str | None = None,
    params: RegistrationParams | None = None,
    translation_noise: float = 0.0,
    rotation_noise: float = 0.0,
    seed: int = 0,
) -> RegistrationRun:
    """Refines the pose-chain transform between two vehicles' LiDARs.

    Both scans are deskewed to the start of the target scan, the chain is
    evaluated there from the reported trajectories, optionally with noise on
    each of its four terms, and GICP refines it. The ground truth comes from
    the same chain on the true trajectories.
    """
    source_vehicle, target_vehicle = pick_vehicles(recording, source, target)
    for vehicle in [source_vehicle, target_vehicle]:
        if not 0 <= scan_index < len(vehicle.scans):
            raise DataError(
                f"Vehicle {vehicle.name!r} has no scan {scan_index}, "
                f"it has {len(vehicle.scans)} scans"
            )
    target_scan = target_vehicle.scans[scan_index]
    reference_time = target_scan.scan_start
    logger.info(
        f"Registering scan {scan_index} of {source_vehicle.name} "
        f"to {target_vehicle.name} at {reference_time:.3f}s"
    )

    def chain_terms(true: bool) -> list:
        terms = []
        for vehicle in [target_vehicle, source_vehicle]:
            trajectory = vehicle.trajectory
            if true:
                trajectory = trajectory.shifted(-recording.clock_offset(vehicle.name, INS))
            terms.append((vehicle.lidar_extrinsic, interpolate_pose(trajectory, reference_time)))
        (t_i1l1, t_wi1), (t_i2l2, t_wi2) = terms
        return [t_i1l1, t_wi1, t_wi2, t_i2l2]

    if translation_noise > 0 or rotation_noise > 0:
        rng = np.random.default_rng(seed)
        initial = noisy_chain_initial_transform(
            *chain_terms(true=False), translation_noise, rotation_noise, rng
        )
    else:
        initial = chain_initial_transform(*chain_terms(true=False))
    ground_truth = chain_initial_transform(*chain_terms(true=True))

    source_scan = deskew_to(
        source_vehicle.scans[scan_index],
        source_vehicle.trajectory,
        source_vehicle.lidar_extrinsic,
        reference_time,
    )
    target_scan = deskew_to(
        target_scan, target_vehicle.trajectory, target_vehicle.lidar_extrinsic, reference_time
    )
    result = gicp_refine(source_scan, target_scan, initial, params)
    return RegistrationRun(
        recording_id=recording.recording_id,
        source=source_vehicle.name,
        target=target_vehicle.name,
        scan_index=scan_index,
        reference_time=reference_time,
        initial=initial,
        ground_truth=ground_truth,
        result=result,
    )
