"""Scan, pose and calibration files.

Scans are either CSV (``x,y,z,intensity,azimuth,timestamp,object_id``, 9
significant digits, empty object ID for background points) or ``.npy``
structured arrays with the same columns. Poses are CSV with exact
(17 significant digits) values. Calibration is JSON.
"""

import csv
import io
import json
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from rigalign.models.base import DataError, json_dumps
from rigalign.models.camera import CameraModel
from rigalign.models.scan import NO_OBJECT, LidarScan
from rigalign.models.trajectory import PoseTrajectory
from rigalign.models.transform import RigidTransform


SCAN_COLUMNS = ["x", "y", "z", "intensity", "azimuth", "timestamp", "object_id"]

SCAN_DTYPE = np.dtype(
    [(name, "<f8") for name in SCAN_COLUMNS[:-1]] + [("object_id", "<i8")]
)

POSE_COLUMNS = ["t", "qx", "qy", "qz", "qw", "x", "y", "z"]

SCAN_FORMATS = ["npy", "csv"]

CSV_TIME_TOLERANCE = 1e-8  # relative


class RecordingFormatError(DataError):
    pass


def format_scan_csv(scan: LidarScan) -> str:
    lines = [",".join(SCAN_COLUMNS)]
    for position, intensity, azimuth, timestamp, object_id in zip(
        scan.positions, scan.intensities, scan.azimuths, scan.timestamps, scan.object_ids
    ):
        values = [*position, intensity, azimuth, timestamp]
        cells = [f"{value:.9g}" for value in values]
        cells.append("" if object_id == NO_OBJECT else str(int(object_id)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_scan_csv(
    text: str, scan_start: float, period: float, sensor_frame: str
) -> LidarScan:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise RecordingFormatError("Scan CSV is empty")
    if header != SCAN_COLUMNS:
        raise RecordingFormatError(f"Unexpected scan CSV header: {header}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != len(SCAN_COLUMNS):
            raise RecordingFormatError(f"Line {line_no} has {len(row)} columns")
        try:
            rows.append(
                (*map(float, row[:-1]), int(row[-1]) if row[-1] else NO_OBJECT)
            )
        except ValueError as e:
            raise RecordingFormatError(f"Line {line_no}: {e}") from e
    array = np.array(rows, dtype=SCAN_DTYPE)
    # nine digits may round a timestamp just outside the scan
    timestamps = array["timestamp"]
    clipped = np.clip(timestamps, scan_start, scan_start + period)
    tolerance = CSV_TIME_TOLERANCE * max(1.0, abs(scan_start))
    array["timestamp"] = np.where(np.abs(timestamps - clipped) <= tolerance, clipped, timestamps)
    return scan_from_array(array, scan_start, period, sensor_frame)


def scan_to_array(scan: LidarScan) -> np.ndarray:
    array = np.empty(len(scan), dtype=SCAN_DTYPE)
    array["x"], array["y"], array["z"] = scan.positions.T
    array["intensity"] = scan.intensities
    array["azimuth"] = scan.azimuths
    array["timestamp"] = scan.timestamps
    array["object_id"] = scan.object_ids
    return array


def scan_from_array(
    array: np.ndarray, scan_start: float, period: float, sensor_frame: str
) -> LidarScan:
    if array.dtype.names != tuple(SCAN_COLUMNS):
        raise RecordingFormatError(f"Unexpected scan columns: {array.dtype.names}")
    return LidarScan(
        scan_start=scan_start,
        period=period,
        sensor_frame=sensor_frame,
        positions=np.column_stack([array["x"], array["y"], array["z"]]),
        intensities=array["intensity"],
        azimuths=array["azimuth"],
        timestamps=array["timestamp"],
        object_ids=array["object_id"],
    )


def write_scan(scan: LidarScan, path: Path) -> None:
    if path.suffix == ".csv":
        path.write_text(format_scan_csv(scan))
    elif path.suffix == ".npy":
        with path.open("wb") as f:
            np.save(f, scan_to_array(scan), allow_pickle=False)
    else:
        raise RecordingFormatError(f"Unknown scan format: {path.name}")


def read_scan(
    path: Path, scan_start: float, period: float, sensor_frame: str
) -> LidarScan:
    if path.suffix == ".csv":
        return parse_scan_csv(path.read_text(), scan_start, period, sensor_frame)
    if path.suffix == ".npy":
        try:
            array = np.load(path, allow_pickle=False)
        except ValueError as e:
            raise RecordingFormatError(f"Invalid scan file {path}: {e}") from e
        return scan_from_array(array, scan_start, period, sensor_frame)
    raise RecordingFormatError(f"Unknown scan format: {path.name}")


def format_poses_csv(traj: PoseTrajectory) -> str:
    lines = [",".join(POSE_COLUMNS)]
    quaternions = traj.rotations.as_quat()
    for t, quaternion, translation in zip(traj.timestamps, quaternions, traj.translations):
        lines.append(",".join(f"{value:.17g}" for value in [t, *quaternion, *translation]))
    return "\n".join(lines) + "\n"


def parse_poses_csv(text: str, body_frame: str, world_frame: str = "world") -> PoseTrajectory:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != POSE_COLUMNS:
        raise RecordingFormatError(f"Unexpected poses CSV header: {header}")
    try:
        rows = np.array([[float(value) for value in row] for row in reader])
    except ValueError as e:
        raise RecordingFormatError(f"Invalid poses CSV: {e}") from e
    if rows.ndim != 2 or rows.shape[1] != len(POSE_COLUMNS):
        raise RecordingFormatError(f"Poses CSV has a wrong shape: {rows.shape}")
    return PoseTrajectory(
        timestamps=rows[:, 0],
        rotations=Rotation.from_quat(rows[:, 1:5]),
        translations=rows[:, 5:8],
        body_frame=body_frame,
        world_frame=world_frame,
    )


def format_calibration(
    vehicle: str, lidar_extrinsic: RigidTransform, cameras: list[CameraModel]
) -> str:
    return (
        json_dumps(
            dict(
                vehicle=vehicle,
                lidar_extrinsic=lidar_extrinsic.to_dict(),
                cameras=[camera.to_dict() for camera in cameras],
            )
        )
        + "\n"
    )


def parse_calibration(text: str) -> tuple[str, RigidTransform, list[CameraModel]]:
    try:
        data = json.loads(text)
        return (
            data["vehicle"],
            RigidTransform.from_dict(data["lidar_extrinsic"]),
            [CameraModel.from_dict(camera) for camera in data["cameras"]],
        )
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise RecordingFormatError(f"Invalid calibration: {e!r}") from e
