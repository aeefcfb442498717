"""Recording directories and result files.

A recording is a directory::

    manifest.json                   recording ID, config, scan index
    calibration/<vehicle>.json      LiDAR extrinsic and cameras
    poses/<vehicle>.csv             INS trajectory
    scans/<vehicle>/<index>.npy     one file per scan (or .csv)
    schedules/<vehicle>.json        camera frame timestamps
    ground_truth/objects.json       object tracks and buildings
    ground_truth/boxes2d.json       2D boxes per frame
    ground_truth/clock_offsets.json

It's written to a temporary sibling directory first and renamed into place,
so a failed write never leaves a half-written recording behind.
"""

import json
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any

from rigalign.lib import loggers
from rigalign.lib.formats import (
    SCAN_FORMATS,
    RecordingFormatError,
    format_calibration,
    format_poses_csv,
    parse_calibration,
    parse_poses_csv,
    read_scan,
    write_scan,
)
from rigalign.models.alignment import AlignmentRun, CameraFrameSchedule
from rigalign.models.base import json_dumps
from rigalign.models.boxes import Box3D
from rigalign.models.evaluation import MetricsTable
from rigalign.models.scene import (
    GroundTruthBox2D,
    ObjectTrack,
    SceneConfig,
    SceneRecording,
    VehicleRecording,
)


MANIFEST_VERSION = 1


logger = loggers.from_path(__file__)


def write_text(path: Path, text: str) -> None:
    """Writes atomically, through a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        Path(tmp_path).unlink(missing_ok=True)
        raise


def write_json(path: Path, data: Any) -> None:
    write_text(path, json_dumps(data) + "\n")


def read_json(path: Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise RecordingFormatError(f"Invalid JSON in {path}: {e}") from e


def scan_path(vehicle: str, index: int, scan_format: str) -> str:
    return f"scans/{vehicle}/{index:06d}.{scan_format}"


def write_recording(
    recording: SceneRecording, path: Path, scan_format: str = "npy"
) -> Path:
    if scan_format not in SCAN_FORMATS:
        raise ValueError(f"Unknown scan format {scan_format!r}, use one of {SCAN_FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_dir = Path(tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}."))
    try:
        _write_contents(recording, tmp_dir, scan_format)
        if path.exists():
            shutil.rmtree(path)
        tmp_dir.rename(path)
    except BaseException:
        shutil.rmtree(tmp_dir, ignore_errors=True)
        raise
    logger.info(f"Saved recording {recording.recording_id} to {path}")
    return path


def _write_contents(recording: SceneRecording, path: Path, scan_format: str) -> None:
    manifest_vehicles = []
    for vehicle in recording.vehicles:
        (path / "calibration").mkdir(exist_ok=True)
        (path / "calibration" / f"{vehicle.name}.json").write_text(
            format_calibration(vehicle.name, vehicle.lidar_extrinsic, vehicle.cameras)
        )
        (path / "poses").mkdir(exist_ok=True)
        (path / "poses" / f"{vehicle.name}.csv").write_text(
            format_poses_csv(vehicle.trajectory)
        )
        write_json(
            path / "schedules" / f"{vehicle.name}.json",
            [schedule.to_dict() for schedule in vehicle.schedules],
        )

        (path / "scans" / vehicle.name).mkdir(parents=True)
        scans = []
        for index, scan in enumerate(logger["scans"].progress(vehicle.scans)):
            relative_path = scan_path(vehicle.name, index, scan_format)
            write_scan(scan, path / relative_path)
            scans.append(
                dict(
                    path=relative_path,
                    scan_start=scan.scan_start,
                    period=scan.period,
                    points=len(scan),
                )
            )
        manifest_vehicles.append(
            dict(
                name=vehicle.name,
                ins_frame=vehicle.trajectory.body_frame,
                lidar_frame=vehicle.lidar_extrinsic.source_frame,
                scans=scans,
            )
        )

    write_json(
        path / "ground_truth" / "objects.json",
        dict(
            objects=[track.to_dict() for track in recording.objects],
            buildings=[building.to_dict() for building in recording.buildings],
        ),
    )
    write_json(
        path / "ground_truth" / "boxes2d.json",
        [box.to_dict() for box in recording.boxes2d],
    )
    write_json(path / "ground_truth" / "clock_offsets.json", recording.clock_offsets)
    write_json(
        path / "manifest.json",
        dict(
            version=MANIFEST_VERSION,
            recording_id=recording.recording_id,
            scan_format=scan_format,
            config=recording.config.to_dict(),
            vehicles=manifest_vehicles,
        ),
    )


def read_recording(path: Path) -> SceneRecording:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise RecordingFormatError(f"{path} isn't a recording, there is no manifest.json")
    manifest = read_json(manifest_path)
    if manifest.get("version") != MANIFEST_VERSION:
        raise RecordingFormatError(f"Unsupported recording version: {manifest.get('version')}")

    try:
        config = SceneConfig.from_dict(manifest["config"])
        vehicles = [_read_vehicle(path, entry) for entry in manifest["vehicles"]]
        objects = read_json(path / "ground_truth" / "objects.json")
        recording = SceneRecording(
            config=config,
            vehicles=vehicles,
            objects=[ObjectTrack.from_dict(track) for track in objects["objects"]],
            buildings=[Box3D.from_dict(building) for building in objects["buildings"]],
            boxes2d=[
                GroundTruthBox2D.from_dict(box)
                for box in read_json(path / "ground_truth" / "boxes2d.json")
            ],
            clock_offsets=read_json(path / "ground_truth" / "clock_offsets.json"),
        )
    except FileNotFoundError as e:
        raise RecordingFormatError(f"Recording {path} is incomplete: {e}") from e
    except (KeyError, TypeError) as e:
        raise RecordingFormatError(f"Recording {path} is malformed: {e!r}") from e

    if recording.recording_id != manifest["recording_id"]:
        raise RecordingFormatError(
            f"Recording {path} claims ID {manifest['recording_id']}, "
            f"its contents hash to {recording.recording_id}"
        )
    logger.info(
        f"Loaded recording {recording.recording_id} from {path}: "
        f"{len(vehicles)} vehicles, {sum(len(v.scans) for v in vehicles)} scans"
    )
    return recording


def _read_vehicle(path: Path, entry: dict) -> VehicleRecording:
    name = entry["name"]
    calibration_name, lidar_extrinsic, cameras = parse_calibration(
        (path / "calibration" / f"{name}.json").read_text()
    )
    if calibration_name != name:
        raise RecordingFormatError(
            f"Calibration of {name!r} belongs to {calibration_name!r}"
        )
    trajectory = parse_poses_csv(
        (path / "poses" / f"{name}.csv").read_text(), entry["ins_frame"]
    )
    schedules = [
        CameraFrameSchedule.from_dict(schedule)
        for schedule in read_json(path / "schedules" / f"{name}.json")
    ]
    scans = [
        read_scan(
            path / scan["path"], scan["scan_start"], scan["period"], entry["lidar_frame"]
        )
        for scan in logger["scans"].progress(entry["scans"])
    ]
    return VehicleRecording(
        name=name,
        trajectory=trajectory,
        lidar_extrinsic=lidar_extrinsic,
        cameras=cameras,
        scans=scans,
        schedules=schedules,
    )


def write_run(run: AlignmentRun, path: Path) -> None:
    write_json(path, run.to_dict())


def read_run(path: Path) -> AlignmentRun:
    try:
        return AlignmentRun.from_dict(read_json(path))
    except (KeyError, TypeError) as e:
        raise RecordingFormatError(f"Alignment run {path} is malformed: {e!r}") from e


def write_metrics(table: MetricsTable, path: Path) -> None:
    write_json(path, table.to_dict())


def read_metrics(path: Path) -> MetricsTable:
    try:
        return MetricsTable.from_dict(read_json(path))
    except (KeyError, TypeError) as e:
        raise RecordingFormatError(f"Metrics {path} are malformed: {e!r}") from e
