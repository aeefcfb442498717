from dataclasses import dataclass, field
from enum import StrEnum, unique
from typing import Any, Iterable

import numpy as np

from rigalign.models.base import DataError, readonly


SCHEDULE_TOLERANCE = 0.1


@unique
class Strategy(StrEnum):
    STAMP = "stamp"
    FRAME = "frame"
    TARGET = "target"

    @property
    def compensates(self) -> bool:
        return self != Strategy.STAMP


class ScheduleError(DataError):
    pass


@dataclass(frozen=True, eq=False)
class CameraFrameSchedule:
    """Timestamps of one camera's frames, as reported by the camera clock."""

    camera_id: str
    frame_timestamps: np.ndarray
    frame_rate: float = 30.0

    def __post_init__(self):
        timestamps = readonly(self.frame_timestamps).reshape(-1)
        object.__setattr__(self, "frame_timestamps", timestamps)
        if self.frame_rate <= 0:
            raise ScheduleError(f"Camera {self.camera_id!r} needs a positive frame rate")
        deltas = np.diff(timestamps)
        if np.any(deltas <= 0):
            raise ScheduleError(
                f"Frame timestamps of camera {self.camera_id!r} must be strictly increasing"
            )
        if np.any(np.abs(deltas - self.period) > SCHEDULE_TOLERANCE * self.period):
            worst = float(deltas[np.argmax(np.abs(deltas - self.period))])
            raise ScheduleError(
                f"Camera {self.camera_id!r} has a frame delta of {worst:.6f} s, "
                f"nominal period is {self.period:.6f} s"
            )

    def __len__(self) -> int:
        return len(self.frame_timestamps)

    @property
    def period(self) -> float:
        return 1 / self.frame_rate

    def shifted(self, offset: float) -> "CameraFrameSchedule":
        return CameraFrameSchedule(
            self.camera_id, self.frame_timestamps + offset, self.frame_rate
        )

    def to_dict(self) -> dict:
        return dict(
            camera_id=self.camera_id,
            frame_rate=self.frame_rate,
            frame_timestamps=self.frame_timestamps.tolist(),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "CameraFrameSchedule":
        return cls(**data)


@dataclass(frozen=True)
class ObjectAlignment:
    frame_time: float
    compensation_time: float
    mean_time: float

    def to_dict(self) -> dict:
        return dict(
            frame_time=self.frame_time,
            compensation_time=self.compensation_time,
            mean_time=self.mean_time,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectAlignment":
        return cls(**data)


@dataclass(frozen=True, eq=False)
class AlignmentAssignment:
    """LiDAR points associated with one camera frame.

    ``per_object`` lists the objects with points in the scan and says which
    frame their geometry belongs to for this camera. Runs aligned from a
    recording keep only the objects the camera has a 2D box for.
    ``positions`` holds the subset after compensation and is not serialized.
    """

    camera_id: str
    chosen_frame_time: float
    point_indices: np.ndarray
    compensation_time: float
    representative_time: float
    compensated: bool
    per_object: dict[int, ObjectAlignment] = field(default_factory=dict)
    positions: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "point_indices", readonly(self.point_indices, dtype=np.int64).reshape(-1)
        )
        if self.positions is not None:
            object.__setattr__(
                self, "positions", readonly(self.positions, shape=(len(self.point_indices), 3))
            )

    def __len__(self) -> int:
        return len(self.point_indices)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, AlignmentAssignment):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        return dict(
            camera_id=self.camera_id,
            chosen_frame_time=self.chosen_frame_time,
            compensation_time=self.compensation_time,
            representative_time=self.representative_time,
            compensated=self.compensated,
            index_ranges=to_ranges(self.point_indices),
            per_object={
                str(object_id): alignment.to_dict()
                for object_id, alignment in sorted(self.per_object.items())
            },
        )

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentAssignment":
        data = dict(data)
        return cls(
            point_indices=from_ranges(data.pop("index_ranges")),
            per_object={
                int(object_id): ObjectAlignment.from_dict(alignment)
                for object_id, alignment in data.pop("per_object").items()
            },
            **data,
        )


@dataclass(frozen=True)
class ScanAlignment:
    vehicle: str
    scan_index: int
    scan_start: float
    assignments: list[AlignmentAssignment]

    def assignment(self, camera_id: str) -> AlignmentAssignment:
        for assignment in self.assignments:
            if assignment.camera_id == camera_id:
                return assignment
        raise KeyError(camera_id)

    def to_dict(self) -> dict:
        return dict(
            vehicle=self.vehicle,
            scan_index=self.scan_index,
            scan_start=self.scan_start,
            assignments=[assignment.to_dict() for assignment in self.assignments],
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ScanAlignment":
        return cls(
            vehicle=data["vehicle"],
            scan_index=data["scan_index"],
            scan_start=data["scan_start"],
            assignments=[AlignmentAssignment.from_dict(a) for a in data["assignments"]],
        )


@dataclass(frozen=True)
class AlignmentRun:
    recording_id: str
    strategy: Strategy
    scans: list[ScanAlignment]

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def to_dict(self) -> dict:
        return dict(
            recording_id=self.recording_id,
            strategy=self.strategy.value,
            scans=[scan.to_dict() for scan in self.scans],
        )

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentRun":
        return cls(
            recording_id=data["recording_id"],
            strategy=data["strategy"],
            scans=[ScanAlignment.from_dict(scan) for scan in data["scans"]],
        )


def to_ranges(indices: Iterable[int]) -> list[list[int]]:
    """Sorted indices as half-open [start, stop) runs."""
    indices = np.unique(np.asarray(list(indices), dtype=np.int64))
    if not len(indices):
        return []
    breaks = np.flatnonzero(np.diff(indices) != 1) + 1
    starts = np.concatenate([[0], breaks])
    stops = np.concatenate([breaks, [len(indices)]])
    return [
        [int(indices[start]), int(indices[stop - 1]) + 1]
        for start, stop in zip(starts, stops)
    ]


def from_ranges(ranges: Iterable[Iterable[int]]) -> np.ndarray:
    parts = [np.arange(start, stop, dtype=np.int64) for start, stop in ranges]
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts)
