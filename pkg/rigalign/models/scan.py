import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from rigalign.models.base import DataError, readonly


TWO_PI = 2 * math.pi

TIME_TOLERANCE = 1e-9  # s

NO_OBJECT = -1


class AzimuthDomainError(DataError):
    pass


class ScanError(DataError):
    pass


@dataclass(frozen=True)
class LidarPoint:
    position: tuple[float, float, float]
    intensity: float
    azimuth: float
    timestamp: float
    object_id: int | None = None


@dataclass(frozen=True, eq=False)
class LidarScan:
    """One revolution of a spinning LiDAR, stored column-wise.

    Positions are in the sensor frame at each point's own acquisition
    instant, unless ``reference_time`` is set, in which case they have been
    compensated to the sensor frame at that time.
    """

    scan_start: float
    period: float
    sensor_frame: str
    positions: np.ndarray
    intensities: np.ndarray
    azimuths: np.ndarray
    timestamps: np.ndarray
    object_ids: np.ndarray
    reference_time: float | None = None

    def __post_init__(self):
        positions = readonly(self.positions, shape=(-1, 3))
        size = len(positions)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "intensities", readonly(self.intensities, shape=(size,)))
        object.__setattr__(self, "azimuths", readonly(self.azimuths, shape=(size,)))
        object.__setattr__(self, "timestamps", readonly(self.timestamps, shape=(size,)))
        object.__setattr__(
            self, "object_ids", readonly(self.object_ids, dtype=np.int64, shape=(size,))
        )
        object.__setattr__(self, "scan_start", float(self.scan_start))
        object.__setattr__(self, "period", float(self.period))
        if self.period <= 0:
            raise ScanError(f"Scan period must be positive, got {self.period}")
        if size:
            if (
                self.timestamps.min() < self.scan_start - TIME_TOLERANCE
                or self.timestamps.max() > self.scan_end + TIME_TOLERANCE
            ):
                raise ScanError(
                    f"Point timestamps [{self.timestamps.min():.9f}, {self.timestamps.max():.9f}] "
                    f"are outside of the scan [{self.scan_start:.9f}, {self.scan_end:.9f}]"
                )
            if np.any(np.diff(self.timestamps) < 0):
                raise ScanError("Point timestamps must be non-decreasing in scan order")

    @classmethod
    def from_points(
        cls,
        scan_start: float,
        period: float,
        sensor_frame: str,
        points: Iterable[LidarPoint],
    ) -> "LidarScan":
        points = list(points)
        return cls(
            scan_start=scan_start,
            period=period,
            sensor_frame=sensor_frame,
            positions=[point.position for point in points] or np.empty((0, 3)),
            intensities=[point.intensity for point in points],
            azimuths=[point.azimuth for point in points],
            timestamps=[point.timestamp for point in points],
            object_ids=[
                NO_OBJECT if point.object_id is None else point.object_id
                for point in points
            ],
        )

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def scan_end(self) -> float:
        return self.scan_start + self.period

    @property
    def is_deskewed(self) -> bool:
        return self.reference_time is not None

    @property
    def source_times(self) -> np.ndarray:
        """Times at which the current positions are expressed, per point."""
        if self.reference_time is None:
            return self.timestamps
        return np.full(len(self), self.reference_time)

    @property
    def points(self) -> list[LidarPoint]:
        return [self.point(index) for index in range(len(self))]

    def point(self, index: int) -> LidarPoint:
        object_id = int(self.object_ids[index])
        return LidarPoint(
            position=tuple(float(value) for value in self.positions[index]),
            intensity=float(self.intensities[index]),
            azimuth=float(self.azimuths[index]),
            timestamp=float(self.timestamps[index]),
            object_id=None if object_id == NO_OBJECT else object_id,
        )

    def object_ids_present(self) -> list[int]:
        return sorted(int(i) for i in np.unique(self.object_ids) if i != NO_OBJECT)

    def subset(self, indices: Any) -> "LidarScan":
        indices = np.asarray(indices, dtype=np.int64)
        return self.replace(
            positions=self.positions[indices],
            intensities=self.intensities[indices],
            azimuths=self.azimuths[indices],
            timestamps=self.timestamps[indices],
            object_ids=self.object_ids[indices],
        )

    def replace(self, **changes) -> "LidarScan":
        values = dict(
            scan_start=self.scan_start,
            period=self.period,
            sensor_frame=self.sensor_frame,
            positions=self.positions,
            intensities=self.intensities,
            azimuths=self.azimuths,
            timestamps=self.timestamps,
            object_ids=self.object_ids,
            reference_time=self.reference_time,
        )
        values.update(changes)
        return LidarScan(**values)

    def shifted(self, offset: float) -> "LidarScan":
        reference_time = None if self.reference_time is None else self.reference_time + offset
        return self.replace(
            scan_start=self.scan_start + offset,
            timestamps=self.timestamps + offset,
            reference_time=reference_time,
        )


def point_timestamp(scan_start: float, azimuth: float, period: float) -> float:
    if period <= 0:
        raise AzimuthDomainError(f"Scan period must be positive, got {period}")
    if not 0 <= azimuth < TWO_PI:
        raise AzimuthDomainError(f"Azimuth {azimuth} rad is outside of [0, 2π)")
    return scan_start + period * azimuth / TWO_PI


def point_timestamps(scan_start: float, azimuths: Any, period: float) -> np.ndarray:
    azimuths = np.asarray(azimuths, dtype=np.float64)
    if period <= 0:
        raise AzimuthDomainError(f"Scan period must be positive, got {period}")
    if azimuths.size and (azimuths.min() < 0 or azimuths.max() >= TWO_PI):
        raise AzimuthDomainError(
            f"Azimuths [{azimuths.min()}, {azimuths.max()}] rad are outside of [0, 2π)"
        )
    return scan_start + period * azimuths / TWO_PI


def azimuths_of(directions: Any) -> np.ndarray:
    """Clockwise azimuth from the sensor +x axis, seen from above, in [0, 2π)."""
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    azimuths = np.mod(np.arctan2(-directions[:, 1], directions[:, 0]), TWO_PI)
    # mod can round -tiny up to exactly 2π
    return np.where(azimuths >= TWO_PI, 0.0, azimuths)


def beam_directions(azimuths: Any, elevations: Any) -> np.ndarray:
    """Unit vectors in the sensor frame for clockwise azimuths and elevations."""
    azimuths = np.asarray(azimuths, dtype=np.float64)
    elevations = np.asarray(elevations, dtype=np.float64)
    cos_elevation = np.cos(elevations)
    return np.stack(
        [
            cos_elevation * np.cos(azimuths),
            -cos_elevation * np.sin(azimuths),
            np.sin(elevations),
        ],
        axis=-1,
    )
