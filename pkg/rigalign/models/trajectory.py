from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from rigalign.models.base import DataError, TrajectoryCoverageError, readonly
from rigalign.models.transform import RigidTransform


class TrajectoryError(DataError):
    pass


@dataclass(frozen=True, eq=False)
class PoseTrajectory:
    """Time-ordered INS poses (world ← body), columnar.

    Translations are interpolated linearly, rotations spherically, always
    between the two bracketing samples.
    """

    timestamps: np.ndarray
    rotations: Rotation
    translations: np.ndarray
    body_frame: str
    world_frame: str = "world"
    _slerp: Slerp = field(init=False, repr=False)

    def __post_init__(self):
        timestamps = readonly(self.timestamps)
        if timestamps.ndim != 1 or len(timestamps) < 2:
            raise TrajectoryError(
                f"A trajectory needs at least 2 samples, got {timestamps.size}"
            )
        if np.any(np.diff(timestamps) <= 0):
            raise TrajectoryError("Trajectory timestamps must be strictly increasing")
        translations = readonly(self.translations, shape=(-1, 3))
        if len(translations) != len(timestamps) or len(self.rotations) != len(
            timestamps
        ):
            raise TrajectoryError(
                f"Trajectory has {len(timestamps)} timestamps, "
                f"{len(self.rotations)} rotations and {len(translations)} translations"
            )
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "translations", translations)
        object.__setattr__(self, "_slerp", Slerp(timestamps, self.rotations))

    @classmethod
    def from_samples(
        cls, samples: Iterable[tuple[float, RigidTransform]]
    ) -> "PoseTrajectory":
        samples = list(samples)
        if len(samples) < 2:
            raise TrajectoryError(
                f"A trajectory needs at least 2 samples, got {len(samples)}"
            )
        frames = {(pose.source_frame, pose.target_frame) for _, pose in samples}
        if len(frames) != 1:
            raise TrajectoryError(f"Mixed frames in trajectory samples: {frames!r}")
        body_frame, world_frame = frames.pop()
        return cls(
            timestamps=[t for t, _ in samples],
            rotations=Rotation.concatenate([pose.rotation for _, pose in samples]),
            translations=[pose.translation for _, pose in samples],
            body_frame=body_frame,
            world_frame=world_frame,
        )

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def start(self) -> float:
        return float(self.timestamps[0])

    @property
    def end(self) -> float:
        return float(self.timestamps[-1])

    @cached_property
    def samples(self) -> list[tuple[float, RigidTransform]]:
        return [(float(t), self.pose_at_index(i)) for i, t in enumerate(self.timestamps)]

    def pose_at_index(self, index: int) -> RigidTransform:
        return RigidTransform(
            self.rotations[index],
            self.translations[index],
            self.body_frame,
            self.world_frame,
        )

    def covers(self, start: float, end: float | None = None) -> bool:
        end = start if end is None else end
        return self.start <= start and end <= self.end

    def check_coverage(self, times: Any) -> None:
        times = np.asarray(times, dtype=np.float64)
        if times.size == 0:
            return
        low, high = float(times.min()), float(times.max())
        if low < self.start or high > self.end:
            raise TrajectoryCoverageError(
                f"Times [{low:.6f}, {high:.6f}] s are outside of the trajectory "
                f"[{self.start:.6f}, {self.end:.6f}] s of {self.body_frame!r}"
            )

    def interpolate(self, times: Any) -> tuple[Rotation, np.ndarray]:
        """Batched interpolation, returns rotations and (N, 3) translations."""
        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        self.check_coverage(times)
        rotations = self._slerp(times)
        translations = np.column_stack(
            [np.interp(times, self.timestamps, self.translations[:, axis]) for axis in range(3)]
        )
        return rotations, translations

    def shifted(self, offset: float) -> "PoseTrajectory":
        return PoseTrajectory(
            self.timestamps + offset,
            self.rotations,
            self.translations,
            self.body_frame,
            self.world_frame,
        )


def interpolate_pose(traj: PoseTrajectory, t: float) -> RigidTransform:
    traj.check_coverage(t)
    index = int(np.searchsorted(traj.timestamps, t))
    if index < len(traj) and traj.timestamps[index] == t:
        return traj.pose_at_index(index)
    rotations, translations = traj.interpolate(t)
    return RigidTransform(
        rotations[0], translations[0], traj.body_frame, traj.world_frame
    )
