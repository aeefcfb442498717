from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from rigalign.models.base import FrameMismatchError, readonly


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Maps coordinates in ``source_frame`` to coordinates in ``target_frame``.

    The rotation is kept as a scipy ``Rotation`` (unit quaternion inside),
    the translation is a read-only 3-vector in meters.
    """

    rotation: Rotation
    translation: np.ndarray
    source_frame: str
    target_frame: str
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.rotation, Rotation) or not self.rotation.single:
            raise TypeError("RigidTransform needs a single scipy Rotation")
        object.__setattr__(self, "translation", readonly(self.translation, shape=(3,)))
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation.as_matrix()
        matrix[:3, 3] = self.translation
        object.__setattr__(self, "_matrix", readonly(matrix))

    @classmethod
    def identity(cls, frame: str, target_frame: str | None = None) -> "RigidTransform":
        return cls(Rotation.identity(), np.zeros(3), frame, target_frame or frame)

    @classmethod
    def from_matrix(
        cls, matrix: Any, source_frame: str, target_frame: str
    ) -> "RigidTransform":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise ValueError(f"Expected a 4x4 matrix, got shape {matrix.shape}")
        return cls(
            Rotation.from_matrix(matrix[:3, :3]),
            matrix[:3, 3],
            source_frame,
            target_frame,
        )

    @classmethod
    def from_quaternion(
        cls,
        quaternion: Sequence[float],
        translation: Sequence[float],
        source_frame: str,
        target_frame: str,
    ) -> "RigidTransform":
        """Quaternion in scalar-last (x, y, z, w) order."""
        return cls(Rotation.from_quat(quaternion), translation, source_frame, target_frame)

    @classmethod
    def from_rotvec(
        cls,
        rotvec: Sequence[float],
        translation: Sequence[float],
        source_frame: str,
        target_frame: str,
    ) -> "RigidTransform":
        return cls(Rotation.from_rotvec(rotvec), translation, source_frame, target_frame)

    @classmethod
    def from_yaw(
        cls,
        yaw: float,
        translation: Sequence[float],
        source_frame: str,
        target_frame: str,
    ) -> "RigidTransform":
        return cls(
            Rotation.from_euler("z", yaw), translation, source_frame, target_frame
        )

    @property
    def quaternion(self) -> np.ndarray:
        return self.rotation.as_quat()

    @property
    def rotation_angle(self) -> float:
        return float(self.rotation.magnitude())

    @property
    def yaw(self) -> float:
        forward = self.rotation.apply([1.0, 0.0, 0.0])
        return float(np.arctan2(forward[1], forward[0]))

    def as_matrix(self) -> np.ndarray:
        return self._matrix.copy()

    def apply(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.size == 0:
            return points.reshape(-1, 3).copy()
        return self.rotation.apply(points) + self.translation

    def relabel(self, source_frame: str, target_frame: str) -> "RigidTransform":
        return RigidTransform(self.rotation, self.translation, source_frame, target_frame)

    def to_dict(self) -> dict:
        return dict(
            rotation=self.quaternion.tolist(),
            translation=self.translation.tolist(),
            source_frame=self.source_frame,
            target_frame=self.target_frame,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "RigidTransform":
        return cls.from_quaternion(
            data["rotation"],
            data["translation"],
            data["source_frame"],
            data["target_frame"],
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def __repr__(self) -> str:
        rotvec = np.round(self.rotation.as_rotvec(), 6).tolist()
        translation = np.round(self.translation, 6).tolist()
        return (
            f"RigidTransform({self.source_frame!r} -> {self.target_frame!r}, "
            f"rotvec={rotvec}, translation={translation})"
        )


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Returns ``a ∘ b``, mapping ``b.source_frame`` into ``a.target_frame``."""
    if b.target_frame != a.source_frame:
        raise FrameMismatchError(a.source_frame, b.target_frame)
    return RigidTransform(
        a.rotation * b.rotation,
        a.rotation.apply(b.translation) + a.translation,
        b.source_frame,
        a.target_frame,
    )


def compose_all(transforms: Iterable[RigidTransform]) -> RigidTransform:
    transforms = list(transforms)
    if not transforms:
        raise ValueError("Nothing to compose")
    result = transforms[-1]
    for transform in reversed(transforms[:-1]):
        result = compose(transform, result)
    return result


def invert(t: RigidTransform) -> RigidTransform:
    rotation = t.rotation.inv()
    return RigidTransform(
        rotation, -rotation.apply(t.translation), t.target_frame, t.source_frame
    )


def perturb(
    t: RigidTransform,
    translation_norm: float,
    rotation_angle: float,
    rng: np.random.Generator,
) -> RigidTransform:
    """Adds a random error of exactly the given size.

    The rotation error turns about the source frame origin, so the
    translation moves by ``translation_norm`` only.
    """
    directions = rng.normal(size=(2, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    error = Rotation.from_rotvec(directions[0] * rotation_angle)
    return RigidTransform(
        error * t.rotation,
        t.translation + directions[1] * translation_norm,
        t.source_frame,
        t.target_frame,
    )


def distance(a: RigidTransform, b: RigidTransform) -> tuple[float, float]:
    """Translation (m) and rotation (rad) difference between two transforms."""
    translation = float(np.linalg.norm(a.translation - b.translation))
    rotation = float((a.rotation.inv() * b.rotation).magnitude())
    return translation, rotation
