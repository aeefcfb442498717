from dataclasses import dataclass
from enum import StrEnum, unique
from typing import Any

import numpy as np

from rigalign.models.base import DataError, readonly
from rigalign.models.transform import RigidTransform


@unique
class ObjectClass(StrEnum):
    CAR = "car"
    VAN = "van"
    TRUCK = "truck"
    TRAILER = "trailer"
    BUS = "bus"
    OTHERS = "others"
    PEDESTRIAN = "pedestrian"
    SCOOTER = "scooter"
    BICYCLE = "bicycle"
    MOTORCYCLE = "motorcycle"

    @property
    def is_vehicle(self) -> bool:
        return self in VEHICLE_CLASSES


VEHICLE_CLASSES = frozenset(
    [
        ObjectClass.CAR,
        ObjectClass.VAN,
        ObjectClass.TRUCK,
        ObjectClass.TRAILER,
        ObjectClass.BUS,
        ObjectClass.OTHERS,
    ]
)

# unit cube corners, bottom face first, counter-clockwise seen from above
UNIT_CORNERS = np.array(
    [
        [0.5, 0.5, -0.5],
        [-0.5, 0.5, -0.5],
        [-0.5, -0.5, -0.5],
        [0.5, -0.5, -0.5],
        [0.5, 0.5, 0.5],
        [-0.5, 0.5, 0.5],
        [-0.5, -0.5, 0.5],
        [0.5, -0.5, 0.5],
    ]
)


@dataclass(frozen=True, eq=False)
class Box3D:
    center: np.ndarray
    dimensions: np.ndarray  # length (x), width (y), height (z)
    yaw: float
    object_id: int
    class_label: ObjectClass
    frame: str = "world"

    def __post_init__(self):
        object.__setattr__(self, "center", readonly(self.center, shape=(3,)))
        object.__setattr__(self, "dimensions", readonly(self.dimensions, shape=(3,)))
        object.__setattr__(self, "yaw", float(self.yaw))
        object.__setattr__(self, "object_id", int(self.object_id))
        object.__setattr__(self, "class_label", ObjectClass(self.class_label))
        if np.any(self.dimensions <= 0):
            raise DataError(
                f"Box {self.object_id} has non-positive dimensions: {self.dimensions.tolist()}"
            )

    @property
    def pose(self) -> RigidTransform:
        """Box-local frame → declared frame."""
        return RigidTransform.from_yaw(
            self.yaw, self.center, f"object/{self.object_id}", self.frame
        )

    def corners(self) -> np.ndarray:
        return self.pose.apply(UNIT_CORNERS * self.dimensions)

    def contains(self, points: Any, inflate: float = 0.0) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        local = self.pose.rotation.inv().apply(points - self.center)
        half = self.dimensions / 2 + inflate
        return np.all(np.abs(local) <= half, axis=1)

    def to_dict(self) -> dict:
        return dict(
            center=self.center.tolist(),
            dimensions=self.dimensions.tolist(),
            yaw=self.yaw,
            object_id=self.object_id,
            class_label=self.class_label.value,
            frame=self.frame,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "Box3D":
        return cls(**data)


@dataclass(frozen=True)
class Box2D:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        for name in ["min_x", "min_y", "max_x", "max_y"]:
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.max_x > self.min_x and self.max_y > self.min_y):
            raise DataError(
                f"Degenerate 2D box: ({self.min_x}, {self.min_y}, {self.max_x}, {self.max_y})"
            )

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.min_x + self.max_x) / 2, (self.min_y + self.max_y) / 2)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)

    def to_dict(self) -> list[float]:
        return list(self.as_tuple())

    @classmethod
    def from_dict(cls, data: list[float]) -> "Box2D":
        return cls(*data)
