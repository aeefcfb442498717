from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.spatial.transform import Rotation

from rigalign.models.transform import RigidTransform


STRAIGHT_YAW_RATE = 1e-9  # rad/s


@dataclass(frozen=True)
class Motion:
    """Planar constant turn-rate and velocity motion, closed form.

    Yaw is counter-clockwise from the world +x axis, speed is along the
    heading, ``z`` stays constant.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0  # rad
    speed: float = 0.0  # m/s
    yaw_rate: float = 0.0  # rad/s

    def states_at(self, times: Any) -> tuple[np.ndarray, np.ndarray]:
        """Returns (N, 3) positions and (N,) yaws."""
        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        yaws = self.yaw + self.yaw_rate * times
        if abs(self.yaw_rate) < STRAIGHT_YAW_RATE:
            xs = self.x + self.speed * times * np.cos(self.yaw)
            ys = self.y + self.speed * times * np.sin(self.yaw)
        else:
            radius = self.speed / self.yaw_rate
            xs = self.x + radius * (np.sin(yaws) - np.sin(self.yaw))
            ys = self.y - radius * (np.cos(yaws) - np.cos(self.yaw))
        positions = np.column_stack([xs, ys, np.full(len(times), self.z)])
        return positions, yaws

    def velocities_at(self, times: Any) -> np.ndarray:
        _, yaws = self.states_at(times)
        return self.speed * np.column_stack([np.cos(yaws), np.sin(yaws), np.zeros(len(yaws))])

    def poses_at(self, times: Any) -> tuple[Rotation, np.ndarray]:
        positions, yaws = self.states_at(times)
        return Rotation.from_euler("z", yaws), positions

    def pose_at(self, t: float, source_frame: str, target_frame: str = "world") -> RigidTransform:
        positions, yaws = self.states_at(t)
        return RigidTransform.from_yaw(yaws[0], positions[0], source_frame, target_frame)

    def to_dict(self) -> dict:
        return dict(
            x=self.x,
            y=self.y,
            z=self.z,
            yaw=self.yaw,
            speed=self.speed,
            yaw_rate=self.yaw_rate,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "Motion":
        return cls(**data)
