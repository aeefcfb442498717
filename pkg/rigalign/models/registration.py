import math
from dataclasses import dataclass, field, fields

from rigalign.models.base import ConfigError, finite_or_none
from rigalign.models.transform import RigidTransform, distance


@dataclass(frozen=True)
class RegistrationParams:
    voxel_size: float = 0.5  # m
    max_correspondence_distance: float = 1.0  # m
    max_iterations: int = 50
    translation_epsilon: float = 1e-4  # m
    rotation_epsilon: float = 1e-4  # rad
    neighbor_count_for_covariance: int = 20

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ConfigError(f"Registration parameter {f.name} must be positive, got {value}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.neighbor_count_for_covariance < 3:
            raise ConfigError(
                "neighbor_count_for_covariance must be at least 3, "
                f"got {self.neighbor_count_for_covariance}"
            )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "RegistrationParams":
        return cls(**data)


@dataclass(frozen=True)
class RegistrationResult:
    transform: RigidTransform
    converged: bool
    iterations: int
    final_residual: float  # m
    initial_residual: float = math.inf  # m
    residual_history: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.final_residual < 0:
            raise ValueError(f"Residual can't be negative: {self.final_residual}")

    def to_dict(self) -> dict:
        return dict(
            transform=self.transform.to_dict(),
            converged=self.converged,
            iterations=self.iterations,
            final_residual=finite_or_none(self.final_residual),
            initial_residual=finite_or_none(self.initial_residual),
            residual_history=[finite_or_none(value) for value in self.residual_history],
        )


@dataclass(frozen=True)
class RegistrationRun:
    """Registration of one vehicle's scan into another vehicle's LiDAR frame."""

    recording_id: str
    source: str
    target: str
    scan_index: int
    reference_time: float  # s, both scans deskewed to it
    initial: RigidTransform
    ground_truth: RigidTransform
    result: RegistrationResult

    def errors(self, transform: RigidTransform) -> dict:
        translation, rotation = distance(transform, self.ground_truth)
        return dict(translation=translation, rotation_deg=math.degrees(rotation))

    def to_dict(self) -> dict:
        return dict(
            recording_id=self.recording_id,
            source=self.source,
            target=self.target,
            scan_index=self.scan_index,
            reference_time=self.reference_time,
            initial=self.initial.to_dict(),
            ground_truth=self.ground_truth.to_dict(),
            initial_error=self.errors(self.initial),
            refined_error=self.errors(self.result.transform),
            result=self.result.to_dict(),
        )
