from dataclasses import dataclass, field

from rigalign.models.alignment import Strategy
from rigalign.models.base import DataError, finite_or_none
from rigalign.models.boxes import Box2D


THRESHOLDS = (0.3, 0.5, 0.7)


@dataclass(frozen=True)
class MatchRecord:
    """A ground-truth 2D box and the projection one strategy produced for it.

    An empty projection scores IoU 0 and has no center offset.
    """

    vehicle: str
    scan_index: int
    camera_id: str
    object_id: int
    projected: Box2D | None
    ground_truth: Box2D
    iou: float
    center_offset: float | None

    def __post_init__(self):
        if not 0 <= self.iou <= 1:
            raise DataError(f"IoU must be within [0, 1], got {self.iou}")
        if self.center_offset is not None and self.center_offset < 0:
            raise DataError(f"Center offset can't be negative: {self.center_offset}")

    @property
    def key(self) -> tuple[str, int, str, int]:
        return (self.vehicle, self.scan_index, self.camera_id, self.object_id)

    def to_dict(self) -> dict:
        return dict(
            vehicle=self.vehicle,
            scan_index=self.scan_index,
            camera_id=self.camera_id,
            object_id=self.object_id,
            projected=self.projected.to_dict() if self.projected else None,
            ground_truth=self.ground_truth.to_dict(),
            iou=self.iou,
            center_offset=self.center_offset,
        )


@dataclass(frozen=True)
class MetricsRow:
    strategy: str
    average_iou: float
    recall_at: dict[float, float]
    mean_center_offset: float  # px
    count: int = 0

    def __post_init__(self):
        recalls = [self.recall_at[threshold] for threshold in sorted(self.recall_at)]
        if any(later > earlier for earlier, later in zip(recalls, recalls[1:])):
            raise DataError(
                f"Recall of {self.strategy} increases with the IoU threshold: {self.recall_at}"
            )

    @property
    def name(self) -> str:
        return self.strategy.capitalize()

    @property
    def values(self) -> list[float]:
        return [
            self.average_iou,
            *[self.recall_at[threshold] for threshold in sorted(self.recall_at)],
            self.mean_center_offset,
        ]

    def to_dict(self) -> dict:
        return dict(
            strategy=self.strategy,
            average_iou=self.average_iou,
            recall_at={f"{threshold:g}": value for threshold, value in sorted(self.recall_at.items())},
            mean_center_offset=finite_or_none(self.mean_center_offset),
            count=self.count,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsRow":
        offset = data["mean_center_offset"]
        return cls(
            strategy=data["strategy"],
            average_iou=data["average_iou"],
            recall_at={float(key): value for key, value in data["recall_at"].items()},
            mean_center_offset=float("nan") if offset is None else offset,
            count=data.get("count", 0),
        )


@dataclass(frozen=True)
class Comparison:
    """Bootstrap interval of the mean IoU difference between two strategies."""

    strategy: str
    baseline: str
    mean_difference: float
    low: float
    high: float

    @property
    def significant(self) -> bool:
        return self.low > 0 or self.high < 0

    def to_dict(self) -> dict:
        return dict(
            strategy=self.strategy,
            baseline=self.baseline,
            mean_difference=self.mean_difference,
            low=self.low,
            high=self.high,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "Comparison":
        return cls(**data)


@dataclass(frozen=True)
class MetricsTable:
    rows: list[MetricsRow]
    baseline: str = Strategy.STAMP.value
    thresholds: tuple[float, ...] = THRESHOLDS
    comparisons: list[Comparison] = field(default_factory=list)
    recording_id: str | None = None

    def row(self, strategy: str) -> MetricsRow:
        for row in self.rows:
            if row.strategy == strategy:
                return row
        raise KeyError(strategy)

    @property
    def baseline_row(self) -> MetricsRow | None:
        try:
            return self.row(self.baseline)
        except KeyError:
            return None

    def deltas(self, row: MetricsRow) -> list[float] | None:
        """Percent change of every column relative to the baseline row."""
        baseline = self.baseline_row
        if baseline is None or row.strategy == self.baseline:
            return None
        return [
            relative_delta(value, baseline_value)
            for value, baseline_value in zip(row.values, baseline.values)
        ]

    def _json_deltas(self, row: MetricsRow) -> list[float | None] | None:
        deltas = self.deltas(row)
        return None if deltas is None else [finite_or_none(delta) for delta in deltas]

    def to_dict(self) -> dict:
        return dict(
            recording_id=self.recording_id,
            baseline=self.baseline,
            thresholds=list(self.thresholds),
            rows=[{**row.to_dict(), "deltas": self._json_deltas(row)} for row in self.rows],
            comparisons=[comparison.to_dict() for comparison in self.comparisons],
        )

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsTable":
        return cls(
            rows=[MetricsRow.from_dict(row) for row in data["rows"]],
            baseline=data.get("baseline", Strategy.STAMP.value),
            thresholds=tuple(data.get("thresholds", THRESHOLDS)),
            comparisons=[Comparison.from_dict(c) for c in data.get("comparisons", [])],
            recording_id=data.get("recording_id"),
        )


def relative_delta(value: float, baseline: float) -> float:
    if baseline == 0:
        return float("nan")
    return (value - baseline) / baseline * 100
