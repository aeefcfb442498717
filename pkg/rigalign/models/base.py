import json
from collections.abc import Set
from enum import Enum
from typing import Any

import numpy as np


class DataError(ValueError):
    pass


class FrameMismatchError(DataError):
    def __init__(self, expected: str, actual: str, context: str = "compose"):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Frames don't chain in {context}: expected {expected!r}, got {actual!r}"
        )


class TrajectoryCoverageError(DataError):
    pass


class ConfigError(DataError):
    pass


def json_dumps(value: Any, indent: int | None = 2) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, Enum):
            return o.value
        if isinstance(o, Set):
            return sorted(o)
        try:
            return o.to_dict()
        except AttributeError:
            raise TypeError(
                f"Object of type {o.__class__.__name__} is not JSON serializable"
            )

    return json.dumps(value, ensure_ascii=False, default=default, indent=indent)


def finite_or_none(value: float) -> float | None:
    return float(value) if np.isfinite(value) else None


def readonly(array: Any, dtype=np.float64, shape: tuple | None = None) -> np.ndarray:
    array = np.array(array, dtype=dtype)
    if shape is not None:
        array = array.reshape(shape)
    array.flags.writeable = False
    return array
