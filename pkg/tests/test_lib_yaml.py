import math

import pytest
from strictyaml import Map, YAMLValidationError, load

from rigalign.lib.yaml import (
    CameraList,
    Degrees,
    Milliseconds,
    NonNegativeFloat,
    PositiveFloat,
    UnitFloat,
)


@pytest.mark.parametrize(
    "validator, text, expected",
    [
        (PositiveFloat(), "1.5", 1.5),
        (NonNegativeFloat(), "0", 0.0),
        (Degrees(), "90", math.pi / 2),
        (Degrees(), "-45", -math.pi / 4),
        (Milliseconds(), "20", 0.02),
        (UnitFloat(), "0", 0.0),
        (UnitFloat(), "1", 1.0),
    ],
)
def test_numbers(validator, text, expected):
    assert load(f"value: {text}", Map({"value": validator})).data == {
        "value": pytest.approx(expected)
    }


@pytest.mark.parametrize(
    "validator, text",
    [
        (PositiveFloat(), "0"),
        (PositiveFloat(), "-1.5"),
        (NonNegativeFloat(), "-0.1"),
        (Milliseconds(), "-5"),
        (Degrees(), "ninety"),
        (Degrees(), "inf"),
        (UnitFloat(), "1.5"),
        (UnitFloat(), "-0.1"),
    ],
)
def test_numbers_raise(validator, text):
    with pytest.raises(YAMLValidationError):
        load(f"value: {text}", Map({"value": validator}))


def test_camera_list():
    assert load("cameras: front_wide, rear", Map({"cameras": CameraList()})).data == {
        "cameras": ["front_wide", "rear"]
    }
