import math

from strictyaml import CommaSeparated, Float, Str


class PositiveFloat(Float):
    def validate_scalar(self, chunk):
        value = super().validate_scalar(chunk)
        if not value > 0:
            chunk.expecting_but_found("when expecting a positive number")
        return value


class NonNegativeFloat(Float):
    def validate_scalar(self, chunk):
        value = super().validate_scalar(chunk)
        if not value >= 0:
            chunk.expecting_but_found("when expecting a non-negative number")
        return value


class UnitFloat(Float):
    def validate_scalar(self, chunk):
        value = super().validate_scalar(chunk)
        if not 0 <= value <= 1:
            chunk.expecting_but_found("when expecting a number between 0 and 1")
        return value


class Degrees(Float):
    """Angle written in degrees, loaded in radians."""

    def validate_scalar(self, chunk):
        value = super().validate_scalar(chunk)
        if not math.isfinite(value):
            chunk.expecting_but_found("when expecting a finite angle in degrees")
        return math.radians(value)


class Milliseconds(NonNegativeFloat):
    """Duration written in milliseconds, loaded in seconds."""

    def validate_scalar(self, chunk):
        return super().validate_scalar(chunk) / 1000


def CameraList() -> CommaSeparated:
    return CommaSeparated(Str())
