"""Run configuration: a YAML file with one optional section per command.

Built-in defaults are overridden by the file, the file by command-line flags.
Angles are written in degrees, the clock jitter in milliseconds.
"""

from dataclasses import dataclass, field
from pathlib import Path

from strictyaml import Enum, Float, Int, Map, Optional, Seq, Str, YAMLError, load

from rigalign.lib import loggers
from rigalign.lib.yaml import (
    CameraList,
    Degrees,
    Milliseconds,
    NonNegativeFloat,
    PositiveFloat,
    UnitFloat,
)
from rigalign.models.alignment import Strategy
from rigalign.models.base import ConfigError
from rigalign.models.evaluation import THRESHOLDS
from rigalign.models.motion import Motion
from rigalign.models.registration import RegistrationParams
from rigalign.models.scene import (
    CameraSpec,
    LidarConfig,
    NoiseConfig,
    ObjectsConfig,
    SceneConfig,
    VehicleConfig,
)


REPORT_FORMATS = ["text", "markdown", "json"]


logger = loggers.from_path(__file__)


CAMERA_SCHEMA = Map(
    {
        "id": Str(),
        "yaw": Degrees(),
        "fov": Degrees(),
        Optional("width"): Int(),
        Optional("height"): Int(),
    }
)

VEHICLE_SCHEMA = Map(
    {
        "name": Str(),
        Optional("x", default=0.0): Float(),
        Optional("y", default=0.0): Float(),
        Optional("z", default=0.5): Float(),
        Optional("yaw", default=0.0): Degrees(),
        Optional("speed", default=0.0): Float(),
        Optional("yaw_rate", default=0.0): Degrees(),
        Optional("lidar_yaw"): Degrees(),
        Optional("cameras"): Seq(CAMERA_SCHEMA),
    }
)

SIMULATE_SCHEMA = Map(
    {
        Optional("seed"): Int(),
        Optional("duration"): PositiveFloat(),
        Optional("lidar_rate"): PositiveFloat(),
        Optional("camera_rate"): PositiveFloat(),
        Optional("ins_rate"): PositiveFloat(),
        Optional("buildings"): Int(),
        Optional("jitter_ms"): Milliseconds(),
        Optional("range_sigma"): NonNegativeFloat(),
        Optional("objects"): Map(
            {
                Optional("count"): Int(),
                Optional("min_speed"): NonNegativeFloat(),
                Optional("max_speed"): NonNegativeFloat(),
                Optional("min_distance"): NonNegativeFloat(),
                Optional("max_distance"): NonNegativeFloat(),
            }
        ),
        Optional("lidar"): Map(
            {
                Optional("rings"): Int(),
                Optional("min_elevation"): Degrees(),
                Optional("max_elevation"): Degrees(),
                Optional("azimuth_resolution"): Degrees(),
                Optional("max_range"): PositiveFloat(),
            }
        ),
        Optional("vehicles"): Seq(VEHICLE_SCHEMA),
    }
)

ALIGN_SCHEMA = Map(
    {
        Optional("strategy"): Enum([strategy.value for strategy in Strategy]),
        Optional("vehicles"): CameraList(),
        Optional("cameras"): CameraList(),
    }
)

REGISTER_SCHEMA = Map(
    {
        Optional("source"): Str(),
        Optional("target"): Str(),
        Optional("scan_index"): Int(),
        Optional("voxel_size"): PositiveFloat(),
        Optional("max_correspondence_distance"): PositiveFloat(),
        Optional("max_iterations"): Int(),
        Optional("translation_epsilon"): PositiveFloat(),
        Optional("rotation_epsilon"): Degrees(),
        Optional("neighbor_count_for_covariance"): Int(),
        Optional("translation_noise"): NonNegativeFloat(),
        Optional("rotation_noise"): Degrees(),
        Optional("seed"): Int(),
    }
)

EVALUATE_SCHEMA = Map(
    {
        Optional("cameras"): CameraList(),
        Optional("thresholds"): Seq(UnitFloat()),
        Optional("seed"): Int(),
    }
)

REPORT_SCHEMA = Map({Optional("format"): Enum(REPORT_FORMATS)})

SCHEMA = Map(
    {
        Optional("simulate"): SIMULATE_SCHEMA,
        Optional("align"): ALIGN_SCHEMA,
        Optional("register"): REGISTER_SCHEMA,
        Optional("evaluate"): EVALUATE_SCHEMA,
        Optional("report"): REPORT_SCHEMA,
    }
)


@dataclass(frozen=True)
class AlignSettings:
    strategy: Strategy = Strategy.TARGET
    vehicles: tuple[str, ...] | None = None
    cameras: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RegisterSettings:
    source: str | None = None  # second vehicle of the recording
    target: str | None = None  # first vehicle of the recording
    scan_index: int = 0
    params: RegistrationParams = field(default_factory=RegistrationParams)
    translation_noise: float = 0.0  # m, per chain term
    rotation_noise: float = 0.0  # rad, per chain term
    seed: int = 0


@dataclass(frozen=True)
class EvaluateSettings:
    cameras: tuple[str, ...] | None = None
    thresholds: tuple[float, ...] = THRESHOLDS
    seed: int = 0


@dataclass(frozen=True)
class ReportSettings:
    format: str = "text"


@dataclass(frozen=True)
class RunConfig:
    simulate: SceneConfig = field(default_factory=SceneConfig)
    align: AlignSettings = field(default_factory=AlignSettings)
    register: RegisterSettings = field(default_factory=RegisterSettings)
    evaluate: EvaluateSettings = field(default_factory=EvaluateSettings)
    report: ReportSettings = field(default_factory=ReportSettings)


def load_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    logger.info(f"Reading configuration from {path}")
    return parse_config(Path(path).read_text())


def parse_config(text: str) -> RunConfig:
    if not text.strip():
        return RunConfig()
    try:
        data = load(text, SCHEMA).data
    except YAMLError as e:
        raise ConfigError(f"Invalid configuration:\n{e}") from e
    return RunConfig(
        simulate=scene_config(data.get("simulate", {})),
        align=align_settings(data.get("align", {})),
        register=register_settings(data.get("register", {})),
        evaluate=evaluate_settings(data.get("evaluate", {})),
        report=ReportSettings(**data.get("report", {})),
    )


def scene_config(data: dict) -> SceneConfig:
    data = dict(data)
    kwargs = {
        key: data.pop(key)
        for key in ["seed", "duration", "lidar_rate", "camera_rate", "ins_rate", "buildings"]
        if key in data
    }
    noise = {}
    if "jitter_ms" in data:
        noise["timestamp_jitter"] = data.pop("jitter_ms")
    if "range_sigma" in data:
        noise["range_sigma"] = data.pop("range_sigma")
    kwargs["noise"] = NoiseConfig(**noise)
    kwargs["objects"] = objects_config(data.pop("objects", {}))
    kwargs["lidar"] = LidarConfig(**data.pop("lidar", {}))
    if "vehicles" in data:
        kwargs["vehicles"] = tuple(vehicle_config(v) for v in data.pop("vehicles"))
    return SceneConfig(**kwargs)


def objects_config(data: dict) -> ObjectsConfig:
    defaults = ObjectsConfig()
    return ObjectsConfig(
        count=data.get("count", defaults.count),
        speed_range=(
            data.get("min_speed", defaults.speed_range[0]),
            data.get("max_speed", defaults.speed_range[1]),
        ),
        distance_range=(
            data.get("min_distance", defaults.distance_range[0]),
            data.get("max_distance", defaults.distance_range[1]),
        ),
    )


def vehicle_config(data: dict) -> VehicleConfig:
    kwargs = dict(
        name=data["name"],
        motion=Motion(
            x=data["x"],
            y=data["y"],
            z=data["z"],
            yaw=data["yaw"],
            speed=data["speed"],
            yaw_rate=data["yaw_rate"],
        ),
    )
    if "lidar_yaw" in data:
        kwargs["lidar_yaw"] = data["lidar_yaw"]
    if "cameras" in data:
        kwargs["cameras"] = tuple(
            CameraSpec(
                camera_id=camera["id"],
                yaw=camera["yaw"],
                horizontal_fov=camera["fov"],
                **{key: camera[key] for key in ["width", "height"] if key in camera},
            )
            for camera in data["cameras"]
        )
    return VehicleConfig(**kwargs)


def align_settings(data: dict) -> AlignSettings:
    return AlignSettings(
        strategy=Strategy(data.get("strategy", AlignSettings.strategy)),
        vehicles=tuple(data["vehicles"]) if "vehicles" in data else None,
        cameras=tuple(data["cameras"]) if "cameras" in data else None,
    )


def register_settings(data: dict) -> RegisterSettings:
    data = dict(data)
    params = {
        key: data.pop(key)
        for key in RegistrationParams().to_dict()
        if key in data
    }
    return RegisterSettings(params=RegistrationParams(**params), **data)


def evaluate_settings(data: dict) -> EvaluateSettings:
    return EvaluateSettings(
        cameras=tuple(data["cameras"]) if "cameras" in data else None,
        thresholds=tuple(data.get("thresholds", THRESHOLDS)),
        seed=data.get("seed", 0),
    )
