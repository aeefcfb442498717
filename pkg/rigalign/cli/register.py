import math
from dataclasses import replace
from pathlib import Path

import click

from rigalign.lib import loggers
from rigalign.lib.config import load_config
from rigalign.lib.registration import register_recording
from rigalign.lib.storage import read_recording, write_json


logger = loggers.from_path(__file__)


@click.command()
@click.argument(
    "recording_dir", type=click.Path(exists=True, file_okay=False, path_type=Path)
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--scan-index", type=click.IntRange(min=0))
@click.option("--source", help="Vehicle whose scan gets registered.")
@click.option("--target", help="Vehicle whose LiDAR frame is the target.")
@click.option("--voxel-size", type=click.FloatRange(min=0, min_open=True))
@click.option("--max-correspondence-distance", type=click.FloatRange(min=0, min_open=True))
@click.option("--max-iterations", type=click.IntRange(min=1))
@click.option("--translation-noise", type=click.FloatRange(min=0), help="Meters.")
@click.option("--rotation-noise", type=click.FloatRange(min=0), help="Degrees.")
@click.option("--seed", type=int)
@click.option(
    "--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True
)
def main(
    recording_dir,
    config_path,
    scan_index,
    source,
    target,
    voxel_size,
    max_correspondence_distance,
    max_iterations,
    translation_noise,
    rotation_noise,
    seed,
    out_path,
):
    settings = load_config(config_path).register
    params_overrides = dict(
        voxel_size=voxel_size,
        max_correspondence_distance=max_correspondence_distance,
        max_iterations=max_iterations,
    )
    params = replace(
        settings.params,
        **{key: value for key, value in params_overrides.items() if value is not None},
    )

    recording = read_recording(recording_dir)
    run = register_recording(
        recording,
        scan_index=settings.scan_index if scan_index is None else scan_index,
        source=source or settings.source,
        target=target or settings.target,
        params=params,
        translation_noise=(
            settings.translation_noise if translation_noise is None else translation_noise
        ),
        rotation_noise=(
            settings.rotation_noise if rotation_noise is None else math.radians(rotation_noise)
        ),
        seed=settings.seed if seed is None else seed,
    )
    write_json(out_path, run.to_dict())

    result = run.result
    if not result.converged:
        logger.warning(
            f"Registration of {run.source} to {run.target} didn't converge "
            f"in {result.iterations} iterations"
        )
    error = run.errors(result.transform)
    click.echo(
        f"{run.source} → {run.target}: residual {result.initial_residual:.4f} m → "
        f"{result.final_residual:.4f} m, error {error['translation']:.4f} m / "
        f"{error['rotation_deg']:.4f}°"
    )
