from dataclasses import replace
from pathlib import Path

import click

from rigalign.lib import loggers
from rigalign.lib.config import load_config
from rigalign.lib.formats import SCAN_FORMATS
from rigalign.lib.storage import write_recording
from rigalign.sim import WORKERS, simulate_scene


logger = loggers.from_path(__file__)


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--seed", type=int)
@click.option("--jitter-ms", type=click.FloatRange(min=0))
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, writable=True, path_type=Path),
    required=True,
)
@click.option("--scan-format", type=click.Choice(SCAN_FORMATS), default=SCAN_FORMATS[0])
@click.option("--workers", type=click.IntRange(min=1), default=WORKERS)
def main(config_path, seed, jitter_ms, out_dir, scan_format, workers):
    config = load_config(config_path).simulate
    if seed is not None:
        config = replace(config, seed=seed)
    if jitter_ms is not None:
        config = replace(config, noise=replace(config.noise, timestamp_jitter=jitter_ms / 1000))
    recording = simulate_scene(config, workers=workers)
    write_recording(recording, out_dir, scan_format)
    scans_count = sum(len(vehicle.scans) for vehicle in recording.vehicles)
    click.echo(f"{out_dir}: {scans_count} scans, recording {recording.recording_id}")
