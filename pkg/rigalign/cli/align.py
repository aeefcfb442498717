from pathlib import Path

import click

from rigalign.lib import loggers
from rigalign.lib.alignment import align_recording
from rigalign.lib.cli import CommaSeparated
from rigalign.lib.config import load_config
from rigalign.lib.storage import read_recording, write_run
from rigalign.models.alignment import Strategy


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
@click.option("--strategy", type=click.Choice([strategy.value for strategy in Strategy]))
@click.option("--vehicles", type=CommaSeparated())
@click.option("--cameras", type=CommaSeparated())
@click.option(
    "--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True
)
def main(recording_dir, config_path, strategy, vehicles, cameras, out_path):
    settings = load_config(config_path).align
    strategy = Strategy(strategy or settings.strategy)
    vehicles = vehicles or settings.vehicles
    cameras = cameras or settings.cameras

    recording = read_recording(recording_dir)
    run = align_recording(recording, strategy, vehicles, cameras)
    write_run(run, out_path)
    assignments_count = sum(len(scan.assignments) for scan in run.scans)
    logger.info(f"Saved {assignments_count} {strategy} assignments to {out_path}")
