from pathlib import Path

import click

from rigalign.lib import loggers
from rigalign.lib.cli import CommaSeparated
from rigalign.lib.config import load_config
from rigalign.lib.metrics import evaluate_alignment
from rigalign.lib.report import render
from rigalign.lib.storage import read_recording, read_run, write_metrics, write_text


logger = loggers.from_path(__file__)


@click.command()
@click.argument(
    "recording_dir", type=click.Path(exists=True, file_okay=False, path_type=Path)
)
@click.argument(
    "run_paths",
    nargs=-1,
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--cameras", type=CommaSeparated())
@click.option("--seed", type=int, help="Seed of the bootstrap resampling.")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for metrics.json and metrics.txt.",
)
def main(recording_dir, run_paths, config_path, cameras, seed, out_dir):
    settings = load_config(config_path).evaluate
    recording = read_recording(recording_dir)
    runs = [read_run(path) for path in run_paths]
    table = evaluate_alignment(
        recording,
        runs,
        camera_ids=cameras or settings.cameras,
        thresholds=settings.thresholds,
        seed=settings.seed if seed is None else seed,
    )
    text = render(table, "text")
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metrics(table, out_dir / "metrics.json")
        write_text(out_dir / "metrics.txt", text)
        logger.info(f"Saved metrics to {out_dir}")
    click.echo(text, nl=False)
