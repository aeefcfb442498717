from pathlib import Path

import click

from rigalign.lib import loggers
from rigalign.lib.config import load_config
from rigalign.lib.report import FORMATS, render
from rigalign.lib.storage import read_metrics, write_text


logger = loggers.from_path(__file__)


@click.command()
@click.argument(
    "metrics_path", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--format", "format_", type=click.Choice(FORMATS))
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path))
def main(metrics_path, config_path, format_, out_path):
    format_ = format_ or load_config(config_path).report.format
    output = render(read_metrics(metrics_path), format_)
    if out_path:
        write_text(out_path, output)
        logger.info(f"Saved {format_} report to {out_path}")
    else:
        click.echo(output, nl=False)
