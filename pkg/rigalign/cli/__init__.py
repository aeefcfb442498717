import sys

import click

from rigalign.cli import align, evaluate, register, report, simulate
from rigalign.lib import loggers
from rigalign.lib.cli import load_command
from rigalign.models.base import DataError


EXIT_USAGE = 1

EXIT_DATA = 2


logger = loggers.from_path(__file__)


class Group(click.Group):
    """Exits with 1 on usage errors and 2 on data errors."""

    def main(self, args=None, prog_name=None, standalone_mode=True, **kwargs):
        try:
            exit_code = super().main(
                args, prog_name, standalone_mode=False, **kwargs
            )
        except click.Abort:
            click.echo("Aborted!", err=True)
            exit_code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            exit_code = EXIT_USAGE
        except (DataError, OSError) as e:
            logger.error(f"{e.__class__.__name__}: {e}")
            exit_code = EXIT_DATA
        if standalone_mode:
            sys.exit(exit_code or 0)
        return exit_code


@click.group(
    cls=Group,
    commands=dict(map(load_command, [simulate, align, register, evaluate, report])),
)
@click.option("--debug/--no-debug", default=False, help="Log debug messages.")
def main(debug):
    if debug:
        loggers.reconfigure_level("DEBUG")
