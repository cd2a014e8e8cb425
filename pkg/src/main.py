import logging
import os
import sys

# Allow running as a script from a checkout
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import click

from src import TOOL_NAME, __version__
from src.commands.assess import assess_command
from src.commands.diff import diff_command
from src.commands.lineage import lineage_group
from src.commands.profile import profile_command
from src.commands.remediate import remediate_command
from src.commands.report import report_command

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(verbose: bool = False):
    """Log to standard error; standard output carries command results"""
    level = 'DEBUG' if verbose else os.environ.get('READINESS_LOG_LEVEL', 'INFO').upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, stream=sys.stderr,
                        force=True)


@click.group(name=TOOL_NAME)
@click.version_option(__version__, prog_name=TOOL_NAME)
@click.option('--verbose', '-v', is_flag=True, default=False, help='Debug logging.')
def cli(verbose):
    """Build Data Readiness Reports: profile, assess, remediate and document a tabular dataset."""
    configure_logging(verbose)


# Register commands
cli.add_command(profile_command)
cli.add_command(assess_command)
cli.add_command(remediate_command)
cli.add_command(report_command)
cli.add_command(lineage_group)
cli.add_command(diff_command)


if __name__ == '__main__':
    cli()
