import logging

import click

from src.commands.options import (
    actor_options, build_run, config_option, data_option, handle_errors, ledger_options, out_option,
)
from src.services.canonical import write_json
from src.services.pipeline import Pipeline

logger = logging.getLogger(__name__)


@click.command('profile')
@data_option()
@config_option
@ledger_options
@actor_options
@out_option
@handle_errors
def profile_command(**options):
    """Profile a dataset and write profile.baseline.json"""
    run = build_run(**options)
    pipeline = Pipeline(run)
    dataset = pipeline.ingest()
    profile = pipeline.profile(dataset)
    path = write_json(run.output('profile.baseline'), profile.to_dict())

    click.echo(f"{profile.row_count} rows x {profile.column_count} columns, "
               f"{profile.missing_cells} missing cells, digest {profile.dataset_digest[:12]}")
    click.echo(f"profile written to {path}")
