import logging

import click

from src.commands.options import (
    actor_options, build_run, config_option, data_option, handle_errors, ledger_options, out_option, seed_option,
)
from src.services.canonical import write_dataset
from src.services.pipeline import Pipeline

logger = logging.getLogger(__name__)


@click.command('remediate')
@data_option()
@click.option('--plan', 'plan', type=click.Path(dir_okay=False), required=True, help='YAML remediation plan.')
@config_option
@ledger_options
@actor_options
@out_option
@seed_option
@handle_errors
def remediate_command(**options):
    """Apply a remediation plan and write data.updated.csv"""
    run = build_run(**options)
    pipeline = Pipeline(run)
    plan = pipeline.load_plan()
    dataset = pipeline.ingest()
    updated = pipeline.remediate(dataset, plan)
    path = write_dataset(updated, run.output('data.updated'))

    click.echo(f"plan {plan.plan_id}: {len(plan.steps)} steps, "
               f"{dataset.row_count} -> {updated.row_count} rows, "
               f"{dataset.column_count} -> {updated.column_count} columns")
    click.echo(f"digest {dataset.digest[:12]} -> {updated.digest[:12]}; data written to {path}")
