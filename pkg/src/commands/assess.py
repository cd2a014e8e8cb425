import logging

import click

from src.commands.options import (
    actor_options, build_run, check_gate, config_option, data_option, fail_below_option, handle_errors,
    ledger_options, out_option, seed_option,
)
from src.services.canonical import write_json
from src.services.pipeline import Pipeline
from src.services.renderers import format_score

logger = logging.getLogger(__name__)


@click.command('assess')
@data_option()
@config_option
@ledger_options
@actor_options
@out_option
@seed_option
@fail_below_option
@handle_errors
def assess_command(**options):
    """Assess quality dimensions and write assessment.baseline.json"""
    run = build_run(**options)
    pipeline = Pipeline(run)
    dataset = pipeline.ingest()
    profile = pipeline.profile(dataset)
    assessment = pipeline.assess(dataset, profile)
    write_json(run.output('profile.baseline'), profile.to_dict())
    path = write_json(run.output('assessment.baseline'), assessment.to_dict())

    for finding in assessment.findings:
        marker = ' *' if finding.flagged else ''
        click.echo(f"{finding.dimension.value:<18} {format_score(finding.score)}{marker}")
    click.echo(f"{'overall':<18} {format_score(assessment.overall_score)}")
    click.echo(f"assessment written to {path}")
    check_gate(assessment.overall_score, run.fail_below)
