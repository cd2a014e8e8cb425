import logging
from contextlib import contextmanager
from pathlib import Path
from typing import List

import click

from src.commands.options import (
    actor_options, build_run, check_gate, config_option, data_option, fail_below_option, format_option,
    handle_errors, ledger_options, out_option, seed_option,
)
from src.errors import ReadinessError
from src.models.lineage import Operation
from src.services.canonical import sha256_hex, write_bytes, write_dataset, write_json
from src.services.pipeline import Pipeline
from src.services.renderers import FILENAMES, format_score, render
from src.services.report_builder import build_report, load_metadata

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str):
    try:
        yield
    except ReadinessError as e:
        raise e.in_stage(name)


def _remove(paths: List[Path]):
    for path in paths:
        try:
            path.unlink(missing_ok=True)
        except OSError as e:
            logger.warning(f"Could not remove partial output {path}: {e}")


@click.command('report')
@data_option()
@click.option('--sidecar', 'sidecar', type=click.Path(dir_okay=False), required=True,
              help='YAML sidecar with metadata and governance blocks.')
@click.option('--plan', 'plan', type=click.Path(dir_okay=False), default=None, help='YAML remediation plan.')
@config_option
@ledger_options
@actor_options
@out_option
@format_option
@seed_option
@fail_below_option
@click.option('--record-render', 'record_render', is_flag=True, default=False,
              help='Append a report_render entry after writing the report.')
@handle_errors
def report_command(**options):
    """Run the full pipeline and render the Data Readiness Report"""
    run = build_run(**options)
    written: List[Path] = []
    try:
        with stage('config'):
            pipeline = Pipeline(run)
        with stage('sidecar'):
            metadata, governance = load_metadata(run.sidecar)
        plan = None
        if run.plan is not None:
            with stage('plan'):
                plan = pipeline.load_plan()

        with stage('ingest'):
            dataset = pipeline.ingest()
        with stage('baseline profile'):
            baseline_profile = pipeline.profile(dataset)
            written.append(write_json(run.output('profile.baseline'), baseline_profile.to_dict()))
        with stage('baseline assessment'):
            baseline_assessment = pipeline.assess(dataset, baseline_profile)
            written.append(write_json(run.output('assessment.baseline'), baseline_assessment.to_dict()))

        final = dataset
        updated_profile = updated_assessment = None
        if plan is not None:
            with stage('remediation'):
                final = pipeline.remediate(dataset, plan)
                written.append(write_dataset(final, run.output('data.updated')))
            with stage('updated profile'):
                updated_profile = pipeline.profile(final, stage='updated', record=False)
                written.append(write_json(run.output('profile.updated'), updated_profile.to_dict()))
            with stage('updated assessment'):
                updated_assessment = pipeline.assess(final, updated_profile, stage='updated', record=False)
                written.append(write_json(run.output('assessment.updated'), updated_assessment.to_dict()))

        with stage('report'):
            report = build_report(metadata, governance, baseline_profile, baseline_assessment,
                                  updated_profile, updated_assessment, ledger=pipeline.ledger)
            outputs = {}
            for fmt in run.formats:
                payload = render(report, fmt)
                path = write_bytes(run.out / FILENAMES[fmt], payload)
                written.append(path)
                outputs[path.name] = sha256_hex(payload)
        if run.record_render and pipeline.ledger is not None:
            with stage('render record'):
                pipeline.ledger.append(pipeline.recorder, Operation.REPORT_RENDER, final.digest, final.digest,
                                       {'formats': list(run.formats), 'outputs': outputs})
    except ReadinessError:
        _remove(written)
        raise

    summary = report.summary
    click.echo(f"baseline: {summary.baseline_rows} rows x {summary.baseline_columns} columns, "
               f"overall {format_score(summary.baseline_overall)}")
    if report.has_updates:
        click.echo(f"updated:  {summary.updated_rows} rows x {summary.updated_columns} columns, "
                   f"overall {format_score(summary.updated_overall)}")
    for name in outputs:
        click.echo(f"wrote {run.out / name}")
    check_gate(report.final_assessment.overall_score, run.fail_below)
