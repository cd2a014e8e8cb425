import logging

import click

from src.commands.options import build_run, handle_errors, out_option
from src.services.canonical import pretty_json, write_json
from src.services.renderers import format_delta
from src.services.report_builder import diff_reports, load_report

logger = logging.getLogger(__name__)


@click.command('diff')
@click.argument('report_a', type=click.Path(dir_okay=False))
@click.argument('report_b', type=click.Path(dir_okay=False))
@click.option('--json', 'as_json', is_flag=True, default=False, help='Print the diff as JSON.')
@out_option
@handle_errors
def diff_command(report_a, report_b, as_json, out):
    """Compare two report.json files (deltas are B minus A) and write report.diff.json"""
    diff = diff_reports(load_report(report_a), load_report(report_b))
    path = write_json(build_run(out=out).output('report.diff'), diff.to_dict())
    logger.info(f"Wrote diff of {report_a} and {report_b} to {path}")
    if as_json:
        click.echo(pretty_json(diff.to_dict()).decode('utf-8'), nl=False)
        return
    for name, delta in diff.score_deltas.items():
        click.echo(f"{name:<18} {format_delta(delta)}")
    click.echo(f"{'overall':<18} {format_delta(diff.overall_delta)}")
    for name in diff.only_in_a:
        click.echo(f"{name:<18} only in A")
    for name in diff.only_in_b:
        click.echo(f"{name:<18} only in B")
    click.echo(f"rows {diff.row_delta:+d}, columns {diff.column_delta:+d}, "
               f"missing cells {diff.missing_cells_delta:+d}")
    click.echo(f"lineage entries only in A: {len(diff.lineage_only_in_a)}, "
               f"only in B: {len(diff.lineage_only_in_b)}")
