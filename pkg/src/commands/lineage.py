import logging

import click

from src.commands.options import build_run, config_option, handle_errors, out_option
from src.errors import ChainBrokenError, DatasetFileNotFoundError
from src.models.dataset import IngestConfig
from src.models.lineage import Operation
from src.models.run_config import RunConfig
from src.services.canonical import canonical_json, write_dataset
from src.services.ingest import load_dataset
from src.services.ledger import LineageLedger
from src.services.settings import load_settings

logger = logging.getLogger(__name__)

ledger_path_option = click.option('--ledger', 'ledger', type=click.Path(dir_okay=False), default=None,
                                  help='Lineage ledger (default: OUT/lineage.jsonl).')


def _open_ledger(run: RunConfig) -> LineageLedger:
    ledger = LineageLedger(run.ledger)
    if not ledger.exists:
        raise DatasetFileNotFoundError(f"ledger not found: {run.ledger}")
    return ledger


def _describe(entry) -> str:
    detail = entry.detail
    if entry.is_mutating:
        return f"{detail['step']['kind']} {canonical_json(detail['step']['params'])}"
    if 'stage' in detail:
        return detail['stage']
    return detail.get('source', '')


def _ingest_config(ledger: LineageLedger, run: RunConfig) -> IngestConfig:
    """Ingest settings from --config, else those recorded by the first ingest entry"""
    if run.config is not None:
        return load_settings(run.config).ingest
    for entry in ledger.entries():
        if entry.operation == Operation.INGEST and isinstance(entry.detail.get('config'), dict):
            return IngestConfig.from_dict(entry.detail['config'])
    return IngestConfig()


@click.group('lineage')
def lineage_group():
    """Inspect, verify and replay the lineage ledger"""


@lineage_group.command('show')
@ledger_path_option
@out_option
@click.option('--actor', 'actor', default=None, help='Only entries recorded by this actor name.')
@click.option('--since', 'since', default=None, help='Only entries at or after this ISO-8601 UTC timestamp.')
@click.option('--json', 'as_json', is_flag=True, default=False, help='Print entries as JSON Lines.')
@handle_errors
def show_command(ledger, out, actor, since, as_json):
    """Print ledger entries in chronological order"""
    run = build_run(ledger=ledger, out=out)
    entries = _open_ledger(run).filter(actor=actor, since=since)
    for entry in entries:
        if as_json:
            click.echo(canonical_json(entry.to_dict()))
        else:
            click.echo(f"{entry.entry_id:>4}  {entry.timestamp}  {entry.actor}  {entry.operation.value:<16} "
                       f"{entry.input_digest[:12]} -> {entry.output_digest[:12]}  {_describe(entry)}")
    if not as_json:
        click.echo(f"{len(entries)} entries")


@lineage_group.command('verify')
@ledger_path_option
@out_option
@handle_errors
def verify_command(ledger, out):
    """Check the hash chain; exit 3 at the first broken entry"""
    run = build_run(ledger=ledger, out=out)
    result = _open_ledger(run).verify()
    if not result.ok:
        raise ChainBrokenError(f"ledger broken at entry {result.broken_entry_id}: {result.reason}",
                               entry_id=result.broken_entry_id)
    click.echo(f"ok ({result.entry_count} entries)")


@lineage_group.command('replay')
@click.option('--data', 'data', type=click.Path(dir_okay=False), required=True, help='Baseline dataset.')
@ledger_path_option
@config_option
@out_option
@click.option('--upto', 'upto', type=int, default=None, help='Replay entries up to this entry id.')
@handle_errors
def replay_command(data, ledger, config, out, upto):
    """Re-apply recorded remediation steps to the baseline and write data.replayed.csv"""
    run = build_run(data=data, ledger=ledger, config=config, out=out)
    ledger = _open_ledger(run)
    baseline = load_dataset(run.data, _ingest_config(ledger, run))
    replayed = ledger.replay(baseline, upto)
    path = write_dataset(replayed, run.output('data.replayed'))
    click.echo(f"replayed digest {replayed.digest} matches the ledger; data written to {path}")
