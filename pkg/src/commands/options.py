"""Options and error handling shared by every command."""

import functools
import logging
from typing import Optional

import click

from src.errors import GateFailedError, ReadinessError
from src.models.remediation import Actor, Persona
from src.models.run_config import DEFAULT_OUT, RunConfig

logger = logging.getLogger(__name__)

FORMAT_CHOICES = ('json', 'markdown', 'html')
PERSONA_CHOICES = [persona.value for persona in Persona]

# existence is checked by ingest so a missing file reports FileNotFound with exit status 1
file_path = click.Path(dir_okay=False)


def data_option(required: bool = True):
    return click.option('--data', 'data', type=file_path, required=required,
                        help='Delimited text dataset (CSV).')


def config_option(func):
    return click.option('--config', 'config', type=file_path, default=None,
                        help='YAML settings with ingest, assess and profile blocks.')(func)


def ledger_options(func):
    func = click.option('--no-ledger', 'no_ledger', is_flag=True, default=False,
                        help='Do not record lineage entries.')(func)
    func = click.option('--ledger', 'ledger', type=file_path, default=None,
                        help='Lineage ledger (default: OUT/lineage.jsonl).')(func)
    return func


def actor_options(func):
    func = click.option('--persona', 'persona', type=click.Choice(PERSONA_CHOICES), envvar='READINESS_PERSONA',
                        default=Persona.OTHER.value, show_default=True,
                        help='Persona of the acting user.')(func)
    func = click.option('--actor', 'actor', envvar='READINESS_ACTOR', default=None,
                        help='Name recorded in the lineage ledger.')(func)
    return func


def out_option(func):
    return click.option('--out', 'out', type=click.Path(file_okay=False), default=str(DEFAULT_OUT),
                        show_default=True, help='Output directory.')(func)


def seed_option(func):
    return click.option('--seed', 'seed', type=click.IntRange(min=0), default=None,
                        help='Override the seed of sampling recommendations and plan steps.')(func)


def fail_below_option(func):
    return click.option('--fail-below', 'fail_below', type=click.FloatRange(0.0, 1.0), default=None,
                        help='Exit with status 2 when the overall score is below this threshold.')(func)


def format_option(func):
    return click.option('--format', 'formats', type=click.Choice(FORMAT_CHOICES), multiple=True,
                        default=FORMAT_CHOICES, show_default=True,
                        help='Report format; repeat for several.')(func)


def resolve_actor(name: Optional[str], persona: Optional[str]) -> Optional[Actor]:
    if name is None or not name.strip():
        return None
    return Actor(name=name.strip(), persona=Persona(persona or Persona.OTHER.value))


def build_run(**options) -> RunConfig:
    """RunConfig from parsed command options"""
    return RunConfig(
        data=options.get('data'),
        sidecar=options.get('sidecar'),
        config=options.get('config'),
        plan=options.get('plan'),
        ledger=options.get('ledger'),
        out=options.get('out') or DEFAULT_OUT,
        actor=resolve_actor(options.get('actor'), options.get('persona')),
        formats=tuple(dict.fromkeys(options.get('formats') or ('json',))),
        seed=options.get('seed'),
        fail_below=options.get('fail_below'),
        use_ledger=not options.get('no_ledger', False),
        record_render=options.get('record_render', False),
    )


def check_gate(score: Optional[float], threshold: Optional[float]):
    """Raise GateFailed when a threshold is set and the score misses it"""
    if threshold is None:
        return
    if score is None or score < threshold:
        shown = 'n/a' if score is None else f"{score:.4f}"
        raise GateFailedError(f"overall score {shown} is below {threshold}")


def handle_errors(func):
    """Print expected failures as '<code>: <message>' and exit with their status"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ReadinessError as e:
            if e.exit_status == 2:
                logger.warning(f"{func.__name__}: {e}")
            else:
                logger.error(f"{func.__name__} failed: {e.code}: {e}")
            click.echo(f"{e.code}: {e}", err=True)
            click.get_current_context().exit(e.exit_status)

    return wrapper
