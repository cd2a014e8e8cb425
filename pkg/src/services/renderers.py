"""Render readiness reports as JSON (source of truth), Markdown or self-contained HTML."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined, select_autoescape

from src.errors import InvalidParameterValueError
from src.models.lineage import LineageEntry, Operation
from src.models.remediation import Persona
from src.models.report import SECTION_TITLES, ReadinessReport

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / 'templates'

FORMATS = ('json', 'markdown', 'html')
FILENAMES = {'json': 'report.json', 'markdown': 'report.md', 'html': 'report.html'}
TEMPLATES = {'markdown': 'report.md', 'html': 'report.html'}

PLACEHOLDER_NONE = 'none declared'
PLACEHOLDER_NOT_PERFORMED = 'not performed'


def format_score(value: Optional[float]) -> str:
    return 'n/a' if value is None else f"{value:.4f}"


def format_delta(value: Optional[float]) -> str:
    return 'n/a' if value is None else f"{value:+.4f}"


def format_percent(value: Optional[float]) -> str:
    return 'n/a' if value is None else f"{100 * value:.2f}%"


def format_number(value) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, float):
        return f"{value:.4g}" if abs(value) < 1e-3 or abs(value) >= 1e6 else f"{value:.4f}".rstrip('0').rstrip('.')
    return str(value)


def markdown_cell(value) -> str:
    """Table-safe Markdown text: pipes escaped, line breaks flattened"""
    return str(value).replace('\\', '\\\\').replace('|', '\\|').replace('\r', ' ').replace('\n', ' ')


def or_none(values) -> str:
    if not values:
        return PLACEHOLDER_NONE
    if isinstance(values, (list, tuple)):
        return ', '.join(str(v) for v in values)
    return str(values)


def _environment() -> Environment:
    environment = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        autoescape=select_autoescape(['html']),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    environment.filters.update({
        'score': format_score,
        'delta': format_delta,
        'percent': format_percent,
        'number': format_number,
        'md': markdown_cell,
        'or_none': or_none,
        'tojson_compact': lambda value: json.dumps(value, sort_keys=True, ensure_ascii=False),
    })
    environment.globals.update({
        'SECTION_TITLES': dict(SECTION_TITLES),
        'NOT_PERFORMED': PLACEHOLDER_NOT_PERFORMED,
        'NONE_DECLARED': PLACEHOLDER_NONE,
    })
    return environment


def _compact(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(', ', ': '))


def _lineage_row(entry: LineageEntry) -> Dict[str, Any]:
    detail = entry.detail or {}
    row = {
        'entry_id': entry.entry_id,
        'timestamp': entry.timestamp,
        'actor': str(entry.actor),
        'operation': entry.operation.value,
        'method': entry.operation.value,
        'results': '',
        'explanation': '',
        'recommendations': '',
        'sme': '',
        'changes': 'none',
    }
    if entry.is_mutating:
        step, change = detail.get('step', {}), detail.get('change', {})
        row['method'] = f"{step.get('kind')} {_compact(step.get('params', {}))}"
        row['results'] = (f"rows {change.get('rows_before')} -> {change.get('rows_after')}, "
                          f"columns {change.get('columns_before')} -> {change.get('columns_after')}, "
                          f"cells modified {change.get('cells_modified')}")
        row['explanation'] = step.get('rationale') or ''
        prefix = 'SME input: ' if entry.actor.persona == Persona.SUBJECT_MATTER_EXPERT else ''
        row['sme'] = f"{prefix}{step.get('kind')} applied (plan {detail.get('plan_id', '')}, step {change.get('step_index')})"
        row['changes'] = ('digest unchanged' if entry.input_digest == entry.output_digest
                          else f"{entry.input_digest[:12]} -> {entry.output_digest[:12]}")
    elif entry.operation == Operation.ASSESS:
        row['method'] = f"assess {_compact(detail.get('config', {}))}"
        scores = detail.get('scores', {})
        row['results'] = f"overall {format_score(detail.get('overall_score'))}; " + ', '.join(
            f"{name} {format_score(value)}" for name, value in scores.items())
        row['explanation'] = f"flagged: {or_none(detail.get('flagged', []))}"
        row['recommendations'] = or_none(detail.get('recommendations', []))
    elif entry.operation == Operation.REPORT_RENDER:
        row['method'] = f"render {or_none(detail.get('formats', []))}"
        row['results'] = ', '.join(f"{name} {digest[:12]}" for name, digest in sorted(detail.get('outputs', {}).items()))
    else:
        row['method'] = f"{entry.operation.value} {_compact(detail.get('config', {}))}"
        row['results'] = f"{detail.get('rows')} rows, {detail.get('columns')} columns"
        if detail.get('warnings'):
            row['explanation'] = '; '.join(detail['warnings'])
    return row


def lineage_rows(entries: List[LineageEntry]) -> List[Dict[str, Any]]:
    """One display row per ledger entry, covering each lineage bullet of the template"""
    return [_lineage_row(entry) for entry in entries]


def _context(report: ReadinessReport) -> Dict[str, Any]:
    summary = report.summary
    overall_delta = None
    if report.has_updates and summary.updated_overall is not None and summary.baseline_overall is not None:
        overall_delta = summary.updated_overall - summary.baseline_overall
    return {
        'report': report,
        'summary': summary,
        'metadata': report.basic_metadata,
        'governance': report.governance,
        'updated_bars': {bar.name: bar for bar in summary.updated_bars},
        'overall_delta': overall_delta,
        'lineage': lineage_rows(report.lineage),
    }


def render_json(report: ReadinessReport) -> bytes:
    """Pretty, key-sorted JSON of the report"""
    return (json.dumps(report.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + '\n').encode('utf-8')


def render(report: ReadinessReport, fmt: str) -> bytes:
    """Render the report in one of FORMATS as UTF-8 bytes"""
    if fmt not in FORMATS:
        raise InvalidParameterValueError(f"unknown format '{fmt}'; expected one of {list(FORMATS)}")
    if fmt == 'json':
        return render_json(report)
    template = _environment().get_template(TEMPLATES[fmt])
    text = template.render(**_context(report))
    logger.debug(f"Rendered {fmt} report ({len(text)} characters)")
    return text.encode('utf-8')
