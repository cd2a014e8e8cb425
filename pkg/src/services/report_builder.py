"""Assemble the nine-section readiness report and compare reports."""

import json
import logging
from datetime import date, datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from src import TOOL_NAME, __version__
from src.errors import (
    ChainBrokenError,
    DatasetFileNotFoundError,
    DatasetIOError,
    DigestMismatchError,
    ParseError,
    SidecarNotFoundError,
    SidecarSyntaxError,
    UnsupportedDataTypeError,
)
from src.models.lineage import LineageEntry
from src.models.profile import DataProfile
from src.models.quality import Dimension, QualityAssessment
from src.models.remediation import StepKind
from src.models.report import (
    DATA_TYPES,
    SCHEMA_VERSION,
    BasicMetadata,
    ColumnBar,
    GovernanceInfo,
    ReadinessReport,
    RemediationReference,
    ReportDiff,
    ReportSummary,
    ScoreRow,
)
from src.services.detectors import DetectorFactory
from src.services.ledger import LineageLedger

logger = logging.getLogger(__name__)

METADATA_FIELDS = {'name', 'data_owner', 'version', 'generation_date', 'data_type', 'description', 'tags',
                   'intended_usage', 'contact_person', 'source_url', 'column_descriptions'}
REQUIRED_METADATA = ('data_owner', 'version', 'generation_date')
GOVERNANCE_FIELDS = {'data_source', 'usage_restrictions', 'policy_restrictions', 'license'}

REMEDIATION_DESCRIPTIONS = {
    StepKind.IMPUTE: 'Fill Missing cells of one column with its mean, median, mode or a constant.',
    StepKind.DROP_ROWS_MISSING: 'Remove rows with a Missing cell in the chosen columns (or any column).',
    StepKind.DROP_COLUMN: 'Remove one column.',
    StepKind.CAP_OUTLIERS: 'Winsorize cells outside the IQR fences to the nearer fence; fences come from the step input.',
    StepKind.DROP_OUTLIER_ROWS: 'Remove rows holding a cell outside the IQR fences of the chosen columns.',
    StepKind.OVERSAMPLE: 'Append seeded random copies of minority-class rows until min/max class count reaches the ratio.',
    StepKind.UNDERSAMPLE: 'Remove seeded random majority-class rows until min/max class count reaches the ratio.',
    StepKind.DEDUPE: 'Keep the first occurrence of every exact duplicate row.',
    StepKind.NORMALIZE_VALUES: 'Trim, lowercase or map tokens of one column, then re-parse them as the column type.',
    StepKind.DROP_FLAGGED_LABELS: 'Remove rows whose k-disagreeing-neighbours score exceeds the threshold.',
}


def _text(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    return str(value)


def _text_list(value: Any, name: str) -> List[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    if not isinstance(value, list):
        raise SidecarSyntaxError(f"'{name}' must be a list of strings")
    return [_text(item) for item in value]


def _text_map(value: Any, name: str) -> Dict[str, str]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise SidecarSyntaxError(f"'{name}' must be a mapping of column name to text")
    return {str(key): _text(item) for key, item in value.items()}


def parse_metadata(document: Any) -> Tuple[BasicMetadata, GovernanceInfo]:
    """Sidecar document to basic metadata and governance info"""
    if not isinstance(document, dict):
        raise SidecarSyntaxError("sidecar must be a mapping with a metadata block")
    unknown = sorted(set(document) - {'metadata', 'governance'})
    if unknown:
        raise SidecarSyntaxError(f"unknown sidecar block(s) {unknown}")
    metadata = document.get('metadata')
    if not isinstance(metadata, dict):
        raise SidecarSyntaxError("sidecar needs a 'metadata' mapping")
    unknown = sorted(set(metadata) - METADATA_FIELDS)
    if unknown:
        raise SidecarSyntaxError(f"unknown metadata field(s) {unknown}")
    for name in REQUIRED_METADATA:
        if not _text(metadata.get(name)).strip():
            raise SidecarSyntaxError(f"metadata field '{name}' is required")
    data_type = _text(metadata.get('data_type') or 'structured')
    if data_type != 'structured':
        supported = "only 'structured' is supported" if data_type in DATA_TYPES else f"expected one of {list(DATA_TYPES)}"
        raise UnsupportedDataTypeError(f"data_type '{data_type}' is not supported; {supported}")

    basic = BasicMetadata(
        name=_text(metadata.get('name')),
        data_owner=_text(metadata['data_owner']),
        version=_text(metadata['version']),
        generation_date=_text(metadata['generation_date']),
        data_type=data_type,
        description=_text(metadata.get('description')),
        tags=_text_list(metadata.get('tags'), 'tags'),
        intended_usage=_text(metadata.get('intended_usage')),
        contact_person=_text(metadata.get('contact_person')),
        source_url=_text(metadata.get('source_url')),
        column_descriptions=_text_map(metadata.get('column_descriptions'), 'column_descriptions'),
    )

    governance = document.get('governance') or {}
    if not isinstance(governance, dict):
        raise SidecarSyntaxError("'governance' must be a mapping")
    unknown = sorted(set(governance) - GOVERNANCE_FIELDS)
    if unknown:
        raise SidecarSyntaxError(f"unknown governance field(s) {unknown}")
    info = GovernanceInfo(
        data_source=_text(governance.get('data_source')),
        usage_restrictions=_text_list(governance.get('usage_restrictions'), 'usage_restrictions'),
        policy_restrictions=_text_list(governance.get('policy_restrictions'), 'policy_restrictions'),
        license=_text(governance.get('license')),
    )
    return basic, info


def load_metadata(path: Union[str, Path]) -> Tuple[BasicMetadata, GovernanceInfo]:
    """Read the sidecar metadata document"""
    path = Path(path)
    if not path.is_file():
        raise SidecarNotFoundError(f"sidecar metadata file not found: {path}")
    try:
        document = yaml.safe_load(path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ''
        raise SidecarSyntaxError(f"{path.name}{where}: {getattr(e, 'problem', None) or e}")
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetIOError(f"cannot read sidecar {path}: {e}")
    return parse_metadata(document)


def _column_bars(profile: DataProfile, assessment: QualityAssessment) -> List[ColumnBar]:
    outliers = assessment.finding(Dimension.OUTLIERS)
    per_column = outliers.details.get('columns', {}) if outliers is not None and outliers.applicable else {}
    return [ColumnBar(name=column.name, missing_fraction=column.missing_fraction,
                      outlier_fraction=per_column.get(column.name, {}).get('outlier_fraction'))
            for column in profile.column_profiles]


def _score_rows(baseline: QualityAssessment, updated: Optional[QualityAssessment]) -> List[ScoreRow]:
    base_scores = baseline.scores()
    new_scores = updated.scores() if updated is not None else {}
    ordered = [d.value for d in Dimension if d.value in base_scores or d.value in new_scores]
    return [ScoreRow(dimension=name, baseline=base_scores.get(name), updated=new_scores.get(name))
            for name in ordered]


def _check_pair(profile: DataProfile, assessment: QualityAssessment, label: str):
    if profile.dataset_digest != assessment.dataset_digest:
        raise DigestMismatchError(
            f"{label} profile ({profile.dataset_digest[:12]}) and {label} assessment "
            f"({assessment.dataset_digest[:12]}) describe different datasets")


def implementation_details() -> Dict[str, Any]:
    return {
        'tool': TOOL_NAME,
        'version': __version__,
        'schema_version': SCHEMA_VERSION,
        'score_convention': 'every dimension scores in [0, 1] with 1 = ready; the overall score is the '
                            '(weighted, default unweighted) mean of applicable dimension scores',
        'correlation_methods': 'Pearson for numeric pairs and Cramer\'s V for categorical pairs; '
                               'mixed numeric/categorical pairs are not profiled',
        'quantiles': 'type-7 linear interpolation; population standard deviation',
        'digests': 'SHA-256 over the canonical CSV serialization',
        'citations': 'per-metric citations are listed with each metric; external citation management is out of scope',
    }


def build_report(metadata: BasicMetadata, governance: GovernanceInfo, baseline_profile: DataProfile,
                 baseline_assessment: QualityAssessment, updated_profile: Optional[DataProfile] = None,
                 updated_assessment: Optional[QualityAssessment] = None,
                 ledger: Optional[LineageLedger] = None) -> ReadinessReport:
    """Assemble the report, checking that profiles, assessments and ledger describe the same data"""
    _check_pair(baseline_profile, baseline_assessment, 'baseline')
    if (updated_profile is None) != (updated_assessment is None):
        raise DigestMismatchError("updated profile and updated assessment must be given together")
    if updated_profile is not None:
        _check_pair(updated_profile, updated_assessment, 'updated')

    lineage: List[LineageEntry] = []
    if ledger is not None and ledger.exists:
        result = ledger.verify()
        if not result.ok:
            raise ChainBrokenError(f"ledger broken at entry {result.broken_entry_id}: {result.reason}",
                                   entry_id=result.broken_entry_id)
        lineage = ledger.entries()
        mutations = [entry for entry in lineage if entry.is_mutating]
        if updated_profile is not None:
            if not mutations:
                raise DigestMismatchError("updated sections given but the ledger records no remediation step")
            if mutations[-1].output_digest != updated_profile.dataset_digest:
                raise DigestMismatchError(
                    f"updated data ({updated_profile.dataset_digest[:12]}) differs from the ledger's last "
                    f"remediation output ({mutations[-1].output_digest[:12]})")

    summary = ReportSummary(
        baseline_rows=baseline_profile.row_count,
        baseline_columns=baseline_profile.column_count,
        baseline_overall=baseline_assessment.overall_score,
        scores=_score_rows(baseline_assessment, updated_assessment),
        baseline_bars=_column_bars(baseline_profile, baseline_assessment),
    )
    if updated_profile is not None:
        summary.updated_rows = updated_profile.row_count
        summary.updated_columns = updated_profile.column_count
        summary.updated_overall = updated_assessment.overall_score
        summary.updated_bars = _column_bars(updated_profile, updated_assessment)

    final = updated_assessment or baseline_assessment
    applicable = {finding.dimension for finding in baseline_assessment.applicable_findings()}
    if updated_assessment is not None:
        applicable |= {finding.dimension for finding in updated_assessment.applicable_findings()}
    references = [DetectorFactory.create(dimension).reference(final.config)
                  for dimension in Dimension if dimension in applicable]

    kinds = []
    for entry in lineage:
        if entry.is_mutating:
            kind = StepKind(entry.detail['step']['kind'])
            if kind not in kinds:
                kinds.append(kind)
    overview = [RemediationReference(kind=kind.value, description=REMEDIATION_DESCRIPTIONS[kind]) for kind in kinds]

    report = ReadinessReport(
        basic_metadata=metadata,
        summary=summary,
        baseline_profile=baseline_profile,
        baseline_assessment=baseline_assessment,
        updated_profile=updated_profile,
        updated_assessment=updated_assessment,
        lineage=lineage,
        governance=governance,
        references=references,
        remediation_overview=overview,
        implementation=implementation_details(),
    )
    logger.info(f"Built report for {metadata.name or metadata.data_owner} v{metadata.version}: "
                f"{len(lineage)} lineage entries, updates={'yes' if report.has_updates else 'no'}")
    return report


def parse_report(text: Union[str, bytes]) -> ReadinessReport:
    """ReadinessReport from report.json text"""
    try:
        document = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"report is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ParseError("report JSON must be an object")
    try:
        return ReadinessReport.from_dict(document)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"report JSON is missing or has invalid fields: {e}")


def load_report(path: Union[str, Path]) -> ReadinessReport:
    """Read and parse a rendered report.json"""
    path = Path(path)
    if not path.is_file():
        raise DatasetFileNotFoundError(f"report file not found: {path}")
    try:
        return parse_report(path.read_bytes())
    except OSError as e:
        raise DatasetIOError(f"cannot read report {path}: {e}")


def diff_reports(a: ReadinessReport, b: ReadinessReport) -> ReportDiff:
    """Differences b - a between the final assessments and profiles of two reports"""
    scores_a = {f.dimension.value: f.score for f in a.final_assessment.applicable_findings()}
    scores_b = {f.dimension.value: f.score for f in b.final_assessment.applicable_findings()}
    order = [d.value for d in Dimension]
    shared = [name for name in order if name in scores_a and name in scores_b]
    overall_a, overall_b = a.final_assessment.overall_score, b.final_assessment.overall_score
    hashes_a = {entry.entry_hash for entry in a.lineage}
    hashes_b = {entry.entry_hash for entry in b.lineage}
    return ReportDiff(
        score_deltas={name: scores_b[name] - scores_a[name] for name in shared},
        overall_delta=None if overall_a is None or overall_b is None else overall_b - overall_a,
        only_in_a=[name for name in order if name in scores_a and name not in scores_b],
        only_in_b=[name for name in order if name in scores_b and name not in scores_a],
        row_delta=b.final_profile.row_count - a.final_profile.row_count,
        column_delta=b.final_profile.column_count - a.final_profile.column_count,
        missing_cells_delta=b.final_profile.missing_cells - a.final_profile.missing_cells,
        lineage_only_in_a=[entry.entry_id for entry in a.lineage if entry.entry_hash not in hashes_b],
        lineage_only_in_b=[entry.entry_id for entry in b.lineage if entry.entry_hash not in hashes_a],
    )
