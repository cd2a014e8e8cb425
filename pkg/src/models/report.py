from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.models.lineage import LineageEntry
from src.models.profile import DataProfile
from src.models.quality import QualityAssessment

SCHEMA_VERSION = '1.0'

DATA_TYPES = ('structured', 'unstructured', 'semi-structured')

# Section headings in template order
SECTION_TITLES = (
    ('basic_metadata', 'Basic Metadata'),
    ('summary', 'Summary of Quality and Readiness Assessment'),
    ('baseline_profile', 'Baseline Data Profile'),
    ('baseline_assessment', 'Baseline Quality and Readiness Assessment'),
    ('updated_profile', 'Updated Data Profile'),
    ('updated_assessment', 'Updated Quality and Readiness Assessment'),
    ('lineage', 'Lineage of Operations'),
    ('governance', 'Data Governance'),
    ('references', 'References'),
)


@dataclass
class BasicMetadata:
    data_owner: str
    version: str
    generation_date: str
    data_type: str = 'structured'
    name: str = ''
    description: str = ''
    tags: List[str] = field(default_factory=list)
    intended_usage: str = ''
    contact_person: str = ''
    source_url: str = ''
    column_descriptions: Dict[str, str] = field(default_factory=dict)

    def to_dict(self):
        return {
            'name': self.name,
            'data_owner': self.data_owner,
            'version': self.version,
            'generation_date': self.generation_date,
            'data_type': self.data_type,
            'description': self.description,
            'tags': list(self.tags),
            'intended_usage': self.intended_usage,
            'contact_person': self.contact_person,
            'source_url': self.source_url,
            'column_descriptions': dict(self.column_descriptions),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{key: (list(value) if key == 'tags' else dict(value) if key == 'column_descriptions' else value)
                      for key, value in data.items()})


@dataclass
class GovernanceInfo:
    data_source: str = ''
    usage_restrictions: List[str] = field(default_factory=list)
    policy_restrictions: List[str] = field(default_factory=list)
    license: str = ''

    def to_dict(self):
        return {
            'data_source': self.data_source,
            'usage_restrictions': list(self.usage_restrictions),
            'policy_restrictions': list(self.policy_restrictions),
            'license': self.license,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data_source=data.get('data_source', ''),
            usage_restrictions=list(data.get('usage_restrictions', [])),
            policy_restrictions=list(data.get('policy_restrictions', [])),
            license=data.get('license', ''),
        )


@dataclass
class ScoreRow:
    dimension: str
    baseline: Optional[float]
    updated: Optional[float]

    @property
    def delta(self) -> Optional[float]:
        if self.baseline is None or self.updated is None:
            return None
        return self.updated - self.baseline

    def to_dict(self):
        return {'dimension': self.dimension, 'baseline': self.baseline,
                'updated': self.updated, 'delta': self.delta}

    @classmethod
    def from_dict(cls, data):
        return cls(dimension=data['dimension'], baseline=data['baseline'], updated=data['updated'])


@dataclass
class ColumnBar:
    """Per-column missing and outlier fractions for the summary graphic"""

    name: str
    missing_fraction: float
    outlier_fraction: Optional[float]

    def to_dict(self):
        return {'name': self.name, 'missing_fraction': self.missing_fraction,
                'outlier_fraction': self.outlier_fraction}

    @classmethod
    def from_dict(cls, data):
        return cls(name=data['name'], missing_fraction=data['missing_fraction'],
                   outlier_fraction=data['outlier_fraction'])


@dataclass
class ReportSummary:
    baseline_rows: int
    baseline_columns: int
    baseline_overall: Optional[float]
    scores: List[ScoreRow]
    baseline_bars: List[ColumnBar]
    updated_rows: Optional[int] = None
    updated_columns: Optional[int] = None
    updated_overall: Optional[float] = None
    updated_bars: List[ColumnBar] = field(default_factory=list)

    def to_dict(self):
        return {
            'baseline_rows': self.baseline_rows,
            'baseline_columns': self.baseline_columns,
            'baseline_overall': self.baseline_overall,
            'updated_rows': self.updated_rows,
            'updated_columns': self.updated_columns,
            'updated_overall': self.updated_overall,
            'scores': [row.to_dict() for row in self.scores],
            'baseline_bars': [bar.to_dict() for bar in self.baseline_bars],
            'updated_bars': [bar.to_dict() for bar in self.updated_bars],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            baseline_rows=data['baseline_rows'],
            baseline_columns=data['baseline_columns'],
            baseline_overall=data['baseline_overall'],
            scores=[ScoreRow.from_dict(row) for row in data['scores']],
            baseline_bars=[ColumnBar.from_dict(bar) for bar in data['baseline_bars']],
            updated_rows=data.get('updated_rows'),
            updated_columns=data.get('updated_columns'),
            updated_overall=data.get('updated_overall'),
            updated_bars=[ColumnBar.from_dict(bar) for bar in data.get('updated_bars', [])],
        )


@dataclass
class MetricReference:
    identifier: str
    dimension: str
    title: str
    formula: str
    parameters: Dict[str, Any]
    citation: str

    def to_dict(self):
        return {
            'identifier': self.identifier,
            'dimension': self.dimension,
            'title': self.title,
            'formula': self.formula,
            'parameters': self.parameters,
            'citation': self.citation,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class RemediationReference:
    kind: str
    description: str

    def to_dict(self):
        return {'kind': self.kind, 'description': self.description}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class ReadinessReport:
    basic_metadata: BasicMetadata
    summary: ReportSummary
    baseline_profile: DataProfile
    baseline_assessment: QualityAssessment
    governance: GovernanceInfo
    updated_profile: Optional[DataProfile] = None
    updated_assessment: Optional[QualityAssessment] = None
    lineage: List[LineageEntry] = field(default_factory=list)
    references: List[MetricReference] = field(default_factory=list)
    remediation_overview: List[RemediationReference] = field(default_factory=list)
    implementation: Dict[str, Any] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @property
    def has_updates(self) -> bool:
        return self.updated_assessment is not None

    @property
    def final_profile(self) -> DataProfile:
        return self.updated_profile if self.updated_profile is not None else self.baseline_profile

    @property
    def final_assessment(self) -> QualityAssessment:
        return self.updated_assessment if self.updated_assessment is not None else self.baseline_assessment

    def to_dict(self):
        return {
            'schema_version': self.schema_version,
            'basic_metadata': self.basic_metadata.to_dict(),
            'summary': self.summary.to_dict(),
            'baseline_profile': self.baseline_profile.to_dict(),
            'baseline_assessment': self.baseline_assessment.to_dict(),
            'updated_profile': self.updated_profile.to_dict() if self.updated_profile else None,
            'updated_assessment': self.updated_assessment.to_dict() if self.updated_assessment else None,
            'lineage': [entry.to_dict() for entry in self.lineage],
            'governance': self.governance.to_dict(),
            'references': {
                'metrics': [reference.to_dict() for reference in self.references],
                'remediations': [reference.to_dict() for reference in self.remediation_overview],
                'implementation': self.implementation,
            },
        }

    @classmethod
    def from_dict(cls, data):
        references = data.get('references', {})
        return cls(
            schema_version=data['schema_version'],
            basic_metadata=BasicMetadata.from_dict(data['basic_metadata']),
            summary=ReportSummary.from_dict(data['summary']),
            baseline_profile=DataProfile.from_dict(data['baseline_profile']),
            baseline_assessment=QualityAssessment.from_dict(data['baseline_assessment']),
            updated_profile=DataProfile.from_dict(data['updated_profile']) if data.get('updated_profile') else None,
            updated_assessment=(QualityAssessment.from_dict(data['updated_assessment'])
                                if data.get('updated_assessment') else None),
            lineage=[LineageEntry.from_dict(entry) for entry in data.get('lineage', [])],
            governance=GovernanceInfo.from_dict(data['governance']),
            references=[MetricReference.from_dict(r) for r in references.get('metrics', [])],
            remediation_overview=[RemediationReference.from_dict(r) for r in references.get('remediations', [])],
            implementation=references.get('implementation', {}),
        )


@dataclass
class ReportDiff:
    score_deltas: Dict[str, float]
    overall_delta: Optional[float]
    only_in_a: List[str]
    only_in_b: List[str]
    row_delta: int
    column_delta: int
    missing_cells_delta: int
    lineage_only_in_a: List[int]
    lineage_only_in_b: List[int]

    def to_dict(self):
        return {
            'score_deltas': dict(self.score_deltas),
            'overall_delta': self.overall_delta,
            'dimensions_only_in_a': list(self.only_in_a),
            'dimensions_only_in_b': list(self.only_in_b),
            'row_delta': self.row_delta,
            'column_delta': self.column_delta,
            'missing_cells_delta': self.missing_cells_delta,
            'lineage_only_in_a': list(self.lineage_only_in_a),
            'lineage_only_in_b': list(self.lineage_only_in_b),
        }
