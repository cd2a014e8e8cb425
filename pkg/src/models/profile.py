from dataclasses import dataclass, field
from typing import List, Optional, Union

from src.errors import InvalidParameterValueError
from src.models.dataset import ColumnRole, ColumnType

Number = Union[int, float]

CATEGORICAL_HISTOGRAM_LABELS = 50
OTHER_LABEL = "(other)"


@dataclass(frozen=True)
class ProfileConfig:
    histogram_bins: int = 10
    top_k: int = 10

    def validate(self) -> "ProfileConfig":
        for name, value in (('histogram_bins', self.histogram_bins), ('top_k', self.top_k)):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidParameterValueError(f"{name} must be an integer >= 1, got {value!r}")
        return self

    def to_dict(self):
        return {'histogram_bins': self.histogram_bins, 'top_k': self.top_k}

    @classmethod
    def from_dict(cls, data: dict) -> "ProfileConfig":
        unknown = set(data) - {'histogram_bins', 'top_k'}
        if unknown:
            raise InvalidParameterValueError(f"unknown profile settings: {sorted(unknown)}")
        return cls(histogram_bins=data.get('histogram_bins', 10), top_k=data.get('top_k', 10)).validate()


@dataclass
class Histogram:
    """Equal-width bins for numeric columns, category counts otherwise"""

    kind: str  # 'numeric' or 'categorical'
    counts: List[int]
    edges: List[float] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    # non-missing cells of a numeric column that do not parse as its type
    violations: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts) + self.violations

    def to_dict(self):
        return {
            'kind': self.kind,
            'counts': list(self.counts),
            'edges': list(self.edges),
            'labels': list(self.labels),
            'violations': self.violations,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(kind=data['kind'], counts=list(data['counts']),
                   edges=list(data.get('edges', [])), labels=list(data.get('labels', [])),
                   violations=data.get('violations', 0))


@dataclass
class ValueCount:
    value: str
    count: int

    def to_dict(self):
        return {'value': self.value, 'count': self.count}

    @classmethod
    def from_dict(cls, data):
        return cls(value=data['value'], count=data['count'])


@dataclass
class ColumnProfile:
    name: str
    declared_type: ColumnType
    base_type: ColumnType
    role: ColumnRole
    row_count: int
    missing_count: int
    missing_fraction: float
    unique_count: int
    type_violation_count: int = 0
    minimum: Optional[Number] = None
    maximum: Optional[Number] = None
    mean: Optional[float] = None
    median: Optional[float] = None
    std_dev: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None
    top_values: List[ValueCount] = field(default_factory=list)
    dominant_pattern: Optional[str] = None
    pattern_coverage: Optional[float] = None
    histogram: Optional[Histogram] = None
    dominant_type: Optional[ColumnType] = None
    dominance: Optional[float] = None

    @property
    def non_missing_count(self) -> int:
        return self.row_count - self.missing_count

    @property
    def has_numeric_stats(self) -> bool:
        return self.minimum is not None

    def constraints(self) -> dict:
        """Observed constraints: value range and dominant pattern, whichever apply"""
        observed = {}
        if self.has_numeric_stats:
            observed['range'] = [self.minimum, self.maximum]
        if self.dominant_pattern is not None:
            observed['pattern'] = self.dominant_pattern
            observed['pattern_coverage'] = self.pattern_coverage
        return observed

    def to_dict(self):
        return {
            'name': self.name,
            'declared_type': self.declared_type.value,
            'base_type': self.base_type.value,
            'role': self.role.value,
            'row_count': self.row_count,
            'missing_count': self.missing_count,
            'missing_fraction': self.missing_fraction,
            'unique_count': self.unique_count,
            'type_violation_count': self.type_violation_count,
            'min': self.minimum,
            'max': self.maximum,
            'mean': self.mean,
            'median': self.median,
            'std_dev': self.std_dev,
            'q1': self.q1,
            'q3': self.q3,
            'top_values': [value.to_dict() for value in self.top_values],
            'dominant_pattern': self.dominant_pattern,
            'pattern_coverage': self.pattern_coverage,
            'histogram': self.histogram.to_dict() if self.histogram else None,
            'dominant_type': self.dominant_type.value if self.dominant_type else None,
            'dominance': self.dominance,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            name=data['name'],
            declared_type=ColumnType(data['declared_type']),
            base_type=ColumnType(data['base_type']),
            role=ColumnRole(data['role']),
            row_count=data['row_count'],
            missing_count=data['missing_count'],
            missing_fraction=data['missing_fraction'],
            unique_count=data['unique_count'],
            type_violation_count=data.get('type_violation_count', 0),
            minimum=data.get('min'),
            maximum=data.get('max'),
            mean=data.get('mean'),
            median=data.get('median'),
            std_dev=data.get('std_dev'),
            q1=data.get('q1'),
            q3=data.get('q3'),
            top_values=[ValueCount.from_dict(v) for v in data.get('top_values', [])],
            dominant_pattern=data.get('dominant_pattern'),
            pattern_coverage=data.get('pattern_coverage'),
            histogram=Histogram.from_dict(data['histogram']) if data.get('histogram') else None,
            dominant_type=ColumnType(data['dominant_type']) if data.get('dominant_type') else None,
            dominance=data.get('dominance'),
        )


@dataclass
class CorrelationEntry:
    column_a: str
    column_b: str
    method: str  # 'pearson' or 'cramers_v'
    value: Optional[float]
    defined: bool
    observations: int

    def to_dict(self):
        return {
            'column_a': self.column_a,
            'column_b': self.column_b,
            'method': self.method,
            'value': self.value,
            'defined': self.defined,
            'observations': self.observations,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{key: data[key] for key in
                      ('column_a', 'column_b', 'method', 'value', 'defined', 'observations')})


@dataclass
class CorrelationMatrix:
    entries: List[CorrelationEntry] = field(default_factory=list)

    def defined_entries(self) -> List[CorrelationEntry]:
        return [entry for entry in self.entries if entry.defined]

    def to_dict(self):
        return {'entries': [entry.to_dict() for entry in self.entries]}

    @classmethod
    def from_dict(cls, data):
        return cls(entries=[CorrelationEntry.from_dict(e) for e in data.get('entries', [])])


@dataclass
class DataProfile:
    dataset_digest: str
    row_count: int
    column_count: int
    column_profiles: List[ColumnProfile]
    correlations: CorrelationMatrix
    generated_at: str

    def column(self, name: str) -> Optional[ColumnProfile]:
        for profile in self.column_profiles:
            if profile.name == name:
                return profile
        return None

    @property
    def missing_cells(self) -> int:
        return sum(profile.missing_count for profile in self.column_profiles)

    def to_dict(self):
        return {
            'dataset_digest': self.dataset_digest,
            'row_count': self.row_count,
            'column_count': self.column_count,
            'column_profiles': [profile.to_dict() for profile in self.column_profiles],
            'correlations': self.correlations.to_dict(),
            'generated_at': self.generated_at,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            dataset_digest=data['dataset_digest'],
            row_count=data['row_count'],
            column_count=data['column_count'],
            column_profiles=[ColumnProfile.from_dict(p) for p in data['column_profiles']],
            correlations=CorrelationMatrix.from_dict(data['correlations']),
            generated_at=data['generated_at'],
        )

    def __repr__(self):
        return f'<DataProfile {self.row_count}x{self.column_count} {self.dataset_digest[:12]}>'
