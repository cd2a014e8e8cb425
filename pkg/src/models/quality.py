from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from src.errors import InvalidParameterValueError
from src.models.remediation import RemediationStep

MAX_EVIDENCE_ROWS = 1000


class Dimension(str, Enum):
    # Declaration order is the fixed order findings appear in
    MISSING_VALUES = 'missing_values'
    OUTLIERS = 'outliers'
    CLASS_IMBALANCE = 'class_imbalance'
    LABEL_NOISE = 'label_noise'
    CORRELATION = 'correlation'
    DATA_HOMOGENEITY = 'data_homogeneity'
    DUPLICATES = 'duplicates'
    DATA_BIAS = 'data_bias'

    @property
    def title(self) -> str:
        return self.value.replace('_', ' ').title()


ALL_DIMENSIONS: Tuple[Dimension, ...] = tuple(Dimension)


@dataclass(frozen=True)
class AssessConfig:
    correlation_threshold: float = 0.8
    outlier_multiplier: float = 1.5
    label_noise_k: int = 5
    label_noise_threshold: float = 0.5
    disparate_impact_threshold: float = 0.8
    favorable_value: Optional[str] = None
    dimensions: Tuple[Dimension, ...] = ALL_DIMENSIONS
    weights: Dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> "AssessConfig":
        for name, value in (('correlation_threshold', self.correlation_threshold),
                            ('label_noise_threshold', self.label_noise_threshold),
                            ('disparate_impact_threshold', self.disparate_impact_threshold)):
            if not 0 < value <= 1:
                raise InvalidParameterValueError(f"{name} must be in (0, 1], got {value}")
        if self.outlier_multiplier <= 0:
            raise InvalidParameterValueError(f"outlier_multiplier must be positive, got {self.outlier_multiplier}")
        if isinstance(self.label_noise_k, bool) or not isinstance(self.label_noise_k, int) or self.label_noise_k < 1:
            raise InvalidParameterValueError(f"label_noise_k must be an integer >= 1, got {self.label_noise_k}")
        for name, weight in self.weights.items():
            if name not in Dimension._value2member_map_:
                raise InvalidParameterValueError(f"unknown dimension '{name}' in weights")
            if weight <= 0:
                raise InvalidParameterValueError(f"weight for '{name}' must be positive")
        return self

    def weight(self, dimension: Dimension) -> float:
        return float(self.weights.get(dimension.value, 1.0))

    def to_dict(self):
        return {
            'correlation_threshold': self.correlation_threshold,
            'outlier_multiplier': self.outlier_multiplier,
            'label_noise_k': self.label_noise_k,
            'label_noise_threshold': self.label_noise_threshold,
            'disparate_impact_threshold': self.disparate_impact_threshold,
            'favorable_value': self.favorable_value,
            'dimensions': [dimension.value for dimension in self.dimensions],
            'weights': dict(sorted(self.weights.items())),
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssessConfig":
        known = set(cls().to_dict())
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterValueError(f"unknown assess settings: {sorted(unknown)}")
        names = data.get('dimensions')
        dimensions = ALL_DIMENSIONS
        if names is not None:
            bad = [name for name in names if name not in Dimension._value2member_map_]
            if bad:
                raise InvalidParameterValueError(
                    f"unknown dimension name(s) {bad}; expected some of {[d.value for d in Dimension]}")
            wanted = set(names)
            dimensions = tuple(d for d in ALL_DIMENSIONS if d.value in wanted)
        favorable = data.get('favorable_value')
        try:
            config = cls(
                correlation_threshold=float(data.get('correlation_threshold', 0.8)),
                outlier_multiplier=float(data.get('outlier_multiplier', 1.5)),
                label_noise_k=data.get('label_noise_k', 5),
                label_noise_threshold=float(data.get('label_noise_threshold', 0.5)),
                disparate_impact_threshold=float(data.get('disparate_impact_threshold', 0.8)),
                favorable_value=None if favorable is None else str(favorable),
                dimensions=dimensions,
                weights={str(k): float(v) for k, v in (data.get('weights') or {}).items()},
                seed=int(data.get('seed', 0)),
            )
        except (TypeError, ValueError) as e:
            raise InvalidParameterValueError(f"invalid assess setting: {e}")
        return config.validate()


@dataclass
class QualityFinding:
    dimension: Dimension
    metric_id: str
    applicable: bool
    score: Optional[float]
    explanation: str
    flagged: bool = False
    affected_columns: List[str] = field(default_factory=list)
    affected_rows: List[int] = field(default_factory=list)
    affected_row_count: int = 0
    details: Dict[str, Any] = field(default_factory=dict)
    recommendations: List[RemediationStep] = field(default_factory=list)

    @classmethod
    def not_applicable(cls, dimension: Dimension, metric_id: str, reason: str) -> "QualityFinding":
        return cls(dimension=dimension, metric_id=metric_id, applicable=False, score=None,
                   explanation=f"Not applicable: {reason}")

    def set_rows(self, rows: List[int]):
        """Record affected rows, keeping at most MAX_EVIDENCE_ROWS indices plus the total"""
        self.affected_row_count = len(rows)
        self.affected_rows = list(rows[:MAX_EVIDENCE_ROWS])

    def to_dict(self):
        return {
            'dimension': self.dimension.value,
            'metric_id': self.metric_id,
            'applicable': self.applicable,
            'score': self.score,
            'flagged': self.flagged,
            'explanation': self.explanation,
            'evidence': {
                'columns': list(self.affected_columns),
                'rows': list(self.affected_rows),
                'row_count': self.affected_row_count,
                'details': self.details,
            },
            'recommendations': [step.to_dict() for step in self.recommendations],
        }

    @classmethod
    def from_dict(cls, data):
        evidence = data.get('evidence', {})
        return cls(
            dimension=Dimension(data['dimension']),
            metric_id=data['metric_id'],
            applicable=data['applicable'],
            score=data['score'],
            flagged=data.get('flagged', False),
            explanation=data['explanation'],
            affected_columns=list(evidence.get('columns', [])),
            affected_rows=list(evidence.get('rows', [])),
            affected_row_count=evidence.get('row_count', 0),
            details=evidence.get('details', {}),
            recommendations=[RemediationStep.from_dict(s) for s in data.get('recommendations', [])],
        )


@dataclass
class QualityAssessment:
    dataset_digest: str
    findings: List[QualityFinding]
    overall_score: Optional[float]
    config: AssessConfig
    generated_at: str

    def finding(self, dimension: Dimension) -> Optional[QualityFinding]:
        for finding in self.findings:
            if finding.dimension == dimension:
                return finding
        return None

    def scores(self) -> Dict[str, Optional[float]]:
        return {finding.dimension.value: finding.score for finding in self.findings}

    def applicable_findings(self) -> List[QualityFinding]:
        return [finding for finding in self.findings if finding.applicable]

    def to_dict(self):
        return {
            'dataset_digest': self.dataset_digest,
            'overall_score': self.overall_score,
            'findings': [finding.to_dict() for finding in self.findings],
            'config': self.config.to_dict(),
            'generated_at': self.generated_at,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            dataset_digest=data['dataset_digest'],
            findings=[QualityFinding.from_dict(f) for f in data['findings']],
            overall_score=data['overall_score'],
            config=AssessConfig.from_dict(data['config']),
            generated_at=data['generated_at'],
        )

    def __repr__(self):
        return f'<QualityAssessment {self.dataset_digest[:12]} overall={self.overall_score}>'
