import copy
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional

from src.errors import InvalidParameterValueError


class StepKind(str, Enum):
    IMPUTE = 'impute'
    DROP_ROWS_MISSING = 'drop_rows_missing'
    DROP_COLUMN = 'drop_column'
    CAP_OUTLIERS = 'cap_outliers'
    DROP_OUTLIER_ROWS = 'drop_outlier_rows'
    OVERSAMPLE = 'oversample'
    UNDERSAMPLE = 'undersample'
    DEDUPE = 'dedupe'
    NORMALIZE_VALUES = 'normalize_values'
    DROP_FLAGGED_LABELS = 'drop_flagged_labels'


SAMPLING_KINDS = (StepKind.OVERSAMPLE, StepKind.UNDERSAMPLE)


class Persona(str, Enum):
    DATA_STEWARD = 'data_steward'
    SUBJECT_MATTER_EXPERT = 'subject_matter_expert'
    DATA_SCIENTIST = 'data_scientist'
    ML_ENGINEER = 'ml_engineer'
    DATA_GOVERNANCE_OFFICER = 'data_governance_officer'
    OTHER = 'other'


@dataclass(frozen=True)
class Actor:
    name: str
    persona: Persona = Persona.OTHER

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise InvalidParameterValueError("actor name must be non-empty")

    def to_dict(self):
        return {'name': self.name, 'persona': self.persona.value}

    @classmethod
    def from_dict(cls, data: dict) -> "Actor":
        try:
            persona = Persona(data.get('persona', Persona.OTHER.value))
        except ValueError:
            raise InvalidParameterValueError(
                f"unknown persona '{data.get('persona')}'; expected one of {[p.value for p in Persona]}")
        return cls(name=str(data.get('name') or ''), persona=persona)

    def __str__(self):
        return f'{self.name} ({self.persona.value})'


@dataclass
class RemediationStep:
    kind: StepKind
    params: Dict[str, Any] = field(default_factory=dict)
    rationale: str = ''
    actor: Optional[Actor] = None

    def with_params(self, **updates) -> "RemediationStep":
        params = copy.deepcopy(self.params)
        params.update(updates)
        return replace(self, params=params)

    def to_dict(self):
        return {
            'kind': self.kind.value,
            'params': copy.deepcopy(self.params),
            'rationale': self.rationale,
            'actor': self.actor.to_dict() if self.actor else None,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            kind=StepKind(data['kind']),
            params=copy.deepcopy(data.get('params') or {}),
            rationale=data.get('rationale') or '',
            actor=Actor.from_dict(data['actor']) if data.get('actor') else None,
        )


@dataclass
class RemediationPlan:
    plan_id: str
    steps: List[RemediationStep]
    actor: Optional[Actor] = None
    created_at: Optional[str] = None

    def with_seed(self, seed: int) -> "RemediationPlan":
        """Copy of the plan with every sampling step reseeded"""
        steps = [step.with_params(seed=seed) if step.kind in SAMPLING_KINDS else step
                 for step in self.steps]
        return replace(self, steps=steps)

    def to_dict(self):
        return {
            'plan_id': self.plan_id,
            'actor': self.actor.to_dict() if self.actor else None,
            'created_at': self.created_at,
            'steps': [step.to_dict() for step in self.steps],
        }

    def __repr__(self):
        return f'<RemediationPlan {self.plan_id}: {len(self.steps)} steps>'


@dataclass
class ChangeSummary:
    step_index: int
    kind: StepKind
    rows_before: int
    rows_after: int
    columns_before: int
    columns_after: int
    cells_modified: int
    input_digest: str
    output_digest: str

    @property
    def changed(self) -> bool:
        return self.input_digest != self.output_digest

    def to_dict(self):
        return {
            'step_index': self.step_index,
            'kind': self.kind.value,
            'rows_before': self.rows_before,
            'rows_after': self.rows_after,
            'columns_before': self.columns_before,
            'columns_after': self.columns_after,
            'cells_modified': self.cells_modified,
            'input_digest': self.input_digest,
            'output_digest': self.output_digest,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            step_index=data['step_index'],
            kind=StepKind(data['kind']),
            rows_before=data['rows_before'],
            rows_after=data['rows_after'],
            columns_before=data['columns_before'],
            columns_after=data['columns_after'],
            cells_modified=data['cells_modified'],
            input_digest=data['input_digest'],
            output_digest=data['output_digest'],
        )
