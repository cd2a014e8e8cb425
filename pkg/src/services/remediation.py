"""Declarative remediation plans: parse, validate and apply steps to datasets.

Every step is a pure function of its input dataset and parameters (sampling
steps carry their own seed), so a plan can be replayed from the lineage ledger.
"""

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from src.errors import (
    DatasetFileNotFoundError,
    DatasetIOError,
    InvalidParameterValueError,
    MissingActorError,
    MissingParameterError,
    NotApplicableError,
    PlanSyntaxError,
    ReadinessError,
    TypeMismatchError,
    UnknownStepKindError,
)
from src.models.dataset import Cell, Column, ColumnType, Dataset, cell_token, conforms
from src.models.lineage import Operation
from src.models.remediation import Actor, ChangeSummary, RemediationPlan, RemediationStep, StepKind
from src.services import statistics
from src.services.ingest import to_cell
from src.services.neighbors import dataset_hardness, feature_columns

logger = logging.getLogger(__name__)

IMPUTE_STRATEGIES = ('mean', 'median', 'mode', 'constant')
SIMPLE_TRANSFORMS = ('trim', 'lowercase')
PLAN_KEYS = {'plan_id', 'actor', 'created_at', 'steps'}
STEP_KEYS = {'kind', 'params', 'rationale', 'actor'}


# Parameter validation

def _require(params: dict, name: str, kind: StepKind) -> Any:
    if params.get(name) is None:
        raise MissingParameterError(f"{kind.value} requires parameter '{name}'")
    return params[name]


def _column_name(value: Any, name: str) -> str:
    if not isinstance(value, str) or not value:
        raise InvalidParameterValueError(f"'{name}' must be a non-empty column name, got {value!r}")
    return value


def _column_list(value: Any, name: str) -> List[str]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value:
        raise InvalidParameterValueError(f"'{name}' must be a column name or a non-empty list of names")
    return [_column_name(item, name) for item in value]


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidParameterValueError(f"'{name}' must be a finite number, got {value!r}")
    return float(value)


def _fraction(value: Any, name: str) -> float:
    value = _number(value, name)
    if not 0 < value <= 1:
        raise InvalidParameterValueError(f"'{name}' must be in (0, 1], got {value}")
    return value


def _positive(value: Any, name: str) -> float:
    value = _number(value, name)
    if value <= 0:
        raise InvalidParameterValueError(f"'{name}' must be positive, got {value}")
    return value


def _count(value: Any, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise InvalidParameterValueError(f"'{name}' must be an integer >= {minimum}, got {value!r}")
    return value


def _validate_impute(params, kind):
    column = _column_name(_require(params, 'column', kind), 'column')
    strategy = _require(params, 'strategy', kind)
    if strategy not in IMPUTE_STRATEGIES:
        raise InvalidParameterValueError(f"impute strategy must be one of {list(IMPUTE_STRATEGIES)}, got {strategy!r}")
    checked = {'column': column, 'strategy': strategy}
    if strategy == 'constant':
        value = _require(params, 'value', kind)
        if not isinstance(value, (str, int, float, bool)):
            raise InvalidParameterValueError(f"constant value must be a scalar, got {value!r}")
        checked['value'] = value
    elif 'value' in params:
        raise InvalidParameterValueError("'value' is only used with strategy constant")
    return checked


def _validate_drop_rows_missing(params, kind):
    columns = params.get('columns', 'any')
    if columns == 'any':
        return {'columns': 'any'}
    return {'columns': _column_list(columns, 'columns')}


def _validate_drop_column(params, kind):
    return {'column': _column_name(_require(params, 'column', kind), 'column')}


def _validate_outlier_step(params, kind):
    if params.get('columns') is None and params.get('column') is None:
        raise MissingParameterError(f"{kind.value} requires parameter 'columns'")
    if params.get('columns') is not None and params.get('column') is not None:
        raise InvalidParameterValueError("give either 'column' or 'columns', not both")
    columns = _column_list(params['columns'] if params.get('columns') is not None else params['column'], 'columns')
    return {'columns': columns, 'multiplier': _positive(params.get('multiplier', 1.5), 'multiplier')}


def _validate_sampling(params, kind):
    ratio = _fraction(_require(params, 'ratio', kind), 'ratio')
    seed = _count(_require(params, 'seed', kind), 'seed', 0)
    checked = {'ratio': ratio, 'seed': seed}
    if params.get('columns') is not None:
        checked['columns'] = _column_list(params['columns'], 'columns')
    return checked


def _validate_dedupe(params, kind):
    return {}


def _validate_transform(transform: Any) -> Union[str, dict]:
    if transform in SIMPLE_TRANSFORMS:
        return transform
    if isinstance(transform, dict) and set(transform) == {'map'} and isinstance(transform['map'], dict):
        mapping = {}
        for source, target in transform['map'].items():
            if not isinstance(source, str) or not (target is None or isinstance(target, str)):
                raise InvalidParameterValueError(
                    f"map entries must be quoted strings (target may be null), got {source!r}: {target!r}")
            mapping[source] = target
        return {'map': mapping}
    raise InvalidParameterValueError(f"unknown transform {transform!r}; expected trim, lowercase or {{map: ...}}")


def _validate_normalize(params, kind):
    column = _column_name(_require(params, 'column', kind), 'column')
    transforms = _require(params, 'transforms', kind)
    if not isinstance(transforms, list) or not transforms:
        raise InvalidParameterValueError("'transforms' must be a non-empty list")
    return {'column': column, 'transforms': [_validate_transform(t) for t in transforms]}


def _validate_drop_flagged(params, kind):
    return {'threshold': _fraction(params.get('threshold', 0.5), 'threshold'),
            'k': _count(params.get('k', 5), 'k', 1)}


_VALIDATORS: Dict[StepKind, Tuple[set, Callable]] = {
    StepKind.IMPUTE: ({'column', 'strategy', 'value'}, _validate_impute),
    StepKind.DROP_ROWS_MISSING: ({'columns'}, _validate_drop_rows_missing),
    StepKind.DROP_COLUMN: ({'column'}, _validate_drop_column),
    StepKind.CAP_OUTLIERS: ({'column', 'columns', 'multiplier'}, _validate_outlier_step),
    StepKind.DROP_OUTLIER_ROWS: ({'column', 'columns', 'multiplier'}, _validate_outlier_step),
    StepKind.OVERSAMPLE: ({'ratio', 'seed', 'columns'}, _validate_sampling),
    StepKind.UNDERSAMPLE: ({'ratio', 'seed', 'columns'}, _validate_sampling),
    StepKind.DEDUPE: (set(), _validate_dedupe),
    StepKind.NORMALIZE_VALUES: ({'column', 'transforms'}, _validate_normalize),
    StepKind.DROP_FLAGGED_LABELS: ({'threshold', 'k'}, _validate_drop_flagged),
}


def step_kind(value: Any) -> StepKind:
    try:
        return StepKind(value)
    except ValueError:
        raise UnknownStepKindError(
            f"unknown step kind {value!r}; expected one of {[kind.value for kind in StepKind]}")


def validate_step(step: RemediationStep) -> RemediationStep:
    """Check parameters against the step kind and fill in defaults"""
    allowed, validator = _VALIDATORS[step.kind]
    params = step.params or {}
    if not isinstance(params, dict):
        raise InvalidParameterValueError(f"params of {step.kind.value} must be a mapping")
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise InvalidParameterValueError(f"unknown parameter(s) {unknown} for {step.kind.value}")
    checked = RemediationStep(kind=step.kind, params=validator(params, step.kind),
                              rationale=step.rationale, actor=step.actor)
    return checked


# Plan documents

def _step_locations(source: str) -> List[Tuple[int, int]]:
    try:
        root = yaml.compose(source)
    except yaml.YAMLError:
        return []
    if isinstance(root, yaml.MappingNode):
        for key, value in root.value:
            if key.value == 'steps' and isinstance(value, yaml.SequenceNode):
                return [(node.start_mark.line + 1, node.start_mark.column + 1) for node in value.value]
    return []


def _actor(data: Any, where: str) -> Optional[Actor]:
    if data is None:
        return None
    if not isinstance(data, dict):
        raise PlanSyntaxError(f"{where} must be a mapping with name and persona")
    return Actor.from_dict(data)


def parse_plan(source: str) -> RemediationPlan:
    """Parse and validate a YAML plan document"""
    try:
        document = yaml.safe_load(source)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        problem = getattr(e, 'problem', None) or str(e)
        if mark is not None:
            raise PlanSyntaxError(problem, line=mark.line + 1, column=mark.column + 1)
        raise PlanSyntaxError(problem)

    if not isinstance(document, dict):
        raise PlanSyntaxError("plan must be a mapping with plan_id and steps", line=1, column=1)
    unknown = sorted(set(document) - PLAN_KEYS)
    if unknown:
        raise PlanSyntaxError(f"unknown plan field(s) {unknown}")
    plan_id = document.get('plan_id')
    if not isinstance(plan_id, str) or not plan_id:
        raise PlanSyntaxError("plan_id must be a non-empty string")
    steps_data = document.get('steps')
    if not isinstance(steps_data, list) or not steps_data:
        raise PlanSyntaxError("steps must be a non-empty list")

    locations = _step_locations(source)
    steps = []
    for index, data in enumerate(steps_data):
        line, column = locations[index] if index < len(locations) else (None, None)
        if not isinstance(data, dict) or 'kind' not in data:
            raise PlanSyntaxError(f"step {index} must be a mapping with a kind", line=line, column=column)
        extra = sorted(set(data) - STEP_KEYS)
        if extra:
            raise PlanSyntaxError(f"step {index} has unknown field(s) {extra}", line=line, column=column)
        try:
            step = RemediationStep(
                kind=step_kind(data['kind']),
                params=data.get('params') or {},
                rationale=str(data.get('rationale') or ''),
                actor=_actor(data.get('actor'), f"step {index} actor"),
            )
            steps.append(validate_step(step))
        except ReadinessError as e:
            raise e.at_step(index)

    created = document.get('created_at')
    plan = RemediationPlan(plan_id=plan_id, steps=steps, actor=_actor(document.get('actor'), 'plan actor'),
                           created_at=None if created is None else str(created))
    logger.debug(f"Parsed {plan!r}")
    return plan


def load_plan(path: Union[str, Path]) -> RemediationPlan:
    """Read and validate a YAML remediation plan"""
    path = Path(path)
    if not path.is_file():
        raise DatasetFileNotFoundError(f"plan file not found: {path}")
    try:
        source = path.read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetIOError(f"cannot read plan {path}: {e}")
    return parse_plan(source)


# Step semantics

def _numeric_column(dataset: Dataset, name: str, kind: StepKind) -> Column:
    column = dataset.column(name)
    if not column.is_numeric:
        raise TypeMismatchError(f"{kind.value} needs a numeric column; '{name}' is {column.base_type.value}")
    return column


def _typed_value(value: Any, column: Column) -> Cell:
    if isinstance(value, bool):
        token = 'true' if value else 'false'
    elif isinstance(value, float):
        token = repr(value)
    else:
        token = str(value)
    cell, non_finite = to_cell(token, column.base_type)
    if non_finite or cell is None:
        raise InvalidParameterValueError(f"constant {value!r} is not a finite value")
    if not conforms(cell, column.base_type):
        raise TypeMismatchError(f"constant {value!r} is not a valid {column.base_type.value} for '{column.name}'")
    return cell


def round_half_away(value: float) -> int:
    """Nearest integer, halves rounded away from zero (2.5 -> 3, -2.5 -> -3)"""
    return int(np.copysign(np.floor(abs(value) + 0.5), value))


def _impute(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    column = dataset.column(params['column'])
    strategy = params['strategy']
    if column.missing_count == 0:
        return dataset, 0

    if strategy in ('mean', 'median'):
        column = _numeric_column(dataset, column.name, StepKind.IMPUTE)
        values = column.numeric_array[column.numeric_mask]
        if values.size == 0:
            raise NotApplicableError(f"'{column.name}' has no numeric values to take the {strategy} of")
        fill = statistics.mean(values) if strategy == 'mean' else statistics.quartiles(values)[1]
        fill = round_half_away(fill) if column.base_type == ColumnType.INTEGER else float(fill)
    elif strategy == 'mode':
        typed = [cell for cell in column.cells if cell is not None and conforms(cell, column.base_type)]
        if not typed:
            raise NotApplicableError(f"'{column.name}' has no values to take the mode of")
        by_token = {}
        for cell in typed:
            by_token.setdefault(cell_token(cell), cell)
        # ties resolve to the smallest token
        fill = by_token[statistics.ranked_counts(cell_token(cell) for cell in typed)[0][0]]
    else:
        fill = _typed_value(params['value'], column)

    cells = [fill if cell is None else cell for cell in column.cells]
    return dataset.replace_column(column.with_cells(cells)), column.missing_count


def _drop_rows_missing(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    names = dataset.column_names if params['columns'] == 'any' else params['columns']
    masks = [dataset.column(name).present_mask for name in names]
    keep = np.logical_and.reduce(masks) if masks else np.ones(dataset.row_count, dtype=bool)
    return dataset.select_rows(np.flatnonzero(keep).tolist()), 0


def _drop_column(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    return dataset.drop_column(params['column']), 0


def _fences(dataset: Dataset, params: dict, kind: StepKind) -> List[Tuple[Column, float, float]]:
    fenced = []
    for name in params['columns']:
        column = _numeric_column(dataset, name, kind)
        fences = statistics.iqr_fences(column.numeric_array[column.numeric_mask], params['multiplier'])
        if fences is not None:
            fenced.append((column, fences[0], fences[1]))
    return fenced


def _cap_outliers(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    modified = 0
    for column, low, high in _fences(dataset, params, StepKind.CAP_OUTLIERS):
        if column.base_type == ColumnType.INTEGER:
            low_cap, high_cap = int(math.ceil(low)), int(math.floor(high))
        else:
            low_cap, high_cap = float(low), float(high)
        cells = []
        for cell in column.cells:
            if cell is not None and conforms(cell, column.base_type):
                if cell < low:
                    cell, modified = low_cap, modified + 1
                elif cell > high:
                    cell, modified = high_cap, modified + 1
            cells.append(cell)
        dataset = dataset.replace_column(column.with_cells(cells))
    return dataset, modified


def _drop_outlier_rows(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    outside = np.zeros(dataset.row_count, dtype=bool)
    for column, low, high in _fences(dataset, params, StepKind.DROP_OUTLIER_ROWS):
        values = column.numeric_array
        outside |= column.numeric_mask & ((values < low) | (values > high))
    return dataset.select_rows(np.flatnonzero(~outside).tolist()), 0


def _class_rows(dataset: Dataset, params: dict, kind: StepKind) -> Dict[Tuple[str, ...], List[int]]:
    """Row indices per class; classes are joint values of the sampling columns (default: the target)"""
    names = params.get('columns')
    if names is None:
        target = dataset.target_column
        if target is None:
            raise NotApplicableError(f"{kind.value} needs a target column or explicit 'columns'")
        names = [target.name]
    columns = [dataset.column(name) for name in names]
    classes: Dict[Tuple[str, ...], List[int]] = {}
    for index, key in enumerate(zip(*(column.tokens for column in columns))):
        if any(token is None for token in key):
            continue
        classes.setdefault(key, []).append(index)
    return dict(sorted(classes.items()))


def _oversample(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    classes = _class_rows(dataset, params, StepKind.OVERSAMPLE)
    if len(classes) < 2:
        return dataset, 0
    largest = max(len(rows) for rows in classes.values())
    wanted = math.ceil(Fraction(repr(params['ratio'])) * largest)
    rng = np.random.default_rng(params['seed'])
    added = []
    for rows in classes.values():
        need = wanted - len(rows)
        if need > 0:
            picks = rng.integers(0, len(rows), size=need)
            added.extend(rows[i] for i in picks)
    if not added:
        return dataset, 0
    return dataset.select_rows(list(range(dataset.row_count)) + added), 0


def _undersample(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    classes = _class_rows(dataset, params, StepKind.UNDERSAMPLE)
    if len(classes) < 2:
        return dataset, 0
    smallest = min(len(rows) for rows in classes.values())
    limit = math.floor(Fraction(smallest) / Fraction(repr(params['ratio'])))
    rng = np.random.default_rng(params['seed'])
    removed = set()
    for rows in classes.values():
        excess = len(rows) - limit
        if excess > 0:
            removed.update(int(i) for i in rng.choice(np.array(rows), size=excess, replace=False))
    if not removed:
        return dataset, 0
    return dataset.select_rows(i for i in range(dataset.row_count) if i not in removed), 0


def _dedupe(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    seen = set()
    keep = []
    for index, key in enumerate(dataset.row_keys()):
        if key not in seen:
            seen.add(key)
            keep.append(index)
    if len(keep) == dataset.row_count:
        return dataset, 0
    return dataset.select_rows(keep), 0


def _transform_token(token: str, transforms: Sequence[Union[str, dict]]) -> Optional[str]:
    for transform in transforms:
        if transform == 'trim':
            token = token.strip()
        elif transform == 'lowercase':
            token = token.lower()
        elif token in transform['map']:
            token = transform['map'][token]
            if token is None:
                return None
    return token or None


def _normalize_values(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    column = dataset.column(params['column'])
    if column.is_numeric and not column.is_categorical and column.type_violation_count == 0:
        raise TypeMismatchError(
            f"normalize_values needs a text or categorical column, or one with type violations; "
            f"'{column.name}' is {column.base_type.value}")
    cells = []
    modified = 0
    for cell in column.cells:
        new = cell
        if cell is not None:
            token = _transform_token(cell_token(cell), params['transforms'])
            new = None if token is None else to_cell(token, column.base_type)[0]
        if new != cell or type(new) is not type(cell):
            modified += 1
        cells.append(new)
    if not modified:
        return dataset, 0
    return dataset.replace_column(column.with_cells(cells)), modified


def _drop_flagged_labels(dataset: Dataset, params: dict) -> Tuple[Dataset, int]:
    if dataset.target_column is None:
        raise NotApplicableError("drop_flagged_labels needs a target column")
    if not feature_columns(dataset):
        raise NotApplicableError("drop_flagged_labels needs at least one numeric feature column")
    hardness = dataset_hardness(dataset, params['k'])
    flagged = np.nan_to_num(hardness, nan=0.0) > params['threshold']
    if not flagged.any():
        return dataset, 0
    return dataset.select_rows(np.flatnonzero(~flagged).tolist()), 0


_STEPS: Dict[StepKind, Callable[[Dataset, dict], Tuple[Dataset, int]]] = {
    StepKind.IMPUTE: _impute,
    StepKind.DROP_ROWS_MISSING: _drop_rows_missing,
    StepKind.DROP_COLUMN: _drop_column,
    StepKind.CAP_OUTLIERS: _cap_outliers,
    StepKind.DROP_OUTLIER_ROWS: _drop_outlier_rows,
    StepKind.OVERSAMPLE: _oversample,
    StepKind.UNDERSAMPLE: _undersample,
    StepKind.DEDUPE: _dedupe,
    StepKind.NORMALIZE_VALUES: _normalize_values,
    StepKind.DROP_FLAGGED_LABELS: _drop_flagged_labels,
}


def apply_step(dataset: Dataset, step: RemediationStep, step_index: int = 0) -> Tuple[Dataset, ChangeSummary]:
    """Apply one validated step; returns the new dataset and an exact change summary"""
    step = validate_step(step)
    result, modified = _STEPS[step.kind](dataset, step.params)
    summary = ChangeSummary(
        step_index=step_index,
        kind=step.kind,
        rows_before=dataset.row_count,
        rows_after=result.row_count,
        columns_before=dataset.column_count,
        columns_after=result.column_count,
        cells_modified=modified,
        input_digest=dataset.digest,
        output_digest=result.digest,
    )
    logger.info(f"Step {step_index} {step.kind.value}: rows {summary.rows_before}->{summary.rows_after}, "
                f"columns {summary.columns_before}->{summary.columns_after}, {modified} cell(s) modified")
    return result, summary


def apply_plan(dataset: Dataset, plan: RemediationPlan, ledger=None, actor: Optional[Actor] = None) -> Dataset:
    """Apply every step in order, recording one ledger entry per step when a ledger is given.

    A failing step raises with its index and leaves no entry of its own in the ledger.
    """
    current = dataset
    for index, step in enumerate(plan.steps):
        step_actor = step.actor or plan.actor or actor
        try:
            if ledger is not None and step_actor is None:
                raise MissingActorError("remediation steps need an actor (plan actor, --actor or READINESS_ACTOR)")
            result, summary = apply_step(current, step, index)
        except ReadinessError as e:
            raise e.at_step(index)
        if ledger is not None:
            ledger.append(
                actor=step_actor,
                operation=Operation.REMEDIATION_STEP,
                input_digest=summary.input_digest,
                output_digest=summary.output_digest,
                detail={'plan_id': plan.plan_id, 'step': validate_step(step).to_dict(), 'change': summary.to_dict()},
            )
        current = result
    return current.with_version_label(plan.plan_id)
