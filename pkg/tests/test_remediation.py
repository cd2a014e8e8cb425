from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import (
    ColumnNotFoundError,
    InvalidParameterValueError,
    MissingActorError,
    MissingParameterError,
    NotApplicableError,
    PlanSyntaxError,
    TypeMismatchError,
    UnknownStepKindError,
)
from src.models.dataset import Column, ColumnRole, ColumnType, Dataset
from src.models.lineage import Operation
from src.models.remediation import Persona, RemediationPlan, RemediationStep, StepKind
from src.services.ledger import LineageLedger
from src.services.remediation import apply_plan, apply_step, load_plan, parse_plan

TARGET = {'label': ColumnRole.TARGET}


def step(kind, **params):
    return RemediationStep(StepKind(kind), params)


def skewed(load, yes=90, no=10):
    rows = [f"{i},yes" for i in range(yes)] + [f"{yes + i},no" for i in range(no)]
    return load("x,label\n" + "\n".join(rows) + "\n", roles=TARGET)


# Plan documents

def test_minimal_plan():
    plan = parse_plan("plan_id: p1\nsteps:\n  - kind: impute\n    params: {column: age, strategy: median}\n")
    assert plan.plan_id == 'p1'
    assert len(plan.steps) == 1
    assert plan.steps[0].params == {'column': 'age', 'strategy': 'median'}


def test_unknown_step_kind():
    with pytest.raises(UnknownStepKindError) as raised:
        parse_plan("plan_id: p1\nsteps:\n  - kind: dedupe\n  - kind: fix_everything\n")
    assert raised.value.step_index == 1


def test_sampling_step_needs_a_seed():
    with pytest.raises(MissingParameterError):
        parse_plan("plan_id: p1\nsteps:\n  - kind: oversample\n    params: {ratio: 1.0}\n")


@pytest.mark.parametrize('source', [
    "plan_id: p1\nsteps: [\n",
    "- just a list\n",
    "plan_id: p1\nsteps: []\n",
    "plan_id: p1\nowner: x\nsteps:\n  - kind: dedupe\n",
    "plan_id: p1\nsteps:\n  - kind: dedupe\n    when: always\n",
])
def test_malformed_plans(source):
    with pytest.raises(PlanSyntaxError):
        parse_plan(source)


def test_syntax_error_reports_position():
    with pytest.raises(PlanSyntaxError) as raised:
        parse_plan("plan_id: p1\nsteps:\n  - kind: [dedupe\n")
    assert raised.value.line is not None


@pytest.mark.parametrize('params', [
    {'column': 'x', 'strategy': 'magic'},
    {'column': 'x', 'strategy': 'median', 'value': 3},
    {'column': 'x', 'strategy': 'median', 'extra': 1},
])
def test_invalid_impute_parameters(params):
    with pytest.raises(InvalidParameterValueError):
        parse_plan(f"plan_id: p1\nsteps:\n  - kind: impute\n    params: {params!r}\n".replace("'", '"'))


def test_map_keys_must_be_strings():
    source = "plan_id: p1\nsteps:\n  - kind: normalize_values\n    params:\n      column: c\n      transforms:\n        - map: {40: x}\n"
    with pytest.raises(InvalidParameterValueError):
        parse_plan(source)


def test_fixture_plan(plan_file):
    plan = load_plan(plan_file)
    assert [s.kind for s in plan.steps] == [
        StepKind.DEDUPE, StepKind.NORMALIZE_VALUES, StepKind.IMPUTE, StepKind.DROP_ROWS_MISSING,
        StepKind.NORMALIZE_VALUES, StepKind.CAP_OUTLIERS, StepKind.UNDERSAMPLE]
    assert plan.actor.persona == Persona.DATA_STEWARD
    assert plan.steps[4].actor.persona == Persona.SUBJECT_MATTER_EXPERT
    assert plan.steps[5].params == {'columns': ['capital'], 'multiplier': 1.5}


def test_with_seed_reseeds_sampling_steps(plan_file):
    plan = load_plan(plan_file).with_seed(99)
    assert plan.steps[-1].params['seed'] == 99
    assert plan.steps[0].params == {}


# Step semantics

def test_impute_median(load):
    dataset = load("x\n1\n2\n3\n?\n")
    result, summary = apply_step(dataset, step('impute', column='x', strategy='median'))
    assert result.column('x').cells == (1, 2, 3, 2)


@pytest.mark.parametrize('text, filled', [
    ("x\n2\n3\nNA\n", 3),
    ("x\n-2\n-3\nNA\n", -3),
    ("x\n4\n5\nNA\n", 5),
    ("x\n1\n2\n2\nNA\n", 2),
])
def test_integer_median_rounds_halves_away_from_zero(load, text, filled):
    result, summary = apply_step(load(text), step('impute', column='x', strategy='median'))
    assert result.column('x').cells[-1] == filled
    assert summary.cells_modified == 1
    assert summary.rows_before == summary.rows_after == 4


def test_impute_mode_prefers_the_smallest_token(load):
    dataset = load("c\nb\na\nb\na\n?\n")
    result, _ = apply_step(dataset, step('impute', column='c', strategy='mode'))
    assert result.column('c').cells[-1] == 'a'


def test_impute_constant_must_match_the_type(load):
    dataset = load("x\n1\n?\n")
    with pytest.raises(TypeMismatchError):
        apply_step(dataset, step('impute', column='x', strategy='constant', value='many'))


def test_impute_mean_needs_numbers(load):
    with pytest.raises(TypeMismatchError):
        apply_step(load("c\na\n?\n"), step('impute', column='c', strategy='mean'))


def test_dedupe_without_duplicates_is_a_no_op(load):
    dataset = load("a,b\n1,x\n2,y\n")
    result, summary = apply_step(dataset, step('dedupe'))
    assert result.digest == dataset.digest
    assert summary.cells_modified == 0
    assert not summary.changed


def test_dedupe_keeps_first_occurrences(load):
    result, summary = apply_step(load("a\n1\n2\n1\n3\n2\n"), step('dedupe'))
    assert result.column('a').cells == (1, 2, 3)
    assert summary.rows_after == 3


def test_oversample_balances_classes(load):
    dataset = skewed(load)
    result, summary = apply_step(dataset, step('oversample', ratio=1.0, seed=4))
    assert result.row_count == 180
    assert Counter(result.column('label').cells) == {'yes': 90, 'no': 90}
    assert summary.cells_modified == 0
    again, _ = apply_step(dataset, step('oversample', ratio=1.0, seed=4))
    assert again.digest == result.digest


def test_oversample_keeps_the_original_rows_first(load):
    dataset = skewed(load)
    result, _ = apply_step(dataset, step('oversample', ratio=1.0, seed=4))
    assert result.select_rows(range(100)).digest == dataset.digest


def test_undersample_balances_classes(load):
    result, _ = apply_step(skewed(load), step('undersample', ratio=1.0, seed=4))
    assert result.row_count == 20
    assert Counter(result.column('label').cells) == {'yes': 10, 'no': 10}


def test_sampling_without_a_target_needs_columns(load):
    with pytest.raises(NotApplicableError):
        apply_step(load("a\n1\n2\n"), step('oversample', ratio=1.0, seed=0))


def test_cap_outliers_winsorizes_to_the_fences(load):
    dataset = load("x\n" + "\n".join(str(v) for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]) + "\n")
    result, summary = apply_step(dataset, step('cap_outliers', column='x'))
    assert result.column('x').cells[-1] == 14
    assert summary.cells_modified == 1
    assert result.row_count == 10


def test_drop_outlier_rows(load):
    dataset = load("x\n" + "\n".join(str(v) for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]) + "\n")
    result, summary = apply_step(dataset, step('drop_outlier_rows', columns=['x']))
    assert result.row_count == 9
    assert summary.cells_modified == 0


def test_drop_rows_missing(load):
    dataset = load("a,b\n1,\n2,y\n,z\n")
    assert apply_step(dataset, step('drop_rows_missing'))[0].row_count == 1
    assert apply_step(dataset, step('drop_rows_missing', columns=['a']))[0].row_count == 2


def test_drop_column(load):
    result, summary = apply_step(load("a,b\n1,x\n"), step('drop_column', column='b'))
    assert result.column_names == ['a']
    assert summary.columns_after == 1


def test_unknown_column(load):
    with pytest.raises(ColumnNotFoundError):
        apply_step(load("a\n1\n"), step('drop_column', column='zzz'))


def test_normalize_values(load):
    dataset = load("c\n Masters \nmasters\nHS-grad\n")
    result, summary = apply_step(dataset, step('normalize_values', column='c', transforms=['trim', 'lowercase']))
    assert result.column('c').cells == ('masters', 'masters', 'hs-grad')
    assert summary.cells_modified == 2


def test_normalize_map_restores_the_column_type(load):
    rows = "\n".join(str(v) for v in range(40)) + "\nforty\n"
    dataset = load("h\n" + rows)
    assert dataset.column('h').base_type == ColumnType.INTEGER
    result, summary = apply_step(dataset, step('normalize_values', column='h', transforms=[{'map': {'forty': '40'}}]))
    assert result.column('h').cells[-1] == 40
    assert result.column('h').type_violation_count == 0
    assert summary.cells_modified == 1


def test_normalize_rejects_clean_numeric_columns(load):
    rows = "\n".join(str(v) for v in range(40))
    with pytest.raises(TypeMismatchError):
        apply_step(load("h\n" + rows + "\n"), step('normalize_values', column='h', transforms=['trim']))


def test_drop_flagged_labels(load):
    dataset = load("x,label\n0,A\n1,A\n2,B\n10,B\n11,B\n12,B\n", roles=TARGET)
    result, _ = apply_step(dataset, step('drop_flagged_labels', k=3, threshold=0.5))
    assert result.column('x').cells == (10, 11, 12)


# Plans and the ledger

def test_plan_records_one_entry_per_step(load, actor, tmp_path):
    ledger = LineageLedger(tmp_path / 'lineage.jsonl')
    dataset = load("x\n1\n?\n1\n")
    plan = RemediationPlan('p1', [step('impute', column='x', strategy='median'), step('dedupe')])
    result = apply_plan(dataset, plan, ledger, actor)
    entries = ledger.entries()
    assert [e.detail['step']['kind'] for e in entries] == ['impute', 'dedupe']
    assert all(e.operation == Operation.REMEDIATION_STEP for e in entries)
    assert entries[0].input_digest == dataset.digest
    assert entries[-1].output_digest == result.digest
    assert result.version_label == 'p1'


def test_no_op_plan_keeps_the_digest(load, actor, tmp_path):
    ledger = LineageLedger(tmp_path / 'lineage.jsonl')
    dataset = load("a\n1\n2\n")
    plan = RemediationPlan('p1', [step('dedupe'), step('drop_rows_missing')])
    assert apply_plan(dataset, plan, ledger, actor).digest == dataset.digest
    assert [e.detail['change']['cells_modified'] for e in ledger.entries()] == [0, 0]


def test_failing_step_reports_its_index(load, actor, tmp_path):
    ledger = LineageLedger(tmp_path / 'lineage.jsonl')
    plan = RemediationPlan('p1', [step('dedupe'), step('drop_column', column='nope')])
    with pytest.raises(ColumnNotFoundError) as raised:
        apply_plan(load("a\n1\n"), plan, ledger, actor)
    assert raised.value.step_index == 1
    assert len(ledger.entries()) == 1


def test_ledger_needs_an_actor(load, tmp_path):
    with pytest.raises(MissingActorError):
        apply_plan(load("a\n1\n"), RemediationPlan('p1', [step('dedupe')]), LineageLedger(tmp_path / 'l.jsonl'))


def test_step_actor_overrides_plan_actor(readiness_dataset, plan_file, tmp_path):
    ledger = LineageLedger(tmp_path / 'lineage.jsonl')
    apply_plan(readiness_dataset, load_plan(plan_file), ledger)
    assert [e.actor.name for e in ledger.entries()] == ['sam'] * 4 + ['kim'] + ['sam'] * 2


def test_fixture_plan_is_deterministic(readiness_dataset, plan_file):
    plan = load_plan(plan_file)
    first = apply_plan(readiness_dataset, plan)
    second = apply_plan(readiness_dataset, plan)
    assert first.digest == second.digest
    assert first.column('hours').type_violation_count == 0
    assert first.column('age').missing_count == 0
    labels = Counter(first.column('income').cells)
    assert labels['>50K'] == labels['<=50K']


def test_plans_are_idempotent_once_clean(load):
    dataset = load("c\n A \na\nb\nb\n")
    plan = RemediationPlan('p1', [step('normalize_values', column='c', transforms=['trim', 'lowercase']),
                                  step('dedupe')])
    once = apply_plan(dataset, plan)
    assert apply_plan(once, plan).digest == once.digest


cells = st.one_of(st.none(), st.integers(min_value=0, max_value=3))


def integer_dataset(rows):
    columns = tuple(Column(name, ColumnType.INTEGER, ColumnType.INTEGER, ColumnRole.FEATURE,
                           tuple(row[j] for row in rows)) for j, name in enumerate(('a', 'b')))
    return Dataset(columns=columns, row_count=len(rows))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(cells, cells), min_size=1, max_size=25))
def test_row_steps_report_exact_changes(rows):
    dataset = integer_dataset(rows)
    deduped, summary = apply_step(dataset, step('dedupe'))
    assert summary.rows_after == deduped.row_count == len(set(rows))
    assert apply_step(deduped, step('dedupe'))[0].digest == deduped.digest
    complete, summary = apply_step(dataset, step('drop_rows_missing'))
    assert summary.rows_after == sum(1 for a, b in rows if a is not None and b is not None)
    assert all(column.missing_count == 0 for column in complete.columns)
    assert summary.changed == (summary.rows_after != summary.rows_before)
