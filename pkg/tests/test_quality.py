import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import InvalidParameterValueError, ProfileMismatchError
from src.models.dataset import Column, ColumnRole, ColumnType, Dataset
from src.models.quality import AssessConfig, Dimension, QualityAssessment
from src.models.remediation import StepKind
from src.services.profiler import profile_dataset
from src.services.quality import (
    assess,
    detect_bias,
    detect_class_imbalance,
    detect_correlation,
    detect_duplicates,
    detect_homogeneity,
    detect_missing_values,
    detect_outliers,
    overall_score,
)

TARGET = {'label': ColumnRole.TARGET}


def csv(header, rows):
    return header + "\n" + "\n".join(rows) + "\n"


def integer_dataset(rows):
    width = len(rows[0])
    columns = tuple(Column(f"c{j}", ColumnType.INTEGER, ColumnType.INTEGER, ColumnRole.FEATURE,
                           tuple(row[j] for row in rows)) for j in range(width))
    return Dataset(columns=columns, row_count=len(rows))


# Missing values

def test_missing_cells_in_a_grid(load):
    header = ','.join(f"c{j}" for j in range(10))
    rows = []
    for i in range(10):
        rows.append(','.join('' if (i, j) in {(0, 0), (1, 3), (4, 4), (7, 2), (9, 9)} else str(i * j + j)
                             for j in range(10)))
    finding = detect_missing_values(load(csv(header, rows)))
    assert finding.score == pytest.approx(0.95)
    assert finding.details['missing_cells'] == 5
    assert finding.affected_row_count == 5


def test_no_missing_cells(load):
    finding = detect_missing_values(load("a,b\n1,x\n2,y\n"))
    assert finding.score == 1.0
    assert not finding.flagged
    assert finding.recommendations == []


def test_all_cells_missing(load):
    finding = detect_missing_values(load("a,b\n,\n,\n"))
    assert finding.score == 0.0


def test_missing_recommendations_follow_role_and_sparsity(load):
    rows = [f"{'' if i < 6 else i},{'' if i == 0 else i},{'' if i == 1 else 'ab'[i % 2]}" for i in range(10)]
    finding = detect_missing_values(load(csv("sparse,age,label", rows), roles=TARGET))
    kinds = {step.params.get('column') or step.params['columns'][0]: step.kind for step in finding.recommendations}
    assert kinds == {'sparse': StepKind.DROP_COLUMN, 'age': StepKind.IMPUTE, 'label': StepKind.DROP_ROWS_MISSING}


# Outliers

def test_outlier_fences(load):
    finding = detect_outliers(load(csv("x", [str(v) for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]])))
    column = finding.details['columns']['x']
    assert column['lower_fence'] == pytest.approx(-3.5)
    assert column['upper_fence'] == pytest.approx(14.5)
    assert column['outliers'] == 1
    assert finding.affected_rows == [9]
    assert finding.score == pytest.approx(0.9)


def test_constant_column_has_no_outliers(load):
    finding = detect_outliers(load(csv("x", ['4'] * 12)))
    assert finding.details['columns']['x']['outliers'] == 0
    assert finding.score == 1.0


def test_uniform_column_has_no_outliers(load):
    finding = detect_outliers(load(csv("x", [str(v) for v in range(1, 11)])))
    assert finding.score == 1.0
    assert finding.recommendations == []


def test_outlier_recommendations(load):
    finding = detect_outliers(load(csv("x", [str(v) for v in [1, 2, 3, 4, 5, 6, 7, 8, 9, 100]])))
    assert [step.kind for step in finding.recommendations] == [StepKind.CAP_OUTLIERS, StepKind.DROP_OUTLIER_ROWS]
    assert finding.recommendations[0].params == {'columns': ['x'], 'multiplier': 1.5}


def test_outliers_without_numeric_features(load):
    assert not detect_outliers(load("a\nx\ny\n")).applicable


# Class imbalance

@pytest.mark.parametrize('yes, no, expected', [
    (50, 50, 1.0),
    (90, 10, 0.4690),
    (100, 0, 0.0),
])
def test_class_imbalance(load, yes, no, expected):
    rows = [f"{i},yes" for i in range(yes)] + [f"{i},no" for i in range(no)]
    finding = detect_class_imbalance(load(csv("x,label", rows), roles=TARGET))
    assert finding.score == pytest.approx(expected, abs=1e-4)
    assert finding.flagged == (expected < 1.0)


def test_class_imbalance_evidence(load):
    rows = [f"{i},yes" for i in range(90)] + [f"{i},no" for i in range(10)]
    finding = detect_class_imbalance(load(csv("x,label", rows), roles=TARGET))
    assert finding.details['class_counts'] == {'no': 10, 'yes': 90}
    assert finding.details['max_min_ratio'] == pytest.approx(9.0)
    assert {step.kind for step in finding.recommendations} == {StepKind.UNDERSAMPLE, StepKind.OVERSAMPLE}


def test_class_imbalance_without_target(load):
    finding = detect_class_imbalance(load("a\n1\n2\n"))
    assert not finding.applicable
    assert 'target' in finding.explanation


# Correlation

def test_linear_pair_is_flagged(load):
    dataset = load(csv("x,y", [f"{i},{2 * i}" for i in range(30)]))
    finding = detect_correlation(dataset)
    assert finding.score == 0.0
    assert finding.details['flagged_pairs'][0]['value'] == pytest.approx(1.0)
    assert finding.affected_columns == ['x', 'y']


def test_one_of_three_pairs_flagged(load):
    dataset = load(csv("a,b,c", [f"{i},{2 * i},{i % 2}" for i in range(40)]))
    finding = detect_correlation(dataset, profile_dataset(dataset))
    assert finding.details['defined_pairs'] == 3
    assert finding.score == pytest.approx(2 / 3)
    # equal missing fractions: the later column is dropped
    assert [(s.kind, s.params) for s in finding.recommendations] == [(StepKind.DROP_COLUMN, {'column': 'b'})]


def test_weak_correlations_score_one(load):
    dataset = load(csv("a,c", [f"{i},{i % 2}" for i in range(40)]))
    assert detect_correlation(dataset).score == 1.0


def test_protected_pair_recommends_joint_oversample(load):
    rows = [f"{s},{'yes' if s == 'm' else 'no'}" for s in ['m', 'f'] * 20]
    dataset = load(csv("sex,label", rows), roles={'sex': ColumnRole.PROTECTED, 'label': ColumnRole.TARGET})
    finding = detect_correlation(dataset)
    assert finding.flagged
    assert finding.recommendations[0].kind == StepKind.OVERSAMPLE
    assert finding.recommendations[0].params['columns'] == ['label', 'sex']


# Homogeneity

def test_homogeneity_with_one_stray_token(load):
    dataset = load("a,b\n1,1\n2,2\n3,3\nx,4\n", type_dominance_threshold=0.75)
    finding = detect_homogeneity(dataset)
    assert finding.details['columns']['a']['violation_fraction'] == pytest.approx(0.25)
    assert finding.details['columns']['a']['sample_violations'] == ['x']
    assert finding.score == pytest.approx(0.875)
    assert finding.affected_rows == [3]


def test_homogeneous_dataset(load):
    assert detect_homogeneity(load("a,b\n1,x\n2,y\n")).score == 1.0


def test_homogeneity_recommends_normalizing(load):
    dataset = load("a,b\n1,1\n2,2\n3,3\nx,4\n", type_dominance_threshold=0.75)
    step = detect_homogeneity(dataset).recommendations[0]
    assert step.kind == StepKind.NORMALIZE_VALUES
    assert step.params == {'column': 'a', 'transforms': ['trim', {'map': {'x': None}}]}


# Duplicates

def test_duplicate_rows(load):
    finding = detect_duplicates(load("a,b\n1,x\n2,y\n1,x\n3,z\n"))
    assert finding.score == pytest.approx(0.75)
    assert finding.affected_rows == [2]
    assert finding.recommendations[0].kind == StepKind.DEDUPE


def test_missing_equals_missing_for_duplicates(load):
    assert detect_duplicates(load("a,b\n1,\n1,\n")).score == pytest.approx(0.5)


def test_unique_rows(load):
    assert detect_duplicates(load("a\n1\n2\n3\n")).score == 1.0


@pytest.mark.parametrize('n', [1, 2, 5])
def test_identical_rows(load, n):
    assert detect_duplicates(load(csv("a,b", ['7,q'] * n))).score == pytest.approx(1 / n)


# Data bias

def bias_csv(male_yes, female_yes):
    rows = [f"m,{'yes' if i < male_yes else 'no'}" for i in range(10)]
    rows += [f"f,{'yes' if i < female_yes else 'no'}" for i in range(10)]
    return csv("sex,label", rows)


BIAS_ROLES = {'sex': ColumnRole.PROTECTED, 'label': ColumnRole.TARGET}


def test_disparate_impact_below_threshold(load):
    finding = detect_bias(load(bias_csv(6, 3), roles=BIAS_ROLES), AssessConfig(favorable_value='yes'))
    assert finding.score == pytest.approx(0.5)
    assert finding.flagged
    rates = finding.details['columns']['sex']['group_rates']
    assert rates == {'f': pytest.approx(0.3), 'm': pytest.approx(0.6)}
    assert finding.affected_row_count == 10
    assert finding.recommendations[0].kind == StepKind.OVERSAMPLE


def test_equal_rates_are_not_flagged(load):
    finding = detect_bias(load(bias_csv(4, 4), roles=BIAS_ROLES), AssessConfig(favorable_value='yes'))
    assert finding.score == 1.0
    assert not finding.flagged


def test_bias_is_flagged_only_below_threshold(load):
    # rates 0.5 and 0.4 give 0.8, at the threshold
    finding = detect_bias(load(bias_csv(5, 4), roles=BIAS_ROLES), AssessConfig(favorable_value='yes'))
    assert finding.score == pytest.approx(0.8)
    assert not finding.flagged


def test_bias_without_protected_column(load):
    finding = detect_bias(load(bias_csv(6, 3), roles=TARGET), AssessConfig(favorable_value='yes'))
    assert not finding.applicable


def test_bias_without_favorable_value(load):
    assert not detect_bias(load(bias_csv(6, 3), roles=BIAS_ROLES)).applicable


# Assessment

def test_no_target_makes_label_dimensions_not_applicable(load):
    dataset = load(csv("a,b", [f"{i},{i % 3}" for i in range(30)]))
    result = assess(dataset, profile_dataset(dataset))
    for dimension in (Dimension.CLASS_IMBALANCE, Dimension.LABEL_NOISE):
        assert not result.finding(dimension).applicable
        assert result.finding(dimension).score is None


def test_pristine_dataset_is_ready(load):
    rows = [f"{x},A" for x in range(20)] + [f"{100 + x},B" for x in range(20)]
    dataset = load(csv("x,label", rows), roles=TARGET)
    result = assess(dataset, profile_dataset(dataset))
    assert result.overall_score == 1.0
    assert not any(finding.flagged for finding in result.findings)


def test_findings_follow_the_dimension_order(readiness_dataset):
    result = assess(readiness_dataset, profile_dataset(readiness_dataset), AssessConfig(favorable_value='>50K'))
    assert [finding.dimension for finding in result.findings] == list(Dimension)
    assert 0.0 <= result.overall_score <= 1.0
    assert result.finding(Dimension.DUPLICATES).score == pytest.approx(1 - 5 / 505)
    assert result.finding(Dimension.DATA_BIAS).flagged


def test_assessment_is_deterministic(readiness_dataset):
    profile = profile_dataset(readiness_dataset)
    config = AssessConfig(favorable_value='>50K')
    assert assess(readiness_dataset, profile, config).to_dict() == assess(readiness_dataset, profile, config).to_dict()


def test_assessment_round_trips_through_dict(readiness_dataset):
    result = assess(readiness_dataset, profile_dataset(readiness_dataset), AssessConfig(favorable_value='>50K'))
    assert QualityAssessment.from_dict(result.to_dict()).to_dict() == result.to_dict()


def test_disabled_dimensions_are_skipped(readiness_dataset):
    config = AssessConfig(dimensions=(Dimension.MISSING_VALUES, Dimension.DUPLICATES))
    result = assess(readiness_dataset, profile_dataset(readiness_dataset), config)
    assert [finding.dimension for finding in result.findings] == [Dimension.MISSING_VALUES, Dimension.DUPLICATES]


def test_profile_of_another_dataset_is_rejected(load):
    first = load("a\n1\n2\n")
    second = load("a\n1\n3\n")
    with pytest.raises(ProfileMismatchError):
        assess(first, profile_dataset(second))


def test_weighted_overall_score(readiness_dataset):
    profile = profile_dataset(readiness_dataset)
    result = assess(readiness_dataset, profile, AssessConfig(weights={'duplicates': 3.0}))
    applicable = result.applicable_findings()
    weights = [3.0 if f.dimension == Dimension.DUPLICATES else 1.0 for f in applicable]
    expected = math.fsum(w * f.score for w, f in zip(weights, applicable)) / sum(weights)
    assert result.overall_score == pytest.approx(expected)


def test_overall_score_without_applicable_findings():
    assert overall_score([], AssessConfig()) is None


@pytest.mark.parametrize('data', [
    {'correlation_threshold': 0},
    {'label_noise_k': 0},
    {'dimensions': ['readability']},
    {'weights': {'duplicates': -1}},
    {'unknown': 1},
])
def test_invalid_assess_settings(data):
    with pytest.raises(InvalidParameterValueError):
        AssessConfig.from_dict(data)


cells = st.integers(min_value=0, max_value=3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(cells, cells), min_size=1, max_size=20), st.data())
def test_repeating_a_row_never_raises_the_duplicates_score(rows, data):
    before = detect_duplicates(integer_dataset(rows)).score
    extra = data.draw(st.sampled_from(rows))
    after = detect_duplicates(integer_dataset(rows + [extra])).score
    assert after <= before


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(cells, cells), min_size=1, max_size=20), st.data())
def test_blanking_a_cell_never_raises_the_missing_score(rows, data):
    before = detect_missing_values(integer_dataset(rows)).score
    row = data.draw(st.integers(min_value=0, max_value=len(rows) - 1))
    column = data.draw(st.integers(min_value=0, max_value=1))
    blanked = [list(r) for r in rows]
    blanked[row][column] = None
    after = detect_missing_values(integer_dataset(blanked)).score
    assert after <= before


def labelled_dataset(rows):
    features = tuple(Column(f"c{j}", ColumnType.INTEGER, ColumnType.INTEGER, ColumnRole.FEATURE,
                            tuple(row[j] for row in rows)) for j in range(2))
    label = Column('label', ColumnType.CATEGORICAL, ColumnType.TEXT, ColumnRole.TARGET,
                   tuple(row[2] for row in rows))
    group = Column('group', ColumnType.CATEGORICAL, ColumnType.TEXT, ColumnRole.PROTECTED,
                   tuple(row[3] for row in rows))
    return Dataset(columns=features + (label, group), row_count=len(rows))


feature_cells = st.one_of(st.none(), st.integers(min_value=-50, max_value=50))
labelled_rows = st.lists(
    st.tuples(feature_cells, feature_cells, st.sampled_from([None, 'yes', 'no']), st.sampled_from([None, 'f', 'm'])),
    min_size=1, max_size=40)


@settings(max_examples=200, deadline=None)
@given(labelled_rows)
def test_scores_are_bounded_and_overall_is_the_mean(rows):
    dataset = labelled_dataset(rows)
    assessment = assess(dataset, profile_dataset(dataset), AssessConfig(favorable_value='yes', label_noise_k=3))
    assert [f.dimension for f in assessment.findings] == list(Dimension)
    applicable = [f.score for f in assessment.findings if f.applicable]
    assert all(0.0 <= score <= 1.0 for score in applicable)
    if applicable:
        assert assessment.overall_score == pytest.approx(math.fsum(applicable) / len(applicable))
    else:
        assert assessment.overall_score is None
