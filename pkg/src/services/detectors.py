"""One detector per quality dimension.

Each detector scores its dimension in [0, 1] (1 = ready), collects evidence,
explains the score in plain language and suggests remediation steps. Detectors
are looked up through DetectorFactory in the fixed dimension order.
"""

import logging
from abc import ABC, abstractmethod
from collections import Counter, defaultdict
from typing import Any, Dict, List, Optional

import numpy as np

from src.models.dataset import ColumnRole, Dataset, conforms
from src.models.profile import DataProfile
from src.models.quality import AssessConfig, Dimension, QualityFinding
from src.models.remediation import RemediationStep, StepKind
from src.models.report import MetricReference
from src.services import statistics
from src.services.ingest import token_parses_as
from src.services.neighbors import dataset_hardness, feature_columns

logger = logging.getLogger(__name__)

MAX_SAMPLE_VIOLATIONS = 5
MAX_MAPPED_TOKENS = 20
DROP_COLUMN_MISSING_FRACTION = 0.5

FEATURE_AND_TARGET = (ColumnRole.FEATURE, ColumnRole.TARGET)


def _percent(fraction: float) -> str:
    return f"{100 * fraction:.2f}%"


class BaseDetector(ABC):
    """Abstract base class for quality dimension detectors"""

    dimension: Dimension
    metric_id: str
    title: str
    formula: str
    citation: str

    @abstractmethod
    def detect(self, dataset: Dataset, profile: DataProfile, config: AssessConfig) -> QualityFinding:
        """Score the dataset on this detector's dimension"""
        pass

    def parameters(self, config: AssessConfig) -> Dict[str, Any]:
        return {}

    def reference(self, config: AssessConfig) -> MetricReference:
        return MetricReference(
            identifier=self.metric_id,
            dimension=self.dimension.value,
            title=self.title,
            formula=self.formula,
            parameters=self.parameters(config),
            citation=self.citation,
        )

    def finding(self, score: float, explanation: str, **evidence) -> QualityFinding:
        score = min(1.0, max(0.0, float(score)))
        return QualityFinding(dimension=self.dimension, metric_id=self.metric_id, applicable=True,
                              score=score, explanation=explanation, flagged=score < 1.0, **evidence)

    def not_applicable(self, reason: str) -> QualityFinding:
        logger.warning(f"{self.dimension.value} not applicable: {reason}")
        return QualityFinding.not_applicable(self.dimension, self.metric_id, reason)


class MissingValuesDetector(BaseDetector):
    dimension = Dimension.MISSING_VALUES
    metric_id = 'missing_values.cell_fraction'
    title = 'Missing value cell fraction'
    formula = 'score = 1 - missing cells / total cells, over feature and target columns'
    citation = 'Cell-level completeness ratio (Wang & Strong, 1996, Beyond accuracy: what data quality means to data consumers)'

    def detect(self, dataset, profile, config):
        columns = dataset.columns_with_roles(*FEATURE_AND_TARGET)
        if not columns:
            return self.not_applicable("the dataset has no feature or target columns")
        total = dataset.row_count * len(columns)
        missing = sum(column.missing_count for column in columns)
        score = 1.0 - missing / total if total else 1.0
        fractions = {column.name: column.missing_count / dataset.row_count if dataset.row_count else 0.0
                     for column in columns}
        affected = [column for column in columns if column.missing_count]

        recommendations = []
        for column in affected:
            fraction = fractions[column.name]
            if column.role == ColumnRole.TARGET:
                recommendations.append(RemediationStep(
                    StepKind.DROP_ROWS_MISSING, {'columns': [column.name]},
                    f"{_percent(fraction)} of labels in '{column.name}' are missing; unlabeled rows cannot be imputed reliably"))
            elif fraction > DROP_COLUMN_MISSING_FRACTION:
                recommendations.append(RemediationStep(
                    StepKind.DROP_COLUMN, {'column': column.name},
                    f"'{column.name}' is {_percent(fraction)} missing, too sparse to impute"))
            else:
                strategy = 'median' if column.is_numeric else 'mode'
                recommendations.append(RemediationStep(
                    StepKind.IMPUTE, {'column': column.name, 'strategy': strategy},
                    f"fill the {column.missing_count} missing cell(s) of '{column.name}' with the {strategy}"))

        missing_rows = np.zeros(dataset.row_count, dtype=bool)
        for column in affected:
            missing_rows |= ~column.present_mask

        explanation = (f"{missing} of {total} cells ({_percent(missing / total if total else 0.0)}) are missing "
                       f"across {len(columns)} feature/target column(s); {len(affected)} column(s) have gaps.")
        finding = self.finding(score, explanation,
                               affected_columns=[column.name for column in affected],
                               details={'missing_cells': missing, 'total_cells': total,
                                        'column_missing_fractions': fractions},
                               recommendations=recommendations)
        finding.set_rows(np.flatnonzero(missing_rows).tolist())
        return finding


class OutliersDetector(BaseDetector):
    dimension = Dimension.OUTLIERS
    metric_id = 'outliers.iqr_fence'
    title = 'Interquartile range fences'
    formula = ('cells outside [Q1 - m*IQR, Q3 + m*IQR] (type-7 quartiles) are outliers; '
               'score = 1 - outlier cells / numeric non-missing cells')
    citation = 'Tukey, J. W. (1977). Exploratory Data Analysis. Addison-Wesley.'

    def parameters(self, config):
        return {'multiplier': config.outlier_multiplier}

    def detect(self, dataset, profile, config):
        names = feature_columns(dataset)
        if not names:
            return self.not_applicable("the dataset has no numeric feature columns")
        flagged_rows = np.zeros(dataset.row_count, dtype=bool)
        per_column = {}
        total = flagged = 0
        for name in names:
            column = dataset.column(name)
            values = column.numeric_array
            present = column.numeric_mask
            fences = statistics.iqr_fences(values[present], config.outlier_multiplier)
            if fences is None:
                continue
            low, high = fences
            outside = present & ((values < low) | (values > high))
            count = int(outside.sum())
            total += int(present.sum())
            flagged += count
            flagged_rows |= outside
            per_column[name] = {'lower_fence': low, 'upper_fence': high, 'outliers': count,
                                'outlier_fraction': count / int(present.sum())}
        if total == 0:
            return self.not_applicable("the numeric feature columns hold no values")

        affected = [name for name, detail in per_column.items() if detail['outliers']]
        recommendations = []
        if affected:
            recommendations = [
                RemediationStep(StepKind.CAP_OUTLIERS, {'columns': affected, 'multiplier': config.outlier_multiplier},
                                "winsorize outlying cells to the nearer fence, keeping every row"),
                RemediationStep(StepKind.DROP_OUTLIER_ROWS, {'columns': affected, 'multiplier': config.outlier_multiplier},
                                "or remove rows holding outliers if they are recording errors"),
            ]
        explanation = (f"{flagged} of {total} numeric cells ({_percent(flagged / total)}) fall outside the "
                       f"IQR fences with multiplier {config.outlier_multiplier:g} in {len(affected)} of "
                       f"{len(per_column)} numeric feature column(s).")
        finding = self.finding(1.0 - flagged / total, explanation, affected_columns=affected,
                               details={'columns': per_column, 'outlier_cells': flagged, 'numeric_cells': total},
                               recommendations=recommendations)
        finding.set_rows(np.flatnonzero(flagged_rows).tolist())
        return finding


class ClassImbalanceDetector(BaseDetector):
    dimension = Dimension.CLASS_IMBALANCE
    metric_id = 'class_imbalance.normalized_entropy'
    title = 'Normalized class entropy'
    formula = 'score = H(p) / log2(C) with H the base-2 Shannon entropy of the C class proportions; 0 for one class'
    citation = 'Shannon, C. E. (1948). A Mathematical Theory of Communication. Bell System Technical Journal.'

    def detect(self, dataset, profile, config):
        target = dataset.target_column
        if target is None:
            return self.not_applicable("no column has role target")
        counts = Counter(token for token in target.tokens if token is not None)
        if not counts:
            return self.not_applicable(f"target column '{target.name}' has no labels")
        score = statistics.normalized_entropy(counts.values())
        ordered = dict(sorted(counts.items()))
        ratio = max(counts.values()) / min(counts.values())

        recommendations = []
        if score < 1.0:
            if len(counts) == 1:
                recommendations.append(RemediationStep(
                    StepKind.OVERSAMPLE, {'ratio': 1.0, 'seed': config.seed},
                    "only one class is present; collect labelled rows of other classes before resampling"))
            else:
                recommendations.append(RemediationStep(
                    StepKind.UNDERSAMPLE, {'ratio': 1.0, 'seed': config.seed},
                    "remove randomly chosen majority rows until the classes are balanced"))
                recommendations.append(RemediationStep(
                    StepKind.OVERSAMPLE, {'ratio': 1.0, 'seed': config.seed},
                    "or duplicate randomly chosen minority rows until the classes are balanced"))

        class_text = ', '.join(f"{label}: {count}" for label, count in ordered.items())
        explanation = (f"Target '{target.name}' has {len(counts)} class(es) ({class_text}); normalized entropy "
                       f"{score:.4f}, largest/smallest class ratio {ratio:.2f}.")
        return self.finding(score, explanation, affected_columns=[target.name],
                            details={'class_counts': ordered, 'max_min_ratio': ratio},
                            recommendations=recommendations)


class LabelNoiseDetector(BaseDetector):
    dimension = Dimension.LABEL_NOISE
    metric_id = 'label_noise.kdn'
    title = 'k-disagreeing neighbours'
    formula = ('kDN(x) = share of the k nearest labelled neighbours (min-max scaled numeric features, Euclidean, '
               'ties to lower row index) with a different label; rows with kDN > t are flagged; '
               'score = 1 - flagged / labelled rows')
    citation = ('Smith, M. R., Martinez, T., Giraud-Carrier, C. (2014). An instance level analysis of data '
                'complexity. Machine Learning 95(2).')

    def parameters(self, config):
        return {'k': config.label_noise_k, 'threshold': config.label_noise_threshold}

    def detect(self, dataset, profile, config):
        target = dataset.target_column
        if target is None:
            return self.not_applicable("no column has role target")
        if not feature_columns(dataset):
            return self.not_applicable("the dataset has no numeric feature columns")
        k = config.label_noise_k
        if dataset.row_count <= k:
            return self.not_applicable(f"{dataset.row_count} rows is not more than k={k}")
        labelled = target.non_missing_count
        if labelled <= k:
            return self.not_applicable(f"only {labelled} labelled rows for k={k}")

        hardness = dataset_hardness(dataset, k)
        flagged_mask = np.nan_to_num(hardness, nan=0.0) > config.label_noise_threshold
        flagged_rows = np.flatnonzero(flagged_mask).tolist()
        score = 1.0 - len(flagged_rows) / labelled

        recommendations = []
        if flagged_rows:
            recommendations.append(RemediationStep(
                StepKind.DROP_FLAGGED_LABELS, {'threshold': config.label_noise_threshold, 'k': k},
                "review the flagged rows with a subject matter expert; drop them if the labels are wrong"))
        explanation = (f"{len(flagged_rows)} of {labelled} labelled rows ({_percent(len(flagged_rows) / labelled)}) "
                       f"disagree with more than {_percent(config.label_noise_threshold)} of their {k} nearest "
                       f"neighbours on '{target.name}'.")
        finding = self.finding(score, explanation, affected_columns=[target.name],
                               details={'k': k, 'threshold': config.label_noise_threshold,
                                        'labelled_rows': labelled, 'flagged_rows': len(flagged_rows),
                                        'mean_kdn': float(np.nanmean(hardness))},
                               recommendations=recommendations)
        finding.set_rows(flagged_rows)
        return finding


class CorrelationDetector(BaseDetector):
    dimension = Dimension.CORRELATION
    metric_id = 'correlation.pairwise_threshold'
    title = 'Pairwise correlation threshold'
    formula = ('pairs with |Pearson r| >= tau (numeric pairs) or Cramer\'s V >= tau (categorical pairs) are '
               'flagged; score = 1 - flagged pairs / defined pairs')
    citation = ('Pearson, K. (1895). Proceedings of the Royal Society of London 58; '
                'Cramer, H. (1946). Mathematical Methods of Statistics. Princeton University Press.')

    def parameters(self, config):
        return {'threshold': config.correlation_threshold}

    def detect(self, dataset, profile, config):
        defined = profile.correlations.defined_entries()
        if not defined:
            return self.not_applicable("no column pair has a defined correlation")
        tau = config.correlation_threshold
        flagged = [entry for entry in defined if abs(entry.value) >= tau]
        protected_names = {column.name for column in dataset.columns_with_roles(ColumnRole.TARGET, ColumnRole.PROTECTED)}

        recommendations = []
        dropped = set()
        for entry in flagged:
            choice = self._column_to_drop(dataset, profile, entry.column_a, entry.column_b, protected_names)
            if choice is None:
                key = tuple(sorted((entry.column_a, entry.column_b)))
                recommendations.append(RemediationStep(
                    StepKind.OVERSAMPLE, {'columns': list(key), 'ratio': 1.0, 'seed': config.seed},
                    f"'{entry.column_a}' and '{entry.column_b}' are both target/protected; "
                    "balance their joint values instead of dropping either"))
            elif choice not in dropped:
                dropped.add(choice)
                recommendations.append(RemediationStep(
                    StepKind.DROP_COLUMN, {'column': choice},
                    f"'{entry.column_a}' and '{entry.column_b}' are strongly associated "
                    f"({entry.method} {entry.value:.4f}); keep one of them"))

        affected = []
        for entry in flagged:
            for name in (entry.column_a, entry.column_b):
                if name not in affected:
                    affected.append(name)
        explanation = (f"{len(flagged)} of {len(defined)} defined column pair(s) reach the association threshold "
                       f"{tau:g} (|Pearson r| for numeric pairs, Cramer's V for categorical pairs).")
        return self.finding(1.0 - len(flagged) / len(defined), explanation, affected_columns=affected,
                            details={'threshold': tau, 'defined_pairs': len(defined),
                                     'flagged_pairs': [{'column_a': e.column_a, 'column_b': e.column_b,
                                                        'method': e.method, 'value': e.value} for e in flagged]},
                            recommendations=recommendations)

    @staticmethod
    def _column_to_drop(dataset, profile, name_a, name_b, protected_names) -> Optional[str]:
        """Higher missing fraction loses; ties go to the later column. Target/protected columns are never dropped."""
        candidates = [name for name in (name_a, name_b) if name not in protected_names]
        if len(candidates) < 2:
            return candidates[0] if candidates else None
        fraction_a = profile.column(name_a).missing_fraction
        fraction_b = profile.column(name_b).missing_fraction
        if fraction_a != fraction_b:
            return name_a if fraction_a > fraction_b else name_b
        return name_a if dataset.column_index(name_a) > dataset.column_index(name_b) else name_b


class HomogeneityDetector(BaseDetector):
    dimension = Dimension.DATA_HOMOGENEITY
    metric_id = 'data_homogeneity.type_violation_fraction'
    title = 'Type violation fraction'
    formula = ('v(c) = non-missing cells not parsing as the column type / non-missing cells (0 for empty columns); '
               'score = 1 - mean v(c) over feature and target columns')
    citation = 'Batini, C., Scannapieco, M. (2016). Data and Information Quality, consistency dimension. Springer.'

    def detect(self, dataset, profile, config):
        columns = dataset.columns_with_roles(*FEATURE_AND_TARGET)
        if not columns:
            return self.not_applicable("the dataset has no feature or target columns")
        per_column = {}
        fractions = []
        violating_rows = np.zeros(dataset.row_count, dtype=bool)
        recommendations = []
        affected = []
        for column in columns:
            present = column.non_missing_count
            fraction = column.type_violation_count / present if present else 0.0
            fractions.append(fraction)
            column_profile = profile.column(column.name)
            violating = [i for i, cell in enumerate(column.cells)
                         if cell is not None and not conforms(cell, column.base_type)]
            samples = []
            for i in violating:
                violating_rows[i] = True
                token = column.tokens[i]
                if token not in samples and len(samples) < MAX_SAMPLE_VIOLATIONS:
                    samples.append(token)
            per_column[column.name] = {
                'declared_type': column.declared_type.value,
                'base_type': column.base_type.value,
                'dominant_type': column_profile.dominant_type.value if column_profile and column_profile.dominant_type else None,
                'dominance': column_profile.dominance if column_profile else None,
                'violation_fraction': fraction,
                'sample_violations': samples,
            }
            if violating:
                affected.append(column.name)
                recommendations.append(self._normalize_step(column, violating))

        score = 1.0 - statistics.mean(fractions)
        explanation = (f"{len(affected)} of {len(columns)} feature/target column(s) contain values that do not "
                       f"match the column type; mean violation fraction {statistics.mean(fractions):.4f}.")
        finding = self.finding(score, explanation, affected_columns=affected,
                               details={'columns': per_column}, recommendations=recommendations)
        finding.set_rows(np.flatnonzero(violating_rows).tolist())
        return finding

    @staticmethod
    def _normalize_step(column, violating) -> RemediationStep:
        unresolved = []
        for i in violating:
            token = column.tokens[i].strip()
            if token and not token_parses_as(token, column.base_type) and token not in unresolved:
                unresolved.append(token)
        transforms: List[Any] = ['trim']
        if unresolved and len(unresolved) <= MAX_MAPPED_TOKENS:
            transforms.append({'map': {token: None for token in unresolved}})
        return RemediationStep(
            StepKind.NORMALIZE_VALUES, {'column': column.name, 'transforms': transforms},
            f"trim '{column.name}' and blank tokens that are not {column.base_type.value} values so they can be imputed")


class DuplicatesDetector(BaseDetector):
    dimension = Dimension.DUPLICATES
    metric_id = 'duplicates.exact_row'
    title = 'Exact duplicate rows'
    formula = 'a row identical to an earlier row in every cell (Missing equals Missing) is a duplicate; score = 1 - duplicates / rows'
    citation = 'Elmagarmid, A. K., Ipeirotis, P. G., Verykios, V. S. (2007). Duplicate Record Detection: A Survey. IEEE TKDE.'

    def detect(self, dataset, profile, config):
        if dataset.row_count == 0:
            return self.not_applicable("the dataset has no rows")
        seen = set()
        duplicates = []
        for index, key in enumerate(dataset.row_keys()):
            if key in seen:
                duplicates.append(index)
            else:
                seen.add(key)
        recommendations = []
        if duplicates:
            recommendations.append(RemediationStep(StepKind.DEDUPE, {}, "keep the first occurrence of every repeated row"))
        explanation = (f"{len(duplicates)} of {dataset.row_count} rows ({_percent(len(duplicates) / dataset.row_count)}) "
                       "repeat an earlier row exactly.")
        finding = self.finding(1.0 - len(duplicates) / dataset.row_count, explanation,
                               details={'duplicate_rows': len(duplicates), 'distinct_rows': len(seen)},
                               recommendations=recommendations)
        finding.set_rows(duplicates)
        return finding


class DataBiasDetector(BaseDetector):
    dimension = Dimension.DATA_BIAS
    metric_id = 'data_bias.disparate_impact'
    title = 'Disparate impact'
    formula = ('r(g) = favorable outcomes / rows in protected group g; DI = min r(g) / max r(g); '
               'score = lowest DI over protected columns; flagged when DI < threshold (four-fifths rule)')
    citation = ('Feldman, M., Friedler, S., Moeller, J., Scheidegger, C., Venkatasubramanian, S. (2015). '
                'Certifying and Removing Disparate Impact. KDD.')

    def parameters(self, config):
        return {'threshold': config.disparate_impact_threshold, 'favorable_value': config.favorable_value}

    def detect(self, dataset, profile, config):
        protected = dataset.protected_columns
        target = dataset.target_column
        if not protected:
            return self.not_applicable("no column has role protected")
        if target is None:
            return self.not_applicable("no column has role target")
        if config.favorable_value is None:
            return self.not_applicable("no favorable target value is configured")

        per_column = {}
        worst = None
        for column in protected:
            sizes = defaultdict(int)
            favorable = defaultdict(int)
            for group, label in zip(column.tokens, target.tokens):
                if group is None or label is None:
                    continue
                sizes[group] += 1
                favorable[group] += label == config.favorable_value
            if not sizes:
                continue
            rates = {group: favorable[group] / sizes[group] for group in sorted(sizes)}
            highest = max(rates.values())
            if highest == 0:
                continue
            impact = min(rates.values()) / highest
            per_column[column.name] = {'group_rates': rates, 'group_sizes': dict(sorted(sizes.items())),
                                       'disparate_impact': impact}
            if worst is None or impact < per_column[worst]['disparate_impact']:
                worst = column.name
        if worst is None:
            return self.not_applicable(
                f"no protected group has a favorable outcome '{config.favorable_value}' in '{target.name}'")

        score = per_column[worst]['disparate_impact']
        threshold = config.disparate_impact_threshold
        rates = per_column[worst]['group_rates']
        disadvantaged = min(rates, key=lambda group: (rates[group], group))
        advantaged = max(rates, key=lambda group: (rates[group], group))

        recommendations = []
        if score < 1.0:
            recommendations.append(RemediationStep(
                StepKind.OVERSAMPLE, {'columns': [worst, target.name], 'ratio': 1.0, 'seed': config.seed},
                f"review how outcomes for '{disadvantaged}' were recorded, then balance ({worst}, {target.name}) cells"))

        flagged_columns = [name for name, detail in per_column.items() if detail['disparate_impact'] < threshold]
        explanation = (f"Favorable rate for '{config.favorable_value}' ranges from {rates[disadvantaged]:.4f} "
                       f"('{disadvantaged}') to {rates[advantaged]:.4f} ('{advantaged}') in '{worst}'; disparate "
                       f"impact {score:.4f} is {'below' if score < threshold else 'at or above'} the "
                       f"{threshold:g} threshold.")
        finding = self.finding(score, explanation, affected_columns=flagged_columns or [worst],
                               details={'favorable_value': config.favorable_value, 'threshold': threshold,
                                        'columns': per_column},
                               recommendations=recommendations)
        finding.flagged = score < threshold
        worst_column = dataset.column(worst)
        finding.set_rows([i for i, group in enumerate(worst_column.tokens) if group == disadvantaged])
        return finding


class DetectorFactory:
    """Detectors by dimension, in the fixed finding order"""

    DETECTORS = {
        Dimension.MISSING_VALUES: MissingValuesDetector,
        Dimension.OUTLIERS: OutliersDetector,
        Dimension.CLASS_IMBALANCE: ClassImbalanceDetector,
        Dimension.LABEL_NOISE: LabelNoiseDetector,
        Dimension.CORRELATION: CorrelationDetector,
        Dimension.DATA_HOMOGENEITY: HomogeneityDetector,
        Dimension.DUPLICATES: DuplicatesDetector,
        Dimension.DATA_BIAS: DataBiasDetector,
    }

    @classmethod
    def create(cls, dimension: Dimension) -> BaseDetector:
        return cls.DETECTORS[Dimension(dimension)]()

    @classmethod
    def by_metric_id(cls, metric_id: str) -> Optional[BaseDetector]:
        for detector_class in cls.DETECTORS.values():
            if detector_class.metric_id == metric_id:
                return detector_class()
        return None

    @classmethod
    def get_supported_dimensions(cls) -> List[Dimension]:
        return list(cls.DETECTORS.keys())
