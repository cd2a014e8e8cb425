"""Baseline and updated data profiles: per-column statistics, patterns, histograms and correlations."""

import logging
from collections import Counter
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats.contingency import association

from src.errors import NotApplicableError
from src.models.dataset import Column, ColumnRole, Dataset
from src.models.profile import (
    CATEGORICAL_HISTOGRAM_LABELS,
    OTHER_LABEL,
    ColumnProfile,
    CorrelationEntry,
    CorrelationMatrix,
    DataProfile,
    Histogram,
    ProfileConfig,
    ValueCount,
)
from src.services import statistics
from src.services.clock import utc_now
from src.services.ingest import dominant_type

logger = logging.getLogger(__name__)

PEARSON = 'pearson'
CRAMERS_V = 'cramers_v'


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Sample Pearson correlation of paired values; None when undefined"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("pearson needs paired samples of equal length")
    if len(x) < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return None
    value = np.corrcoef(x, y)[0, 1]
    if not np.isfinite(value):
        return None
    return float(np.clip(value, -1.0, 1.0))


def cramers_v_from_table(table) -> Optional[float]:
    """Cramér's V of a contingency table; None when fewer than two rows or columns are observed"""
    table = np.asarray(table, dtype=np.int64)
    # categories never observed do not count towards r or c
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if table.ndim != 2 or min(table.shape) < 2 or table.sum() < 2:
        return None
    value = float(association(table, method='cramer', correction=False))
    return min(1.0, max(0.0, value))


def cramers_v(a: Sequence[str], b: Sequence[str]) -> Optional[float]:
    """Cramér's V of paired categorical values, without bias correction"""
    if len(a) != len(b):
        raise ValueError("cramers_v needs paired samples of equal length")
    if len(a) < 2:
        return None
    _, rows = np.unique(np.asarray(a, dtype=object), return_inverse=True)
    _, cols = np.unique(np.asarray(b, dtype=object), return_inverse=True)
    table = np.zeros((rows.max() + 1, cols.max() + 1), dtype=np.int64)
    np.add.at(table, (rows, cols), 1)
    return cramers_v_from_table(table)


def generalize(token: str) -> str:
    return ''.join('D' if ch.isdigit() else 'A' if ch.isalpha() else ch for ch in token)


def detect_pattern(column: Column) -> Tuple[str, float]:
    """Most frequent character-class pattern (digit D, letter A) and the share of values it covers"""
    if column.is_numeric:
        raise NotApplicableError(f"column '{column.name}' is numeric; patterns apply to text and categorical columns")
    tokens = [token for token in column.tokens if token is not None]
    if not tokens:
        return '', 0.0
    # most_common keeps first-seen order among equal counts
    pattern, count = Counter(generalize(token) for token in tokens).most_common(1)[0]
    return pattern, count / len(tokens)


def numeric_histogram(values: np.ndarray, bins: int, violations: int = 0) -> Histogram:
    """Equal-width bins over the typed values; cells violating the type go to their own bucket"""
    if values.size == 0:
        return Histogram(kind='numeric', counts=[], violations=violations)
    low, high = float(values.min()), float(values.max())
    if low == high:
        counts, edges = np.histogram(values, bins=1, range=(low - 0.5, high + 0.5))
    else:
        counts, edges = np.histogram(values, bins=bins, range=(low, high))
    return Histogram(kind='numeric', counts=[int(c) for c in counts], edges=[float(e) for e in edges],
                     violations=violations)


def categorical_histogram(tokens: List[str]) -> Histogram:
    ranked = statistics.ranked_counts(tokens)
    kept = ranked[:CATEGORICAL_HISTOGRAM_LABELS]
    labels = [token for token, _ in kept]
    counts = [count for _, count in kept]
    rest = sum(count for _, count in ranked[CATEGORICAL_HISTOGRAM_LABELS:])
    if rest:
        labels.append(OTHER_LABEL)
        counts.append(rest)
    return Histogram(kind='categorical', counts=counts, labels=labels)


def profile_column(column: Column, row_count: int, config: Optional[ProfileConfig] = None) -> ColumnProfile:
    """Statistics of one column; numeric summaries use the typed values only"""
    config = config or ProfileConfig()
    tokens = [token for token in column.tokens if token is not None]
    dominant, dominance = dominant_type(tokens)
    profile = ColumnProfile(
        name=column.name,
        declared_type=column.declared_type,
        base_type=column.base_type,
        role=column.role,
        row_count=row_count,
        missing_count=column.missing_count,
        missing_fraction=column.missing_count / row_count if row_count else 0.0,
        unique_count=len(set(tokens)),
        type_violation_count=column.type_violation_count,
        dominant_type=dominant,
        dominance=dominance,
    )

    numbers = column.numeric_values()
    if numbers:
        values = column.numeric_array[column.numeric_mask]
        profile.minimum = min(numbers)
        profile.maximum = max(numbers)
        profile.mean = statistics.mean(values)
        profile.std_dev = statistics.population_std(values)
        profile.q1, profile.median, profile.q3 = statistics.quartiles(values)
        profile.histogram = numeric_histogram(values, config.histogram_bins, column.type_violation_count)
    elif column.is_numeric and tokens:
        profile.histogram = numeric_histogram(np.empty(0), config.histogram_bins, column.type_violation_count)
    elif tokens:
        profile.histogram = categorical_histogram(tokens)

    if column.is_categorical or not column.is_numeric:
        profile.top_values = [ValueCount(token, count)
                              for token, count in statistics.ranked_counts(tokens)[:config.top_k]]
    if not column.is_numeric:
        profile.dominant_pattern, profile.pattern_coverage = detect_pattern(column)
    return profile


def correlate(a: Column, b: Column) -> Optional[CorrelationEntry]:
    """Correlation entry for a column pair, or None when the pair is not profiled"""
    if a.is_numeric and b.is_numeric:
        paired = a.numeric_mask & b.numeric_mask
        value = pearson(a.numeric_array[paired], b.numeric_array[paired])
        return CorrelationEntry(a.name, b.name, PEARSON, value, value is not None, int(paired.sum()))
    if a.is_categorical and b.is_categorical:
        pairs = [(x, y) for x, y in zip(a.tokens, b.tokens) if x is not None and y is not None]
        value = cramers_v([x for x, _ in pairs], [y for _, y in pairs]) if pairs else None
        return CorrelationEntry(a.name, b.name, CRAMERS_V, value, value is not None, len(pairs))
    return None


def correlation_matrix(dataset: Dataset) -> CorrelationMatrix:
    candidates = [column for column in dataset.columns
                  if column.role not in (ColumnRole.IDENTIFIER, ColumnRole.IGNORE)]
    entries = []
    for a, b in combinations(candidates, 2):
        entry = correlate(a, b)
        if entry is not None:
            entries.append(entry)
    return CorrelationMatrix(entries=entries)


def profile_dataset(dataset: Dataset, config: Optional[ProfileConfig] = None) -> DataProfile:
    """Profile every column and every eligible column pair"""
    config = (config or ProfileConfig()).validate()
    profiles = [profile_column(column, dataset.row_count, config) for column in dataset.columns]
    correlations = correlation_matrix(dataset)
    logger.info(f"Profiled {dataset.column_count} columns over {dataset.row_count} rows; "
                f"{len(correlations.defined_entries())}/{len(correlations.entries)} correlations defined")
    return DataProfile(
        dataset_digest=dataset.digest,
        row_count=dataset.row_count,
        column_count=dataset.column_count,
        column_profiles=profiles,
        correlations=correlations,
        generated_at=utc_now(),
    )
