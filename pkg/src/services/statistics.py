"""Descriptive statistics shared by the profiler, detectors and remediation steps."""

from collections import Counter
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.stats import entropy

QUARTILES = (0.25, 0.5, 0.75)


def _sample(values: Iterable[float]) -> np.ndarray:
    return np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)


def quartiles(values: Iterable[float]) -> Tuple[float, float, float]:
    """(Q1, median, Q3) by linear interpolation between order statistics (type 7)"""
    sample = _sample(values)
    if sample.size == 0:
        raise ValueError('quartiles of an empty sample')
    q1, median, q3 = np.quantile(sample, QUARTILES, method='linear')
    return float(q1), float(median), float(q3)


def mean(values: Iterable[float]) -> float:
    return float(np.mean(_sample(values)))


def population_std(values: Iterable[float]) -> float:
    return float(np.std(_sample(values), ddof=0))


def iqr_fences(values: Iterable[float], multiplier: float) -> Optional[Tuple[float, float]]:
    """Closed interval [Q1 - m*IQR, Q3 + m*IQR]; None for an empty sample"""
    sample = _sample(values)
    if sample.size == 0:
        return None
    q1, _, q3 = quartiles(sample)
    spread = q3 - q1
    return q1 - multiplier * spread, q3 + multiplier * spread


def normalized_entropy(counts: Iterable[int]) -> float:
    """Base-2 entropy of the class proportions divided by log2 of the class count"""
    positive = np.asarray([count for count in counts if count > 0], dtype=np.float64)
    if positive.size < 2:
        return 0.0
    if np.all(positive == positive[0]):
        return 1.0
    value = entropy(positive, base=2) / np.log2(positive.size)
    return float(np.clip(value, 0.0, 1.0))


def ranked_counts(tokens: Iterable[str]) -> list:
    """(token, count) pairs by descending count, ties by token"""
    return sorted(Counter(tokens).items(), key=lambda item: (-item[1], item[0]))
