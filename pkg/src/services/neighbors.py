"""k-disagreeing-neighbours (kDN) instance hardness over the numeric feature columns.

kDN of a labelled row is the fraction of its k nearest labelled neighbours
(Euclidean, min-max scaled features, ties broken by lower row index) whose label
differs from its own.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from src.models.dataset import ColumnRole, Dataset

logger = logging.getLogger(__name__)

# radius slack so neighbours tied at the k-th distance are all considered
_RADIUS_RELATIVE_SLACK = 1e-9
_RADIUS_ABSOLUTE_SLACK = 1e-12


def feature_columns(dataset: Dataset) -> List[str]:
    return [column.name for column in dataset.columns
            if column.role == ColumnRole.FEATURE and column.is_numeric]


def label_noise_features(dataset: Dataset) -> Optional[np.ndarray]:
    """Row-by-feature matrix scaled to [0, 1]; None when there is no numeric feature column.

    Constant (or empty) columns are dropped; missing values take the column median.
    """
    names = feature_columns(dataset)
    if not names:
        return None
    scaled = []
    for name in names:
        values = dataset.column(name).numeric_array
        present = values[~np.isnan(values)]
        if present.size == 0:
            continue
        low, high = present.min(), present.max()
        if low == high:
            continue
        filled = np.where(np.isnan(values), np.median(present), values)
        scaled.append((filled - low) / (high - low))
    if not scaled:
        return np.zeros((dataset.row_count, 1))
    return np.column_stack(scaled)


def row_labels(dataset: Dataset) -> List[Optional[str]]:
    target = dataset.target_column
    if target is None:
        return [None] * dataset.row_count
    return list(target.tokens)


def k_disagreeing_neighbors(features: np.ndarray, labels: Sequence[Optional[str]], k: int) -> np.ndarray:
    """kDN per row; NaN for rows without a label. Neighbours are drawn from labelled rows only."""
    hardness = np.full(len(labels), np.nan)
    labelled = np.array([i for i, label in enumerate(labels) if label is not None], dtype=np.int64)
    if labelled.size == 0:
        return hardness
    points = np.asarray(features, dtype=np.float64)[labelled]
    label_array = np.array([labels[i] for i in labelled], dtype=object)
    neighbours = min(k, labelled.size - 1)
    if neighbours == 0:
        hardness[labelled] = 0.0
        return hardness

    tree = cKDTree(points)
    distances, _ = tree.query(points, k=neighbours + 1)
    radii = distances[:, -1] * (1 + _RADIUS_RELATIVE_SLACK) + _RADIUS_ABSOLUTE_SLACK
    balls = tree.query_ball_point(points, radii)

    for position, ball in enumerate(balls):
        candidates = np.array([c for c in ball if c != position], dtype=np.int64)
        squared = ((points[candidates] - points[position]) ** 2).sum(axis=1)
        # exact distances first, then lower row index
        nearest = candidates[np.lexsort((candidates, squared))[:neighbours]]
        hardness[labelled[position]] = float(np.mean(label_array[nearest] != label_array[position]))
    return hardness


def dataset_hardness(dataset: Dataset, k: int) -> Optional[np.ndarray]:
    """kDN per row of the dataset; None without a target column"""
    features = label_noise_features(dataset)
    if features is None or dataset.target_column is None:
        return None
    logger.debug(f"kDN over {features.shape[1]} scaled feature(s), k={k}")
    return k_disagreeing_neighbors(features, row_labels(dataset), k)
