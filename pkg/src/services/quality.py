"""Quality and readiness assessment: run the enabled detectors and aggregate their scores."""

import logging
import math
from typing import List, Optional

from src.errors import ProfileMismatchError
from src.models.dataset import Dataset
from src.models.profile import DataProfile
from src.models.quality import AssessConfig, Dimension, QualityAssessment, QualityFinding
from src.services.clock import utc_now
from src.services.detectors import DetectorFactory
from src.services.profiler import profile_dataset

logger = logging.getLogger(__name__)


def overall_score(findings: List[QualityFinding], config: AssessConfig) -> Optional[float]:
    """Weighted mean of applicable scores (plain mean with default weights); None if nothing applies"""
    applicable = [finding for finding in findings if finding.applicable]
    if not applicable:
        return None
    weights = [config.weight(finding.dimension) for finding in applicable]
    total = math.fsum(weight * finding.score for weight, finding in zip(weights, applicable))
    return min(1.0, max(0.0, total / math.fsum(weights)))


def assess(dataset: Dataset, profile: DataProfile, config: Optional[AssessConfig] = None) -> QualityAssessment:
    """Run every configured detector and combine the applicable scores"""
    config = (config or AssessConfig()).validate()
    if profile.dataset_digest != dataset.digest:
        raise ProfileMismatchError(
            f"profile digest {profile.dataset_digest[:12]} does not match dataset digest {dataset.digest[:12]}")

    findings = []
    for dimension in DetectorFactory.get_supported_dimensions():
        if dimension not in config.dimensions:
            continue
        findings.append(DetectorFactory.create(dimension).detect(dataset, profile, config))

    assessment = QualityAssessment(
        dataset_digest=dataset.digest,
        findings=findings,
        overall_score=overall_score(findings, config),
        config=config,
        generated_at=utc_now(),
    )
    scored = ', '.join(f"{f.dimension.value}={f.score:.4f}" for f in findings if f.applicable)
    logger.info(f"Assessed {dataset.digest[:12]}: overall {assessment.overall_score} ({scored})")
    return assessment


def _detect(dimension: Dimension, dataset: Dataset, config: Optional[AssessConfig],
            profile: Optional[DataProfile] = None) -> QualityFinding:
    config = (config or AssessConfig()).validate()
    if profile is None:
        profile = profile_dataset(dataset)
    return DetectorFactory.create(dimension).detect(dataset, profile, config)


def detect_missing_values(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.MISSING_VALUES, dataset, config)


def detect_outliers(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.OUTLIERS, dataset, config)


def detect_class_imbalance(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.CLASS_IMBALANCE, dataset, config)


def detect_label_noise(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    """kDN label noise finding; needs a target and numeric feature columns"""
    return _detect(Dimension.LABEL_NOISE, dataset, config)


def detect_correlation(dataset: Dataset, profile: Optional[DataProfile] = None,
                       config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.CORRELATION, dataset, config, profile)


def detect_homogeneity(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.DATA_HOMOGENEITY, dataset, config)


def detect_duplicates(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    return _detect(Dimension.DUPLICATES, dataset, config)


def detect_bias(dataset: Dataset, config: Optional[AssessConfig] = None) -> QualityFinding:
    """Disparate impact of the favorable target value across protected groups"""
    return _detect(Dimension.DATA_BIAS, dataset, config)
