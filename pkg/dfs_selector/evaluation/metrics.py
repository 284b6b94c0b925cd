from __future__ import annotations

import numpy as np

from ..core.errors import ConstantFeature, DimensionMismatch, InvalidSpec, ZeroVariance
from ..core.models import FeatureSubset, LabeledDataset

VARIANCE_FLOOR = 1e-24


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DimensionMismatch(f"pearson needs two vectors of equal length, got {xs.shape} and {ys.shape}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= VARIANCE_FLOOR * xs.size or syy <= VARIANCE_FLOOR * ys.size:
        raise ZeroVariance("pearson correlation is undefined for a constant vector")
    value = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, value)))


def redundancy_rate(data: LabeledDataset, subset: FeatureSubset, *, absolute: bool = False) -> float:
    """Mean pairwise correlation of the selected columns.

    Each unordered pair is summed once but the sum is normalized by
    ``|F| (|F| - 1)``, so a perfectly duplicated pair scores 0.5.
    """
    if subset.size < 2:
        raise InvalidSpec("redundancy needs at least two selected features")
    if subset.indices[-1] >= data.n_features:
        raise InvalidSpec(f"feature id {subset.indices[-1]} out of range for d={data.n_features}")

    columns = data.features[:, list(subset.indices)]
    centered = columns - columns.mean(axis=0)
    power = np.sum(centered * centered, axis=0)
    for position, feature_id in enumerate(subset.indices):
        if power[position] <= VARIANCE_FLOOR * data.n_samples:
            raise ConstantFeature(feature_id)

    normalized = centered / np.sqrt(power)
    corr = np.clip(normalized.T @ normalized, -1.0, 1.0)
    pairs = corr[np.tril_indices(subset.size, k=-1)]
    if absolute:
        pairs = np.abs(pairs)
    return float(np.sum(pairs)) / (subset.size * (subset.size - 1))
