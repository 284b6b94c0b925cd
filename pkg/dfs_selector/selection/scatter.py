from __future__ import annotations

import logging

import numpy as np

from ..core.errors import DegenerateClass, NumericalInstability
from ..core.linalg import SymMatrix
from ..core.models import LabeledDataset, ScatterTriple, StandardizationParams

CONSTANT_STD = 1e-12
IDENTITY_TOLERANCE = 1e-8
PSD_TOLERANCE = 1e-8


def fit_standardization(features: np.ndarray) -> StandardizationParams:
    values = np.asarray(features, dtype=np.float64)
    mean = values.mean(axis=0)
    std = values.std(axis=0)  # population form (divide by n)
    constant = tuple(int(i) for i in np.flatnonzero(std < CONSTANT_STD))
    scale = np.where(std < CONSTANT_STD, 1.0, std)
    if constant:
        logging.warning("Constant feature columns left unscaled during standardization: %s", list(constant))
    return StandardizationParams(mean=mean, scale=scale, constant_features=constant)


def standardize(data: LabeledDataset) -> tuple[LabeledDataset, StandardizationParams]:
    params = fit_standardization(data.features)
    return data.with_features(params.apply(data.features)), params


def _canonical_rows(block: np.ndarray) -> np.ndarray:
    if block.shape[0] < 2:
        return block
    order = np.lexsort(block.T[::-1])
    return block[order]


def compute_scatter(data: LabeledDataset, *, verify: bool = True) -> ScatterTriple:
    """Total, between-class and within-class scatter of a labeled dataset.

    Rows are summed class by class in ascending class id, each class block in
    lexicographic row order, so the result does not depend on sample order.
    """
    n_classes = int(data.n_classes or 0)
    counts = np.bincount(data.labels, minlength=n_classes)
    if np.any(counts == 0):
        raise DegenerateClass(f"classes without samples: {[int(k) for k in np.flatnonzero(counts == 0)]}")

    blocks = [_canonical_rows(data.features[data.labels == k]) for k in range(n_classes)]
    ordered = np.vstack(blocks)
    total_mean = ordered.mean(axis=0)
    class_means = np.vstack([block.mean(axis=0) for block in blocks])

    d = data.n_features
    sw = np.zeros((d, d))
    for block, mean in zip(blocks, class_means):
        centered = block - mean
        sw += centered.T @ centered

    shifts = class_means - total_mean
    sb = (shifts * counts[:, np.newaxis]).T @ shifts

    centered_total = ordered - total_mean
    st = centered_total.T @ centered_total

    triple = ScatterTriple(
        st=SymMatrix(st),
        sb=SymMatrix(sb),
        sw=SymMatrix(sw),
        class_means=class_means,
        total_mean=total_mean,
        class_counts=counts,
    )
    if verify:
        verify_scatter(triple)
    return triple


def verify_scatter(triple: ScatterTriple) -> None:
    scale = max(1.0, triple.st.frobenius())
    gap = triple.identity_gap()
    if gap > IDENTITY_TOLERANCE * scale:
        raise NumericalInstability(f"scatter identity violated: max |St - Sb - Sw| = {gap:.3e}")
    for name, matrix in (("st", triple.st), ("sb", triple.sb), ("sw", triple.sw)):
        smallest = float(np.linalg.eigvalsh(matrix.array)[0]) if matrix.order else 0.0
        if smallest < -PSD_TOLERANCE * max(1.0, matrix.frobenius()):
            raise NumericalInstability(f"{name} is not positive semi-definite (smallest eigenvalue {smallest:.3e})")


def fisher_ratios(data: LabeledDataset) -> np.ndarray:
    """Per-feature 1-D Fisher ratio diag(Sb) / diag(Sw)."""
    triple = compute_scatter(data, verify=False)
    between = np.diag(triple.sb.array)
    within = np.diag(triple.sw.array)
    ratios = np.zeros_like(between)
    positive = within > 0
    ratios[positive] = between[positive] / within[positive]
    ratios[(~positive) & (between > 0)] = np.inf
    return ratios
