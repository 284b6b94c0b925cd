"""Numerical checks of the properties the solver relies on."""

from __future__ import annotations

import numpy as np

from ..core.errors import DimensionMismatch, InvalidConfig, SingularWithinScatter, ZeroVector
from ..core.linalg import SymMatrix

BOUND_SLACK = 1e-12
SINGULAR_CONDITION = 1e12


def ldfs_objective(a: np.ndarray, sb: SymMatrix, sw: SymMatrix, gamma: float) -> float:
    """``-tr((a' sw a)^-1 (a' sb a)) + gamma * sum_i max_j |a_ij|``."""
    values = np.asarray(a, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != sb.order or sb.order != sw.order:
        raise DimensionMismatch(f"transformation of shape {values.shape} does not match scatter order {sb.order}")
    within = values.T @ sw.array @ values
    between = values.T @ sb.array @ values
    if np.linalg.cond(within) > SINGULAR_CONDITION:
        raise SingularWithinScatter("a' Sw a is not invertible")
    try:
        ratio = np.linalg.solve(within, between)
    except np.linalg.LinAlgError as exc:
        raise SingularWithinScatter("a' Sw a is not invertible") from exc
    penalty = float(np.sum(np.max(np.abs(values), axis=1)))
    return -float(np.trace(ratio)) + gamma * penalty


def ldfs_objective_scaling_check(
    a: np.ndarray,
    sb: SymMatrix,
    sw: SymMatrix,
    gamma: float,
    c_scale: float,
) -> tuple[float, float]:
    """Objective of the l-inf,1 formulation at ``a`` and at ``c_scale * a``.

    The ratio term is invariant to scaling while the penalty shrinks, so the
    second value never exceeds the first: shrinking toward zero always helps.
    """
    if not 0.0 < abs(c_scale) < 1.0:
        raise InvalidConfig(f"c_scale must satisfy 0 < |c| < 1, got {c_scale}")
    values = np.asarray(a, dtype=np.float64)
    if not np.any(values):
        raise ZeroVector("transformation must be non-zero")
    return ldfs_objective(values, sb, sw, gamma), ldfs_objective(c_scale * values, sb, sw, gamma)


def reweighting_inequality(a: np.ndarray, a_k: np.ndarray, p: float) -> bool:
    """``||a||^p / ||a_k||^p - (p/2) ||a||^2 / ||a_k||^2 <= 1 - p/2`` (with 1e-12 slack)."""
    if not 0.0 < p <= 2.0:
        raise InvalidConfig(f"p must lie in (0, 2], got {p}")
    norm_a = float(np.linalg.norm(a))
    norm_k = float(np.linalg.norm(a_k))
    if norm_a == 0.0 or norm_k == 0.0:
        raise ZeroVector("both vectors must be non-zero")
    ratio = norm_a / norm_k
    lhs = ratio**p - (p / 2.0) * ratio**2
    return lhs <= 1.0 - p / 2.0 + BOUND_SLACK
