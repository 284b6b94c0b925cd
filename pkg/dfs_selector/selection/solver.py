"""Iteratively reweighted solver for l2,p-regularized discriminant feature selection.

Each iteration solves the generalized eigenproblem

    (gamma * D_k - Sb) a = lam * (St + alpha I) a

for the ``l`` smallest eigenpairs, then rebuilds the diagonal reweighting
matrix ``D`` from the row norms of the new transformation. The smoothed
objective ``-tr(A' Sb A) + gamma * sum_i (||a^i||^2 + zeta)^(p/2)`` never
increases between iterations for 0 < p <= 2.

Rows driven toward zero get weights near ``(p/2) * zeta^(p/2 - 1)``, so the
eigenproblem is solved through the inverted pencil ``gamma * D + Sw + alpha I``
where those weights only make the factored matrix more definite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..core.config import DfsConfig
from ..core.errors import DimensionMismatch, NotPositiveDefinite, NumericalInstability
from ..core.linalg import EigPairs, SymMatrix, eig_residuals, generalized_eig_smallest, orthonormality_error
from ..core.models import DfsSolution, LabeledDataset, ScatterTriple, WeightDiag
from .scatter import compute_scatter

SCORE_TIE_TOLERANCE = 1e-12
PENCIL_SHIFT = 1.0
EXTRAPOLATION_LIMIT = 8.0


def row_norms_2p(m: np.ndarray, p: float) -> tuple[np.ndarray, float]:
    values = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(values, axis=1)
    return norms, float(np.sum(norms**p))


def update_weights(a: np.ndarray, p: float, zeta: float) -> WeightDiag:
    squared = np.sum(np.asarray(a, dtype=np.float64) ** 2, axis=1)
    diag = (p / 2.0) * (squared + zeta) ** (p / 2.0 - 1.0)
    return WeightDiag(diag=diag)


def _check_transform(a: np.ndarray, order: int) -> np.ndarray:
    values = np.asarray(a, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != order:
        raise DimensionMismatch(f"transformation of shape {values.shape} does not match order {order}")
    return values


def dfs_objective(a: np.ndarray, sb: SymMatrix, gamma: float, p: float, zeta: float) -> float:
    """Smoothed objective ``-tr(a' sb a) + gamma * sum_i (||a^i||^2 + zeta)^(p/2)``."""
    values = _check_transform(a, sb.order)
    squared = np.sum(values**2, axis=1)
    penalty = float(np.sum((squared + zeta) ** (p / 2.0)))
    return -float(np.trace(values.T @ sb.array @ values)) + gamma * penalty


def raw_objective(a: np.ndarray, sb: SymMatrix, gamma: float, p: float) -> float:
    values = _check_transform(a, sb.order)
    _, power_sum = row_norms_2p(values, p)
    return -float(np.trace(values.T @ sb.array @ values)) + gamma * power_sum


def divergence(a_prev: np.ndarray, a_next: np.ndarray) -> float:
    prev = np.asarray(a_prev, dtype=np.float64)
    nxt = np.asarray(a_next, dtype=np.float64)
    if prev.shape != nxt.shape:
        raise DimensionMismatch(f"cannot compare transformations of shapes {prev.shape} and {nxt.shape}")
    return float(np.sum(np.abs(np.linalg.norm(nxt, axis=1) - np.linalg.norm(prev, axis=1))))


def rank_scores(scores: np.ndarray) -> np.ndarray:
    """Feature ids by descending score; scores within 1e-12 keep ascending id order."""
    values = np.asarray(scores, dtype=np.float64)
    order = sorted(range(values.shape[0]), key=lambda i: (-values[i], i))
    ranking: list[int] = []
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and values[order[start]] - values[order[stop]] <= SCORE_TIE_TOLERANCE:
            stop += 1
        ranking.extend(sorted(order[start:stop]))
        start = stop
    return np.asarray(ranking, dtype=np.int64)


@dataclass(frozen=True)
class _EigenStep:
    lhs: SymMatrix
    pairs: EigPairs
    objective: float


def _eigen_step(scatter: ScatterTriple, rhs: SymMatrix, weights: WeightDiag, resolved: DfsConfig, l: int) -> _EigenStep:
    lhs = weights.as_matrix().scaled(resolved.gamma) - scatter.sb
    # lhs + rhs == gamma * D + Sw + alpha * I, positive definite for any positive weights.
    pairs = generalized_eig_smallest(lhs, rhs, l, backend=resolved.eig_backend, shift=PENCIL_SHIFT)
    objective = dfs_objective(np.asarray(pairs.vectors), scatter.sb, resolved.gamma, resolved.p, resolved.zeta)
    return _EigenStep(lhs=lhs, pairs=pairs, objective=objective)


def extrapolated_weights(latest: np.ndarray, earlier: np.ndarray, factor: float, p: float, zeta: float) -> WeightDiag:
    """Reweighting for row norms pushed ``factor`` steps further along their log-scale trend.

    Smoothed squared norms never drop below ``zeta``, so the prediction is floored there.
    """
    log_latest = np.log(np.sum(np.asarray(latest, dtype=np.float64) ** 2, axis=1) + zeta)
    log_earlier = np.log(np.sum(np.asarray(earlier, dtype=np.float64) ** 2, axis=1) + zeta)
    predicted = np.maximum(log_latest + factor * (log_latest - log_earlier), np.log(zeta))
    return WeightDiag(diag=(p / 2.0) * np.exp((p / 2.0 - 1.0) * predicted))


def solve(data: LabeledDataset | ScatterTriple, cfg: DfsConfig) -> DfsSolution:
    """Run the reweighting iteration from ``D = I`` until convergence or ``max_iter``.

    Every iteration solves the eigenproblem for the weights of the last accepted
    transformation. With ``cfg.extrapolate`` a second solve uses weights
    extrapolated from the last two accepted transformations and replaces the
    plain step only when its smoothed objective is strictly lower, so the
    objective trace keeps descending.
    """
    scatter = data if isinstance(data, ScatterTriple) else compute_scatter(data)
    d = scatter.order
    if scatter.sb.order != d or scatter.sw.order != d:
        raise DimensionMismatch("scatter matrices disagree in order")
    resolved = cfg.resolve(n_features=d, n_classes=scatter.n_classes, trace_st=scatter.st.trace())
    l = int(resolved.l or 1)
    alpha = float(resolved.alpha or 0.0)
    rhs = scatter.st.with_ridge(alpha)

    weights = WeightDiag(diag=np.ones(d))
    previous: np.ndarray | None = None
    earlier: np.ndarray | None = None
    objective_trace: list[float] = []
    raw_trace: list[float] = []
    divergence_trace: list[float] = []
    constraint_trace: list[float] = []
    residual_trace: list[float] = []
    terminated_by = "MaxIter"
    pairs = None
    iterations = 0
    solves = 0
    factor = 1.0

    for iteration in range(1, resolved.max_iter + 1):
        step = _eigen_step(scatter, rhs, weights, resolved, l)
        solves += 1
        if resolved.extrapolate and previous is not None and earlier is not None:
            trial = extrapolated_weights(previous, earlier, factor, resolved.p, resolved.zeta)
            if not np.array_equal(trial.diag, weights.diag):
                solves += 1
                try:
                    candidate: _EigenStep | None = _eigen_step(scatter, rhs, trial, resolved, l)
                except (NotPositiveDefinite, NumericalInstability) as exc:
                    logging.debug("DFS iteration %d: extrapolated weights rejected (%s)", iteration, exc)
                    candidate = None
                if candidate is not None and candidate.objective < step.objective:
                    logging.debug("DFS iteration %d: extrapolated step accepted (factor %g)", iteration, factor)
                    step = candidate
                    factor = min(2.0 * factor, EXTRAPOLATION_LIMIT)
                else:
                    factor = 1.0

        pairs = step.pairs
        current = np.array(pairs.vectors)
        iterations = iteration

        objective = step.objective
        objective_trace.append(objective)
        raw_trace.append(raw_objective(current, scatter.sb, resolved.gamma, resolved.p))
        constraint_trace.append(orthonormality_error(rhs, current))
        residual_scale = max(1.0, step.lhs.frobenius())
        residual_trace.append(float(np.max(eig_residuals(step.lhs, rhs, pairs))) / residual_scale)

        weights = update_weights(current, resolved.p, resolved.zeta)

        if previous is not None:
            change_in_rows = divergence(previous, current)
            divergence_trace.append(change_in_rows)
            change = abs(objective_trace[-1] - objective_trace[-2])
            logging.debug(
                "DFS iteration %d: objective=%.12g change=%.3e divergence=%.3e",
                iteration,
                objective,
                change,
                change_in_rows,
            )
            if change <= resolved.tol * max(1.0, abs(objective_trace[-2])) and change_in_rows <= resolved.tol * d:
                terminated_by = "Converged"
                previous = current
                break
        else:
            logging.debug("DFS iteration %d: objective=%.12g", iteration, objective)
        earlier, previous = previous, current

    assert previous is not None and pairs is not None
    row_scores, _ = row_norms_2p(previous, resolved.p)
    logging.info(
        "DFS finished after %d iteration(s) (%s, %d eigen solves): gamma=%g p=%g l=%d objective=%.12g",
        iterations,
        terminated_by,
        solves,
        resolved.gamma,
        resolved.p,
        l,
        objective_trace[-1],
    )
    previous.setflags(write=False)
    row_scores.setflags(write=False)
    return DfsSolution(
        a_matrix=previous,
        row_scores=row_scores,
        ranking=rank_scores(row_scores),
        objective_trace=tuple(objective_trace),
        raw_objective_trace=tuple(raw_trace),
        divergence_trace=tuple(divergence_trace),
        constraint_trace=tuple(constraint_trace),
        residual_trace=tuple(residual_trace),
        eigenvalues=np.array(pairs.values),
        iterations=iterations,
        terminated_by=terminated_by,  # type: ignore[arg-type]
        alpha=alpha,
        l=l,
        eigen_solves=solves,
    )
