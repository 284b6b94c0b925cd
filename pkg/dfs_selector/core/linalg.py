"""Dense symmetric linear algebra used by the DFS solver.

Generalized problems ``lhs @ a = lam * rhs @ a`` are reduced to a standard
symmetric problem through the Cholesky factor of ``rhs``. The standard problem
is solved either by cyclic Jacobi rotations or by LAPACK (``numpy.linalg.eigh``);
both paths share the same ordering and sign normalization so results are
reproducible. When a shift is given the pencil is inverted through the Cholesky
factor of ``lhs + shift * rhs`` instead, which keeps the wanted eigenvalues at
the top of a well-scaled reduced spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, NumericalInstability

EigBackend = Literal["lapack", "jacobi"]

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
TIE_TOLERANCE = 1e-10
PIVOT_FLOOR = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric matrix with a read-only, exactly symmetric buffer."""

    array: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.array, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise DimensionMismatch(f"symmetric matrix must be square, got shape {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise NumericalInstability("symmetric matrix has non-finite entries")
        # Mirror the lower triangle so entry(i, j) == entry(j, i) bit for bit.
        lower = np.tril(raw)
        values = lower + np.tril(raw, -1).T
        values.setflags(write=False)
        object.__setattr__(self, "array", values)

    @classmethod
    def identity(cls, order: int) -> "SymMatrix":
        return cls(np.eye(order))

    @classmethod
    def diag(cls, values: np.ndarray | list[float]) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def order(self) -> int:
        return int(self.array.shape[0])

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.array))

    def trace(self) -> float:
        return float(np.trace(self.array))

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        _check_same_order(self, other)
        return SymMatrix(self.array + other.array)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        _check_same_order(self, other)
        return SymMatrix(self.array - other.array)

    def scaled(self, factor: float) -> "SymMatrix":
        return SymMatrix(self.array * float(factor))

    def with_ridge(self, alpha: float) -> "SymMatrix":
        return SymMatrix(self.array + float(alpha) * np.eye(self.order))


@dataclass(frozen=True)
class EigPairs:
    values: np.ndarray
    vectors: np.ndarray


def _check_same_order(left: SymMatrix, right: SymMatrix) -> None:
    if left.order != right.order:
        raise DimensionMismatch(f"matrix orders differ: {left.order} vs {right.order}")


def cholesky(m: SymMatrix, *, pivot_floor: float = PIVOT_FLOOR) -> np.ndarray:
    """Return lower-triangular ``L`` with ``L @ L.T == m``.

    Raises NotPositiveDefinite when a pivot is not strictly positive; callers
    usually respond by increasing the ridge on the right-hand matrix. Pass
    ``pivot_floor=0.0`` for matrices whose diagonal is graded on purpose.
    """
    try:
        factor = np.linalg.cholesky(m.array)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix of order {m.order} is not positive definite; increase alpha") from exc
    # Pivots this small relative to the diagonal only arise from rank deficiency.
    floor = pivot_floor * max(float(np.max(np.abs(np.diag(m.array)))), np.finfo(np.float64).tiny)
    if not np.all(np.isfinite(factor)) or np.any(np.diag(factor) ** 2 <= floor):
        raise NotPositiveDefinite(f"matrix of order {m.order} produced a non-positive pivot; increase alpha")
    return factor


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(m: np.ndarray | SymMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum of a symmetric matrix by cyclic (row-ordered) Jacobi rotations.

    Stops when the off-diagonal Frobenius mass drops below
    ``JACOBI_TOLERANCE * ||m||_F`` or after ``JACOBI_MAX_SWEEPS`` sweeps.
    Returned values are unsorted; columns of the second result are the vectors.
    """
    a = np.array(m.array if isinstance(m, SymMatrix) else m, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    threshold = JACOBI_TOLERANCE * scale
    for _ in range(JACOBI_MAX_SWEEPS):
        off = _off_diagonal_norm(a)
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if tau >= 0.0 else -1.0
                t = sign / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        off = _off_diagonal_norm(a)
        if off >= threshold:
            raise NumericalInstability(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal {off:.3e})")
    return np.diag(a).copy(), v


def symmetric_eig(m: SymMatrix, *, backend: EigBackend = "lapack") -> EigPairs:
    """Full ascending spectrum of a standard symmetric problem."""
    if backend == "jacobi":
        values, vectors = jacobi_eigh(m)
    elif backend == "lapack":
        values, vectors = np.linalg.eigh(m.array)
    else:
        raise ValueError(f"unknown eigen backend: {backend!r}")
    return _canonical_order(values, vectors)


def _dominant_index(column: np.ndarray) -> int:
    magnitudes = np.abs(column)
    return int(np.flatnonzero(magnitudes == magnitudes.max())[0])


def _canonical_order(values: np.ndarray, vectors: np.ndarray) -> EigPairs:
    """Sort ascending, order near-equal values by dominant component index, fix signs."""
    order = np.argsort(values, kind="stable")
    values = np.asarray(values, dtype=np.float64)[order]
    vectors = np.asarray(vectors, dtype=np.float64)[:, order]

    dominant = [_dominant_index(vectors[:, j]) for j in range(vectors.shape[1])]
    final: list[int] = []
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and abs(values[stop] - values[start]) <= TIE_TOLERANCE * max(1.0, abs(values[start])):
            stop += 1
        group = list(range(start, stop))
        group.sort(key=lambda j: (dominant[j], j))
        final.extend(group)
        start = stop

    values = values[final]
    vectors = vectors[:, final].copy()
    for j in range(vectors.shape[1]):
        idx = _dominant_index(vectors[:, j])
        if vectors[idx, j] < 0.0:
            vectors[:, j] = -vectors[:, j]
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigPairs(values=values, vectors=vectors)


def generalized_eig_smallest(
    lhs: SymMatrix,
    rhs: SymMatrix,
    l: int,
    *,
    backend: EigBackend = "lapack",
    shift: float | None = None,
) -> EigPairs:
    """The ``l`` algebraically smallest pairs of ``lhs @ a = lam * rhs @ a``.

    Vectors are rhs-orthonormal: ``A.T @ rhs @ A == I``.

    With ``shift`` set, ``lhs + shift * rhs`` must be positive definite and the
    pencil is inverted: the wanted pairs become the largest eigenvalues
    ``1 / (lam + shift)`` of a reduced matrix bounded by the wanted spectrum.
    Use it when ``lhs`` carries very large diagonal entries that would swamp
    the small eigenvalues of the direct reduction.
    """
    _check_same_order(lhs, rhs)
    if l < 1 or l > lhs.order:
        raise DimensionMismatch(f"requested {l} eigenpairs from a problem of order {lhs.order}")

    factor = cholesky(rhs)
    if shift is None:
        half = np.linalg.solve(factor, lhs.array)
        reduced = SymMatrix(np.linalg.solve(factor, half.T))
        standard = symmetric_eig(reduced, backend=backend)
        vectors = np.linalg.solve(factor.T, standard.vectors[:, :l])
        values = np.array(standard.values[:l])
    else:
        values, vectors = _inverted_smallest(lhs, rhs, l, float(shift), backend)
    if not np.all(np.isfinite(vectors)):
        raise NumericalInstability("generalized eigenvectors are not finite")

    for j in range(l):
        idx = _dominant_index(vectors[:, j])
        if vectors[idx, j] < 0.0:
            vectors[:, j] = -vectors[:, j]
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigPairs(values=values, vectors=vectors)


def _inverted_smallest(
    lhs: SymMatrix,
    rhs: SymMatrix,
    l: int,
    shift: float,
    backend: EigBackend,
) -> tuple[np.ndarray, np.ndarray]:
    pencil = cholesky(lhs + rhs.scaled(shift), pivot_floor=0.0)
    half = np.linalg.solve(pencil, rhs.array)
    # Negated so the ascending canonical order lists the largest inverted values first.
    reduced = SymMatrix(-np.linalg.solve(pencil, half.T))
    standard = symmetric_eig(reduced, backend=backend)
    inverted = -np.array(standard.values[:l])
    if not np.all(inverted > 0.0):
        raise NumericalInstability("shifted pencil produced a non-positive inverted eigenvalue")
    vectors = np.linalg.solve(pencil.T, standard.vectors[:, :l])
    # rhs-norms equal the inverted values in exact arithmetic.
    norms = np.sqrt(np.einsum("ij,ij->j", vectors, rhs.array @ vectors))
    vectors = vectors / norms[np.newaxis, :]
    return 1.0 / inverted - shift, vectors


def eig_residuals(lhs: SymMatrix, rhs: SymMatrix, pairs: EigPairs) -> np.ndarray:
    """Per-pair ``||lhs a - lam rhs a||_2``."""
    left = lhs.array @ pairs.vectors
    right = (rhs.array @ pairs.vectors) * pairs.values[np.newaxis, :]
    return np.linalg.norm(left - right, axis=0)


def orthonormality_error(rhs: SymMatrix, vectors: np.ndarray) -> float:
    """Max-abs deviation of ``A.T @ rhs @ A`` from the identity."""
    gram = vectors.T @ rhs.array @ vectors
    return float(np.max(np.abs(gram - np.eye(gram.shape[0])))) if gram.size else 0.0
