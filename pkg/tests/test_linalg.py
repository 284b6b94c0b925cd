from __future__ import annotations

import math
import unittest

import numpy as np

from dfs_selector.core.errors import DimensionMismatch, NotPositiveDefinite
from dfs_selector.core.linalg import (
    SymMatrix,
    cholesky,
    eig_residuals,
    generalized_eig_smallest,
    jacobi_eigh,
    orthonormality_error,
    symmetric_eig,
)


def _random_spd(rng: np.random.Generator, n: int) -> SymMatrix:
    base = rng.normal(size=(n, n))
    return SymMatrix(base @ base.T + n * np.eye(n))


def _random_symmetric(rng: np.random.Generator, n: int) -> SymMatrix:
    base = rng.normal(size=(n, n))
    return SymMatrix(base + base.T)


def _reference_smallest(lhs: SymMatrix, rhs: SymMatrix, l: int) -> np.ndarray:
    factor = np.linalg.cholesky(rhs.array)
    inverse = np.linalg.inv(factor)
    reduced = inverse @ lhs.array @ inverse.T
    values, _ = jacobi_eigh(0.5 * (reduced + reduced.T))
    return np.sort(values)[:l]


class SymMatrixTests(unittest.TestCase):
    def test_construction_enforces_exact_symmetry(self) -> None:
        raw = np.array([[1.0, 2.0], [2.0 + 1e-15, 3.0]])
        matrix = SymMatrix(raw)
        self.assertEqual(matrix.array[0, 1], matrix.array[1, 0])
        self.assertFalse(matrix.array.flags.writeable)

    def test_rejects_non_square_and_non_finite(self) -> None:
        with self.assertRaises(DimensionMismatch):
            SymMatrix(np.ones((2, 3)))
        with self.assertRaises(Exception):
            SymMatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class CholeskyTests(unittest.TestCase):
    def test_identity_factor_is_identity(self) -> None:
        np.testing.assert_array_equal(cholesky(SymMatrix.identity(3)), np.eye(3))

    def test_two_by_two_factor(self) -> None:
        factor = cholesky(SymMatrix(np.array([[4.0, 2.0], [2.0, 3.0]])))
        np.testing.assert_allclose(factor, [[2.0, 0.0], [1.0, math.sqrt(2.0)]], atol=1e-12)
        np.testing.assert_allclose(factor @ factor.T, [[4.0, 2.0], [2.0, 3.0]], atol=1e-12)

    def test_indefinite_matrix_is_rejected(self) -> None:
        with self.assertRaises(NotPositiveDefinite):
            cholesky(SymMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])))


class JacobiTests(unittest.TestCase):
    def test_matches_lapack_spectrum(self) -> None:
        rng = np.random.default_rng(3)
        matrix = _random_symmetric(rng, 7)
        values, vectors = jacobi_eigh(matrix)
        np.testing.assert_allclose(np.sort(values), np.linalg.eigvalsh(matrix.array), atol=1e-10)
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(7), atol=1e-10)

    def test_converges_on_scaled_random_matrices(self) -> None:
        rng = np.random.default_rng(41)
        for trial in range(50):
            order = int(rng.integers(2, 13))
            for scale in (100.0, 1e-6):
                matrix = _random_symmetric(rng, order).scaled(scale)
                values, vectors = jacobi_eigh(matrix)
                expected = np.linalg.eigvalsh(matrix.array)
                np.testing.assert_allclose(
                    np.sort(values), expected, atol=1e-10 * matrix.frobenius(), err_msg=f"trial {trial} scale {scale}"
                )
                np.testing.assert_allclose(vectors.T @ vectors, np.eye(order), atol=1e-10)

    def test_backends_agree_after_canonical_ordering(self) -> None:
        rng = np.random.default_rng(5)
        matrix = _random_symmetric(rng, 6)
        lapack = symmetric_eig(matrix, backend="lapack")
        jacobi = symmetric_eig(matrix, backend="jacobi")
        np.testing.assert_allclose(lapack.values, jacobi.values, atol=1e-10)
        np.testing.assert_allclose(lapack.vectors, jacobi.vectors, atol=1e-8)


class GeneralizedEigTests(unittest.TestCase):
    def test_diagonal_problem(self) -> None:
        pairs = generalized_eig_smallest(SymMatrix.diag([3.0, 1.0, 2.0]), SymMatrix.identity(3), 2)
        np.testing.assert_allclose(pairs.values, [1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(pairs.vectors[:, 0], [0.0, 1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(pairs.vectors[:, 1], [0.0, 0.0, 1.0], atol=1e-12)

    def test_scaling_rhs_halves_eigenvalues(self) -> None:
        rng = np.random.default_rng(11)
        lhs = _random_symmetric(rng, 5)
        unit = generalized_eig_smallest(lhs, SymMatrix.identity(5), 3)
        doubled = generalized_eig_smallest(lhs, SymMatrix.identity(5).scaled(2.0), 3)
        np.testing.assert_allclose(doubled.values, unit.values / 2.0, atol=1e-10)
        np.testing.assert_allclose(doubled.vectors, unit.vectors / math.sqrt(2.0), atol=1e-10)
        self.assertLess(orthonormality_error(SymMatrix.identity(5).scaled(2.0), doubled.vectors), 1e-8)

    def test_residuals_and_orthonormality_on_random_pair(self) -> None:
        rng = np.random.default_rng(17)
        lhs = _random_symmetric(rng, 6)
        rhs = _random_spd(rng, 6)
        for backend in ("lapack", "jacobi"):
            pairs = generalized_eig_smallest(lhs, rhs, 3, backend=backend)
            residuals = eig_residuals(lhs, rhs, pairs)
            self.assertTrue(np.all(residuals <= 1e-8 * max(1.0, lhs.frobenius())), backend)
            self.assertLess(orthonormality_error(rhs, pairs.vectors), 1e-8)
            self.assertTrue(np.all(np.diff(pairs.values) >= 0.0))
            np.testing.assert_allclose(pairs.values, _reference_smallest(lhs, rhs, 3), rtol=1e-9, atol=1e-12)

    def test_reference_equivalence_over_fifty_pairs(self) -> None:
        rng = np.random.default_rng(2024)
        for trial in range(50):
            n = int(rng.integers(2, 13))
            l = int(rng.integers(1, n + 1))
            base = _random_symmetric(rng, n)
            shift = abs(float(np.linalg.eigvalsh(base.array)[0])) + 1.0
            lhs = base.with_ridge(shift)
            rhs = _random_spd(rng, n)
            pairs = generalized_eig_smallest(lhs, rhs, l)
            reference = _reference_smallest(lhs, rhs, l)
            np.testing.assert_allclose(pairs.values, reference, rtol=1e-9, err_msg=f"trial {trial}")

    def test_shifted_pencil_matches_direct_reduction(self) -> None:
        rng = np.random.default_rng(29)
        for trial in range(20):
            n = int(rng.integers(2, 11))
            l = int(rng.integers(1, n + 1))
            lhs = _random_symmetric(rng, n)
            rhs = _random_spd(rng, n)
            direct = generalized_eig_smallest(lhs, rhs, l)
            shift = max(0.0, -float(direct.values[0])) + 1.0
            inverted = generalized_eig_smallest(lhs, rhs, l, shift=shift)
            np.testing.assert_allclose(inverted.values, direct.values, rtol=1e-9, atol=1e-10, err_msg=f"trial {trial}")
            self.assertLess(orthonormality_error(rhs, inverted.vectors), 1e-9)
            residuals = eig_residuals(lhs, rhs, inverted)
            self.assertTrue(np.all(residuals <= 1e-9 * max(1.0, lhs.frobenius())), f"trial {trial}")

    def test_shifted_pencil_with_heavy_diagonal(self) -> None:
        rng = np.random.default_rng(37)
        between = rng.normal(size=(12, 2))
        within = rng.normal(size=(12, 30))
        sb = SymMatrix(between @ between.T)
        rhs = SymMatrix(sb.array + within @ within.T + 1e-3 * np.eye(12))
        weights = np.concatenate([np.ones(4), np.full(8, 1e8)])
        lhs = SymMatrix.diag(weights).scaled(0.1) - sb
        pairs = generalized_eig_smallest(lhs, rhs, 2, shift=1.0)
        self.assertLess(orthonormality_error(rhs, pairs.vectors), 1e-10)
        self.assertTrue(np.all(eig_residuals(lhs, rhs, pairs) <= 1e-10 * lhs.frobenius()))
        heavy = np.linalg.norm(pairs.vectors[4:], axis=1)
        light = np.linalg.norm(pairs.vectors[:4], axis=1)
        self.assertLess(float(heavy.max()), 1e-4 * float(light.max()))
        direct = generalized_eig_smallest(lhs, rhs, 2)
        np.testing.assert_allclose(pairs.values, direct.values, atol=1e-6)

    def test_shift_must_make_the_pencil_definite(self) -> None:
        with self.assertRaises(NotPositiveDefinite):
            generalized_eig_smallest(SymMatrix.diag([-2.0, 1.0]), SymMatrix.identity(2), 1, shift=1.0)

    def test_repeated_calls_are_bit_identical(self) -> None:
        rng = np.random.default_rng(23)
        lhs = _random_symmetric(rng, 8)
        rhs = _random_spd(rng, 8)
        first = generalized_eig_smallest(lhs, rhs, 4)
        second = generalized_eig_smallest(lhs, rhs, 4)
        self.assertEqual(first.values.tobytes(), second.values.tobytes())
        self.assertEqual(first.vectors.tobytes(), second.vectors.tobytes())

    def test_degenerate_values_follow_dominant_component_order(self) -> None:
        pairs = generalized_eig_smallest(SymMatrix.diag([1.0, 1.0, 5.0]), SymMatrix.identity(3), 2)
        np.testing.assert_allclose(pairs.values, [1.0, 1.0])
        self.assertEqual(int(np.argmax(np.abs(pairs.vectors[:, 0]))), 0)
        self.assertEqual(int(np.argmax(np.abs(pairs.vectors[:, 1]))), 1)
        self.assertGreater(pairs.vectors[0, 0], 0.0)

    def test_invalid_requests(self) -> None:
        with self.assertRaises(DimensionMismatch):
            generalized_eig_smallest(SymMatrix.identity(3), SymMatrix.identity(2), 1)
        with self.assertRaises(DimensionMismatch):
            generalized_eig_smallest(SymMatrix.identity(3), SymMatrix.identity(3), 4)
        with self.assertRaises(NotPositiveDefinite):
            generalized_eig_smallest(SymMatrix.identity(2), SymMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])), 1)


if __name__ == "__main__":
    unittest.main()
