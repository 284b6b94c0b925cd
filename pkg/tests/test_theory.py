from __future__ import annotations

import time
import unittest

import numpy as np

from dfs_selector.core.errors import InvalidConfig, SingularWithinScatter, ZeroVector
from dfs_selector.core.linalg import SymMatrix
from dfs_selector.selection.theory import ldfs_objective, ldfs_objective_scaling_check, reweighting_inequality


def _random_scatter_pair(rng: np.random.Generator, d: int) -> tuple[SymMatrix, SymMatrix]:
    between = rng.normal(size=(d, 2))
    within = rng.normal(size=(d, d))
    return SymMatrix(between @ between.T), SymMatrix(within @ within.T + np.eye(d))


class ReweightingInequalityTests(unittest.TestCase):
    def test_equality_at_same_vector(self) -> None:
        a = np.array([0.3, -1.2, 2.0])
        for p in (0.1, 0.5, 1.0, 1.5, 2.0):
            self.assertTrue(reweighting_inequality(a, a, p))

    def test_p_two_cancels(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(20):
            self.assertTrue(reweighting_inequality(rng.normal(size=4), rng.normal(size=4), 2.0))

    def test_fuzz_hundred_thousand_triples(self) -> None:
        rng = np.random.default_rng(1)
        grid = (0.1, 0.5, 1.0, 1.5, 2.0)
        started = time.perf_counter()
        vectors = rng.normal(size=(100_000, 2, 3)) * np.exp(rng.uniform(-5, 5, size=(100_000, 2, 1)))
        for idx in range(100_000):
            p = grid[idx % len(grid)] if idx % 2 == 0 else float(rng.uniform(1e-3, 2.0))
            self.assertTrue(reweighting_inequality(vectors[idx, 0], vectors[idx, 1], p))
        self.assertLess(time.perf_counter() - started, 5.0)

    def test_rejects_zero_vector_and_bad_p(self) -> None:
        with self.assertRaises(ZeroVector):
            reweighting_inequality(np.zeros(3), np.ones(3), 1.0)
        with self.assertRaises(InvalidConfig):
            reweighting_inequality(np.ones(3), np.ones(3), 2.5)


class ScalingCheckTests(unittest.TestCase):
    def test_half_scaling_strictly_improves_with_penalty(self) -> None:
        rng = np.random.default_rng(2)
        sb, sw = _random_scatter_pair(rng, 5)
        a = rng.normal(size=(5, 2))
        j_a, j_ca = ldfs_objective_scaling_check(a, sb, sw, 0.3, 0.5)
        self.assertLess(j_ca, j_a)

    def test_no_penalty_means_invariance(self) -> None:
        rng = np.random.default_rng(3)
        sb, sw = _random_scatter_pair(rng, 4)
        a = rng.normal(size=(4, 2))
        j_a, j_ca = ldfs_objective_scaling_check(a, sb, sw, 0.0, 0.5)
        self.assertAlmostEqual(j_a, j_ca, places=10)

    def test_shrinking_toward_zero_over_hundred_instances(self) -> None:
        rng = np.random.default_rng(4)
        for _ in range(100):
            d = int(rng.integers(2, 8))
            sb, sw = _random_scatter_pair(rng, d)
            a = rng.normal(size=(d, int(rng.integers(1, d + 1))))
            gamma = float(rng.uniform(0.01, 5.0))
            previous = None
            for c_scale in (0.5, 0.1, 0.01):
                j_a, j_ca = ldfs_objective_scaling_check(a, sb, sw, gamma, c_scale)
                self.assertLess(j_ca, j_a)
                if previous is not None:
                    self.assertLess(j_ca, previous)
                previous = j_ca
            ratio_only = ldfs_objective(a, sb, sw, 0.0)
            self.assertGreater(previous, ratio_only)

    def test_sequence_approaches_ratio_term(self) -> None:
        rng = np.random.default_rng(5)
        sb, sw = _random_scatter_pair(rng, 4)
        a = rng.normal(size=(4, 2))
        limit = ldfs_objective(a, sb, sw, 0.0)
        values = [ldfs_objective_scaling_check(a, sb, sw, 1.0, c)[1] for c in (0.1, 0.01, 0.001)]
        self.assertTrue(values[0] > values[1] > values[2] > limit)
        self.assertLess(values[2] - limit, values[0] - limit)

    def test_errors(self) -> None:
        rng = np.random.default_rng(6)
        sb, sw = _random_scatter_pair(rng, 3)
        with self.assertRaises(InvalidConfig):
            ldfs_objective_scaling_check(np.ones((3, 1)), sb, sw, 1.0, 1.5)
        with self.assertRaises(ZeroVector):
            ldfs_objective_scaling_check(np.zeros((3, 1)), sb, sw, 1.0, 0.5)
        singular = SymMatrix(np.diag([1.0, 0.0, 0.0]))
        with self.assertRaises(SingularWithinScatter):
            ldfs_objective_scaling_check(np.array([[0.0], [1.0], [0.0]]), sb, singular, 1.0, 0.5)


if __name__ == "__main__":
    unittest.main()
