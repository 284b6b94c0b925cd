from __future__ import annotations

import time
import unittest

import numpy as np

from dfs_selector.core.errors import DegenerateClass, InvalidDataset
from dfs_selector.core.models import LabeledDataset
from dfs_selector.selection.scatter import compute_scatter, fisher_ratios, standardize


def _random_dataset(rng: np.random.Generator, n: int, d: int, c: int) -> LabeledDataset:
    labels = np.concatenate([np.arange(c), rng.integers(0, c, size=n - c)])
    return LabeledDataset(features=rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0, size=d), labels=labels, n_classes=c)


def _direct_sums(data: LabeledDataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = data.features
    mu = x.mean(axis=0)
    st = np.zeros((x.shape[1], x.shape[1]))
    for row in x:
        st += np.outer(row - mu, row - mu)
    sb = np.zeros_like(st)
    sw = np.zeros_like(st)
    for k in range(int(data.n_classes or 0)):
        block = x[data.labels == k]
        mu_k = block.mean(axis=0)
        sb += block.shape[0] * np.outer(mu_k - mu, mu_k - mu)
        for row in block:
            sw += np.outer(row - mu_k, row - mu_k)
    return st, sb, sw


class DatasetTests(unittest.TestCase):
    def test_dataset_rejects_missing_class(self) -> None:
        with self.assertRaises(DegenerateClass):
            LabeledDataset(features=np.ones((3, 2)), labels=[0, 0, 2])

    def test_dataset_rejects_non_finite_values(self) -> None:
        with self.assertRaises(InvalidDataset):
            LabeledDataset(features=np.array([[1.0], [np.inf]]), labels=[0, 1])

    def test_dataset_requires_two_classes(self) -> None:
        with self.assertRaises(InvalidDataset):
            LabeledDataset(features=np.ones((3, 2)), labels=[0, 0, 0])


class StandardizeTests(unittest.TestCase):
    def test_symmetric_column_uses_population_std(self) -> None:
        data = LabeledDataset(features=np.array([[1.0], [2.0], [3.0]]), labels=[0, 1, 1])
        standardized, params = standardize(data)
        sigma = np.sqrt(2.0 / 3.0)
        np.testing.assert_allclose(standardized.features[:, 0], np.array([-1.0, 0.0, 1.0]) / sigma, atol=1e-12)
        self.assertFalse(params.has_warnings)

    def test_standardize_is_idempotent(self) -> None:
        rng = np.random.default_rng(1)
        data = _random_dataset(rng, 30, 4, 3)
        once, _ = standardize(data)
        twice, _ = standardize(once)
        np.testing.assert_allclose(once.features.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(once.features.std(axis=0), 1.0, atol=1e-10)
        np.testing.assert_allclose(twice.features, once.features, atol=1e-10)

    def test_constant_column_is_centered_and_flagged(self) -> None:
        data = LabeledDataset(features=np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]), labels=[0, 1, 0])
        with self.assertLogs(level="WARNING"):
            standardized, params = standardize(data)
        np.testing.assert_array_equal(standardized.features[:, 0], [0.0, 0.0, 0.0])
        self.assertEqual(params.constant_features, (0,))
        self.assertTrue(params.has_warnings)

    def test_params_apply_to_held_out_rows(self) -> None:
        data = LabeledDataset(features=np.array([[0.0], [2.0], [4.0], [6.0]]), labels=[0, 0, 1, 1])
        _, params = standardize(data)
        np.testing.assert_allclose(params.apply(np.array([[3.0]])), [[0.0]])


class ScatterTests(unittest.TestCase):
    def test_hand_computed_one_dimensional_case(self) -> None:
        data = LabeledDataset(features=np.array([[-1.0], [1.0], [1.0], [3.0]]), labels=[0, 0, 1, 1])
        triple = compute_scatter(data)
        np.testing.assert_allclose(triple.sb.array, [[4.0]])
        np.testing.assert_allclose(triple.sw.array, [[4.0]])
        np.testing.assert_allclose(triple.st.array, [[8.0]])
        np.testing.assert_allclose(triple.total_mean, [1.0])
        np.testing.assert_allclose(triple.class_means, [[0.0], [2.0]])
        np.testing.assert_array_equal(triple.class_counts, [2, 2])

    def test_identical_samples_give_zero_scatter(self) -> None:
        data = LabeledDataset(features=np.full((4, 3), 5.0), labels=[0, 1, 0, 1])
        triple = compute_scatter(data)
        for matrix in (triple.st, triple.sb, triple.sw):
            np.testing.assert_array_equal(matrix.array, np.zeros((3, 3)))

    def test_matches_direct_sums(self) -> None:
        rng = np.random.default_rng(9)
        data = _random_dataset(rng, 20, 5, 3)
        triple = compute_scatter(data)
        st, sb, sw = _direct_sums(data)
        np.testing.assert_allclose(triple.st.array, st, atol=1e-10)
        np.testing.assert_allclose(triple.sb.array, sb, atol=1e-10)
        np.testing.assert_allclose(triple.sw.array, sw, atol=1e-10)
        self.assertLessEqual(triple.identity_gap(), 1e-10)

    def test_identity_holds_on_hundred_random_datasets(self) -> None:
        rng = np.random.default_rng(100)
        started = time.perf_counter()
        for _ in range(100):
            n = int(rng.integers(4, 51))
            d = int(rng.integers(1, 21))
            c = int(rng.integers(2, min(5, n) + 1))
            triple = compute_scatter(_random_dataset(rng, n, d, c))
            self.assertLessEqual(triple.identity_gap(), 1e-8 * max(1.0, triple.st.frobenius()))
            sb_values = np.linalg.eigvalsh(triple.sb.array)
            rank = int(np.sum(sb_values > 1e-8 * max(triple.sb.frobenius(), 1e-300)))
            self.assertLessEqual(rank, c - 1)
        self.assertLess(time.perf_counter() - started, 5.0)

    def test_sample_permutation_is_bit_identical(self) -> None:
        rng = np.random.default_rng(12)
        data = _random_dataset(rng, 25, 4, 3)
        order = rng.permutation(data.n_samples)
        shuffled = data.take_rows(order)
        first = compute_scatter(data)
        second = compute_scatter(shuffled)
        self.assertEqual(first.st.array.tobytes(), second.st.array.tobytes())
        self.assertEqual(first.sb.array.tobytes(), second.sb.array.tobytes())
        self.assertEqual(first.sw.array.tobytes(), second.sw.array.tobytes())

    def test_fisher_ratios_single_out_shifted_feature(self) -> None:
        rng = np.random.default_rng(4)
        labels = np.arange(100) % 2
        features = rng.normal(size=(100, 4))
        features[:, 2] += 3.0 * labels
        ratios = fisher_ratios(LabeledDataset(features=features, labels=labels))
        self.assertEqual(int(np.argmax(ratios)), 2)


if __name__ == "__main__":
    unittest.main()
