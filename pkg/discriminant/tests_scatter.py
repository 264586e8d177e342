"""
Unit tests for datasets, class statistics and scatter matrices.
"""
import time
from unittest import TestCase

import numpy as np

from ._testing import loop_class_means, loop_scatter, random_labeled, random_multilabel
from .datasets import LabeledDataset, MultiLabelDataset, as_multilabel
from .exceptions import (
    EmptyClass,
    InsufficientClasses,
    InvalidDataset,
    InvalidLabel,
    MalformedIndicator,
    NonFiniteFeatures,
    UnlabeledRow,
)
from .scatter import (
    compute_class_stats,
    dataset_scatter,
    min_pair_distance,
    pairwise_arithmetic_objective,
    pairwise_between_view,
)


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class TestDatasets(TestCase):
    """Test dataset construction and validation."""

    def test_empty_class(self):
        """Test a class id with no members is rejected."""
        with self.assertRaises(EmptyClass) as ctx:
            LabeledDataset(np.zeros((2, 3)), [1, 3, 3])
        self.assertEqual(ctx.exception.class_id, 2)

    def test_zero_label(self):
        """Test label 0 is not a class id."""
        with self.assertRaises(InvalidLabel):
            LabeledDataset(np.zeros((2, 3)), [0, 1, 2])

    def test_non_finite_features(self):
        """Test NaN features are rejected."""
        features = np.zeros((2, 3))
        features[1, 2] = np.nan
        with self.assertRaises(NonFiniteFeatures):
            LabeledDataset(features, [1, 2, 2])

    def test_single_point(self):
        """Test a dataset needs two points."""
        with self.assertRaises(InvalidDataset):
            LabeledDataset(np.zeros((2, 1)), [1])

    def test_unlabeled_row(self):
        """Test an all-zero indicator row is rejected."""
        with self.assertRaises(UnlabeledRow) as ctx:
            MultiLabelDataset(np.zeros((2, 3)), [[1, 0], [0, 0], [0, 1]])
        self.assertEqual(ctx.exception.row, 2)

    def test_non_binary_indicator(self):
        """Test indicator entries must be 0 or 1."""
        with self.assertRaises(MalformedIndicator):
            MultiLabelDataset(np.zeros((2, 2)), [[1, 0], [0, 2]])

    def test_read_only(self):
        """Test stored arrays cannot be modified."""
        dataset = LabeledDataset(np.zeros((2, 3)), [1, 2, 2])
        self.assertFalse(dataset.features.flags.writeable)
        self.assertFalse(dataset.labels.flags.writeable)

    def test_one_hot_indicator(self):
        """Test the indicator of single-label data is one-hot."""
        dataset = LabeledDataset(np.zeros((1, 3)), [2, 1, 2])
        np.testing.assert_array_equal(dataset.indicator, [[0, 1], [1, 0], [0, 1]])


class TestClassStats(TestCase):
    """Test counts and means."""

    def setUp(self):
        """Create test datasets."""
        self.rng = np.random.default_rng(7)

    def test_hand_example(self):
        """Test means of a small one-dimensional example."""
        stats = compute_class_stats(LabeledDataset([[0.0, 2.0, 10.0]], [1, 1, 2]))
        np.testing.assert_array_equal(stats.counts, [2, 1])
        np.testing.assert_allclose(stats.class_means, [[1.0, 10.0]])
        np.testing.assert_allclose(stats.global_mean, [4.0])

    def test_matches_loop_reference(self):
        """Test means against point-by-point accumulation."""
        for dataset in (random_labeled(self.rng, 40, 6, 4), random_multilabel(self.rng, 40, 6, 4)):
            counts, means, global_mean = loop_class_means(dataset)
            stats = compute_class_stats(dataset)
            np.testing.assert_array_equal(stats.counts, counts)
            np.testing.assert_allclose(stats.class_means, means, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(stats.global_mean, global_mean, rtol=1e-12, atol=1e-12)

    def test_identical_points_mean(self):
        """Test a class of identical points has that point as its mean exactly."""
        point = np.array([0.1, 0.7, 1.3])
        features = np.column_stack([point] * 10 + [point + 5.0] * 7)
        dataset = LabeledDataset(features, [1] * 10 + [2] * 7)
        stats, scatter = dataset_scatter(dataset)
        np.testing.assert_array_equal(stats.class_means[:, 0], point)
        self.assertTrue(np.all(scatter.within == 0))

    def test_multilabel_total_weight(self):
        """Test multi-label counts add up to label occurrences."""
        dataset = MultiLabelDataset(np.zeros((1, 3)), [[1, 0], [1, 1], [0, 1]])
        stats = compute_class_stats(dataset)
        self.assertEqual(stats.total_weight, 4.0)


class TestScatter(TestCase):
    """Test scatter matrices and their identities."""

    def setUp(self):
        """Create test datasets."""
        self.rng = np.random.default_rng(11)

    def test_hand_example(self):
        """Test S_b, S_w and S_t of a small example."""
        _, scatter = dataset_scatter(LabeledDataset([[0.0, 2.0, 10.0]], [1, 1, 2]))
        np.testing.assert_allclose(scatter.within, [[2.0]])
        np.testing.assert_allclose(scatter.between, [[54.0]])
        np.testing.assert_allclose(scatter.total, [[56.0]])

    def test_multilabel_hand_example(self):
        """Test label-weighted scatter of a small multi-label example."""
        dataset = MultiLabelDataset([[0.0, 2.0, 4.0]], [[1, 0], [1, 1], [0, 1]])
        stats, scatter = dataset_scatter(dataset)
        np.testing.assert_allclose(stats.class_means, [[1.0, 3.0]])
        np.testing.assert_allclose(stats.global_mean, [2.0])
        np.testing.assert_allclose(scatter.within, [[4.0]])
        np.testing.assert_allclose(scatter.between, [[4.0]])

    def test_additivity_and_pairwise_identity(self):
        """Test S_b + S_w = S_t and n S_b = sum n_k1 n_k2 B_k1k2 on 100 random instances."""
        started = time.perf_counter()
        for seed in range(100):
            rng = np.random.default_rng(seed)
            class_count = int(rng.integers(2, 9))
            n = int(rng.integers(class_count, 201))
            p = int(rng.integers(1, 51))
            stats, scatter = dataset_scatter(random_labeled(rng, n, p, class_count))
            self.assertLess(relative_error(scatter.between + scatter.within, scatter.total), 1e-10, f"seed {seed}")

            view = pairwise_between_view(stats)
            summed = (view.differences * view.weights) @ view.differences.T
            self.assertLess(relative_error(summed, n * scatter.between), 1e-8, f"seed {seed}")
        self.assertLess(time.perf_counter() - started, 5.0)

    def test_matches_loop_reference(self):
        """Test scatter against explicit outer products."""
        for dataset in (random_labeled(self.rng, 30, 5, 3), random_multilabel(self.rng, 30, 5, 3)):
            reference = loop_scatter(dataset)
            _, scatter = dataset_scatter(dataset)
            self.assertLess(relative_error(scatter.within, reference["within"]), 1e-10)
            self.assertLess(relative_error(scatter.between, reference["between"]), 1e-10)

    def test_symmetric_psd(self):
        """Test scatter matrices are symmetric and positive semidefinite."""
        _, scatter = dataset_scatter(random_labeled(self.rng, 25, 8, 4))
        for matrix in (scatter.between, scatter.within, scatter.total):
            np.testing.assert_array_equal(matrix, matrix.T)
            self.assertGreaterEqual(np.linalg.eigvalsh(matrix).min(), -1e-10 * np.abs(matrix).max())

    def test_pairwise_identity(self):
        """Test sum of weighted pairwise scatter equals total weight times S_b."""
        for dataset in (random_labeled(self.rng, 60, 6, 5), random_multilabel(self.rng, 60, 6, 5)):
            stats, scatter = dataset_scatter(dataset)
            view = pairwise_between_view(stats)
            summed = sum(w * np.outer(d, d) for _, d, w in view)
            self.assertLess(relative_error(summed, stats.total_weight * scatter.between), 1e-10)
            np.testing.assert_allclose(summed, loop_scatter(dataset)["pairwise"], rtol=1e-10, atol=1e-8)

    def test_translation_invariance(self):
        """Test shifting every point leaves the scatter matrices unchanged."""
        dataset = random_labeled(self.rng, 40, 4, 3)
        shifted = dataset.with_features(dataset.features + 100.0 * self.rng.standard_normal((4, 1)))
        _, before = dataset_scatter(dataset)
        _, after = dataset_scatter(shifted)
        self.assertLess(relative_error(after.within, before.within), 1e-10)
        self.assertLess(relative_error(after.between, before.between), 1e-10)

    def test_single_class(self):
        """Test one class gives S_b = 0 and S_w = S_t."""
        dataset = LabeledDataset(self.rng.standard_normal((3, 10)), np.ones(10, dtype=int))
        stats, scatter = dataset_scatter(dataset)
        self.assertLess(np.abs(scatter.between).max(), 1e-12)
        self.assertLess(relative_error(scatter.within, scatter.total), 1e-12)
        with self.assertRaises(InsufficientClasses):
            pairwise_between_view(stats)

    def test_multilabel_reduction(self):
        """Test one-hot multi-label data reproduces single-label scatter."""
        dataset = random_labeled(self.rng, 45, 5, 4)
        _, single = dataset_scatter(dataset)
        _, multi = dataset_scatter(as_multilabel(dataset))
        for name in ("between", "within", "total"):
            self.assertLess(relative_error(getattr(multi, name), getattr(single, name)), 1e-12)


class TestPairwiseView(TestCase):
    """Test the rank-one pairwise view."""

    def setUp(self):
        """Create test dataset."""
        features = np.array([[0.0, 0.0, 3.0, 3.0, 0.0],
                             [0.0, 2.0, 0.0, 2.0, 1.0]])
        self.stats = compute_class_stats(LabeledDataset(features, [1, 1, 2, 2, 3]))
        self.view = pairwise_between_view(self.stats)

    def test_pairs_and_weights(self):
        """Test pair order and n_k1 n_k2 weights."""
        self.assertEqual(self.view.pairs, ((1, 2), (1, 3), (2, 3)))
        np.testing.assert_allclose(self.view.weights, [4.0, 2.0, 2.0])

    def test_coincident_means(self):
        """Test classes sharing a mean give a zero pair trace."""
        np.testing.assert_allclose(self.view.difference(1, 3), [0.0, 0.0])
        self.assertEqual(min_pair_distance(self.view, np.eye(2)), 0.0)

    def test_projected_traces(self):
        """Test Tr(G^T B G) of every pair for an axis projection."""
        G = np.array([[1.0], [0.0]])
        np.testing.assert_allclose(self.view.projected_traces(G), [9.0, 0.0, 9.0])
        self.assertAlmostEqual(pairwise_arithmetic_objective(self.view, G), 4 * 9.0 + 2 * 9.0)

    def test_materialize(self):
        """Test the dense pair matrix is the outer product of the difference."""
        np.testing.assert_allclose(self.view.materialize(1, 2), [[9.0, 0.0], [0.0, 0.0]])
