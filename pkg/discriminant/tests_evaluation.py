"""
Unit tests for fold plans, KNN, metrics, tuning and cross-validated evaluation.
"""
from unittest import TestCase

import numpy as np

from ._testing import loop_f1, loop_knn, random_labeled
from .datasets import LabeledDataset, MultiLabelDataset
from .evaluation import (
    FoldPlan,
    compute_metrics,
    evaluate_method,
    fit_projection,
    knn_predict,
    knn_predict_multilabel,
    split_folds,
    sweep_dimensions,
    tune_gamma,
)
from .exceptions import ClassTooSmallForFolds, ConfigError, TuningFailed
from .schema import Flavor, Method, MethodSpec, MixtureSpec, MultiLabelSpec, ParameterMode, ToyGenSpec
from .synthetic import generate_gaussian_mixture, generate_multilabel_synthetic, generate_nullspace_toy


class TestFolds(TestCase):
    """Test fold plans."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, points_per_class=17, dim=4))

    def test_one_per_class_per_fold(self):
        """Test five points per class over five folds put one of each class in every fold."""
        dataset = LabeledDataset(np.arange(20.0).reshape(2, 10), [1] * 5 + [2] * 5)
        plan = split_folds(dataset, 5, seed=0)
        for fold in range(5):
            self.assertEqual(sorted(dataset.labels[plan.test_indices(fold)].tolist()), [1, 2])

    def test_class_proportions(self):
        """Test each fold holds floor or ceil of n_k / F members of each class."""
        plan = split_folds(self.dataset, 5, seed=1)
        for fold in range(5):
            counts = np.bincount(self.dataset.labels[plan.test_indices(fold)], minlength=4)[1:]
            self.assertTrue(np.all((counts == 3) | (counts == 4)))

    def test_partition(self):
        """Test folds partition the points."""
        plan = split_folds(self.dataset, 5, seed=2)
        indices = np.sort(np.concatenate([plan.test_indices(f) for f in range(5)]))
        np.testing.assert_array_equal(indices, np.arange(self.dataset.n_points))

    def test_deterministic(self):
        """Test the same seed gives the same plan and other seeds differ."""
        first = split_folds(self.dataset, 5, seed=3)
        np.testing.assert_array_equal(first.assignments, split_folds(self.dataset, 5, seed=3).assignments)
        differing = [s for s in range(20) if not np.array_equal(
            split_folds(self.dataset, 5, seed=s).assignments, first.assignments)]
        self.assertGreater(len(differing), 0)

    def test_class_too_small(self):
        """Test a class smaller than the fold count is rejected."""
        dataset = LabeledDataset(np.arange(14.0).reshape(2, 7), [1] * 4 + [2] * 3)
        with self.assertRaises(ClassTooSmallForFolds) as ctx:
            split_folds(dataset, 4)
        self.assertEqual(ctx.exception.class_id, 2)


class TestKnn(TestCase):
    """Test KNN prediction rules."""

    def test_nearest_neighbour(self):
        """Test knn = 1 returns the nearest training label."""
        train = np.array([[0.0, 10.0]])
        predicted = knn_predict(train, [1, 2], np.array([[2.0, 7.0]]), knn=1)
        np.testing.assert_array_equal(predicted, [1, 2])

    def test_vote_tie_equal_distance(self):
        """Test a vote tie at equal distances goes to the smallest class id."""
        train = np.array([[-1.0, 1.0]])
        self.assertEqual(knn_predict(train, [2, 1], np.array([[0.0]]), knn=2)[0], 1)

    def test_vote_tie_nearest_member(self):
        """Test a vote tie goes to the class with the nearest member."""
        train = np.array([[1.0, -0.5]])
        self.assertEqual(knn_predict(train, [1, 2], np.array([[0.0]]), knn=2)[0], 2)

    def test_majority(self):
        """Test the majority beats a single nearer point."""
        train = np.array([[0.1, 1.0, 1.1]])
        self.assertEqual(knn_predict(train, [1, 2, 2], np.array([[0.0]]), knn=3)[0], 2)

    def test_matches_loop_reference(self):
        """Test predictions against a sorted-neighbour loop."""
        for seed in range(20):
            rng = np.random.default_rng(seed)
            train = rng.standard_normal((2, 60))
            labels = rng.integers(1, 5, size=60)
            test = rng.standard_normal((2, 15))
            knn = int(rng.integers(1, 8))
            np.testing.assert_array_equal(knn_predict(train, labels, test, knn),
                                          loop_knn(train, labels, test, knn))

    def test_knn_out_of_range(self):
        """Test knn larger than the training set is a configuration error."""
        with self.assertRaises(ConfigError):
            knn_predict(np.zeros((1, 2)), [1, 2], np.zeros((1, 1)), knn=3)

    def test_multilabel_unanimous(self):
        """Test labels carried by every neighbour are predicted."""
        train = np.array([[0.0, 0.1, 0.2]])
        indicator = np.array([[1, 1, 0], [1, 1, 0], [1, 1, 1]])
        predicted = knn_predict_multilabel(train, indicator, np.array([[0.0]]), knn=3)
        np.testing.assert_array_equal(predicted, [[1, 1, 0]])

    def test_multilabel_majority(self):
        """Test a label needs more than half of the neighbours."""
        train = np.array([[0.0, 0.1, 0.2]])
        indicator = np.array([[1, 0], [1, 0], [0, 1]])
        predicted = knn_predict_multilabel(train, indicator, np.array([[0.0]]), knn=3)
        np.testing.assert_array_equal(predicted, [[1, 0]])

    def test_multilabel_fallback(self):
        """Test the most frequent label is used when none has a majority."""
        train = np.array([[0.0, 0.1, 0.2, 0.3]])
        indicator = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 0]])
        predicted = knn_predict_multilabel(train, indicator, np.array([[0.0]]), knn=3)
        np.testing.assert_array_equal(predicted, [[1, 0, 0]])


class TestMetrics(TestCase):
    """Test accuracy and F1 scores."""

    def test_perfect(self):
        """Test perfect predictions score 1."""
        metrics = compute_metrics([1, 2, 3, 3], [1, 2, 3, 3], Flavor.SINGLE)
        self.assertEqual((metrics.accuracy, metrics.macro_f1, metrics.micro_f1), (1.0, 1.0, 1.0))

    def test_binary_confusion(self):
        """Test one of each confusion outcome gives precision = recall = F1 = 0.5."""
        metrics = compute_metrics([1, 2, 1, 2], [1, 1, 2, 2], Flavor.SINGLE)
        first = metrics.per_class[0]
        self.assertEqual((first.precision, first.recall, first.f1), (0.5, 0.5, 0.5))
        self.assertEqual(metrics.accuracy, 0.5)

    def test_micro_equals_accuracy(self):
        """Test single-label micro F1 equals accuracy."""
        for seed in range(50):
            rng = np.random.default_rng(seed)
            truth = rng.integers(1, 6, size=40)
            predicted = rng.integers(1, 6, size=40)
            metrics = compute_metrics(predicted, truth, Flavor.SINGLE)
            self.assertAlmostEqual(metrics.micro_f1, metrics.accuracy, places=12)

    def test_matches_loop_reference(self):
        """Test macro and micro F1 against hand-counted confusions."""
        for seed in range(20):
            rng = np.random.default_rng(seed)
            truth = rng.integers(1, 5, size=30)
            predicted = rng.integers(1, 6, size=30)
            macro, micro = loop_f1(predicted, truth)
            metrics = compute_metrics(predicted, truth, Flavor.SINGLE)
            self.assertAlmostEqual(metrics.macro_f1, macro, places=12)
            self.assertAlmostEqual(metrics.micro_f1, micro, places=12)

    def test_multilabel(self):
        """Test multi-label accuracy is the mean per-label binary accuracy."""
        truth = np.array([[1, 0], [1, 1], [0, 1]])
        predicted = np.array([[1, 0], [1, 0], [0, 1]])
        metrics = compute_metrics(predicted, truth, Flavor.MULTI)
        self.assertAlmostEqual(metrics.accuracy, 5 / 6)
        self.assertAlmostEqual(metrics.micro_f1, 2 * 3 / (2 * 3 + 0 + 1))
        self.assertAlmostEqual(metrics.macro_f1, (1.0 + 2 * 1 / (2 * 1 + 1)) / 2)


class TestTuning(TestCase):
    """Test training-only parameter tuning."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, points_per_class=15, dim=5, seed=2))
        self.spec = MethodSpec(method=Method.MCDA, gamma=ParameterMode.TUNE)

    def test_singleton_grid(self):
        """Test a one-value grid returns that value."""
        self.assertEqual(tune_gamma(self.dataset, 2, self.spec, [0.37]), 0.37)

    def test_value_from_grid(self):
        """Test the tuned gamma is a grid value and the extreme value does not win."""
        grid = [1e-2, 1.0, 1e10]
        gamma = tune_gamma(self.dataset, 2, self.spec, grid)
        self.assertIn(gamma, grid)
        self.assertNotEqual(gamma, 1e10)

    def test_all_grid_points_fail(self):
        """Test tuning fails when no grid value can be fit."""
        with self.assertRaises(TuningFailed):
            tune_gamma(self.dataset, 6, self.spec, [1.0, 2.0])

    def test_no_test_leakage(self):
        """Test corrupting the held-out fold leaves its tuned gamma unchanged."""
        spec = self.spec.model_copy(update={"grid": [1e-2, 1.0, 1e2]})
        plan = split_folds(self.dataset, 5, seed=0)
        features = self.dataset.features.copy()
        features[:, plan.test_indices(0)] = 1e3 * np.random.default_rng(0).standard_normal(
            (5, plan.test_indices(0).size))
        corrupted = self.dataset.with_features(features)
        clean = evaluate_method(self.dataset, spec, 2, plan)
        dirty = evaluate_method(corrupted, spec, 2, plan)
        self.assertEqual(clean.folds[0].gamma, dirty.folds[0].gamma)


class TestEvaluation(TestCase):
    """Test cross-validated evaluation."""

    def test_separable_clusters(self):
        """Test every method classifies far-separated clusters perfectly."""
        dataset = generate_nullspace_toy(ToyGenSpec(class_center_scale=10.0, noise_scale=0.01, seed=3))
        plan = split_folds(dataset, 5, seed=0)
        for method in Method:
            report = evaluate_method(dataset, MethodSpec(method=method), 2, plan)
            self.assertFalse(report.infeasible, method.value)
            self.assertEqual(report.mean.accuracy, 1.0, method.value)

    def test_shuffled_labels_near_chance(self):
        """Test permuted labels give roughly chance-level accuracy."""
        scores = []
        for seed in range(3):
            dataset = generate_gaussian_mixture(MixtureSpec(class_count=7, dim=10, seed=seed))
            labels = np.random.default_rng(seed).permutation(dataset.labels)
            shuffled = LabeledDataset(dataset.features, labels, 7)
            scores.append(evaluate_method(shuffled, MethodSpec(method=Method.LDA, seed=seed)).mean.accuracy)
        self.assertLess(abs(np.mean(scores) - 1 / 7), 0.15)

    def test_infeasible_method(self):
        """Test NLDA without a null space is reported infeasible."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=5))
        report = evaluate_method(dataset, MethodSpec(method=Method.NLDA))
        self.assertTrue(report.infeasible)
        self.assertTrue(report.infeasible_reason.startswith("NullSpaceAbsent"))
        self.assertIsNone(report.mean)

    def test_single_label_training_split(self):
        """Test a multi-label fold whose training split keeps one label marks the method infeasible."""
        features = np.random.default_rng(6).standard_normal((3, 10))
        indicator = np.zeros((10, 2), dtype=np.int64)
        indicator[:, 0] = 1
        indicator[0, 1] = 1
        dataset = MultiLabelDataset(features, indicator)
        plan = FoldPlan(fold_count=2, assignments=np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1]), seed=0)
        report = evaluate_method(dataset, MethodSpec(method=Method.PCA), 1, plan)
        self.assertTrue(report.infeasible)
        self.assertTrue(report.infeasible_reason.startswith("TrainingLabelsTooFew"))
        self.assertIsNone(report.mean)

    def test_point_order_invariance(self):
        """Test reordering points with their fold assignments leaves the metrics unchanged."""
        dataset = random_labeled(np.random.default_rng(4), 60, 5, 3)
        plan = split_folds(dataset, 5, seed=1)
        order = np.random.default_rng(5).permutation(dataset.n_points)
        permuted = dataset.subset(order)
        spec = MethodSpec(method=Method.LDA)
        before = evaluate_method(dataset, spec, 2, plan).mean
        after = evaluate_method(permuted, spec, 2, plan.permuted(order)).mean
        self.assertEqual((before.accuracy, before.macro_f1, before.micro_f1),
                         (after.accuracy, after.macro_f1, after.micro_f1))

    def test_parallel_matches_serial(self):
        """Test threaded fold evaluation gives the serial report."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=6, seed=7))
        spec = MethodSpec(method=Method.MCDA)
        serial = evaluate_method(dataset, spec)
        threaded = evaluate_method(dataset, spec, max_workers=3)
        self.assertEqual(serial.to_document(), threaded.to_document())

    def test_dimension_sweep(self):
        """Test the sweep keeps MCDA beyond K-1 and drops infeasible LDA rows."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=6, seed=1))
        specs = [MethodSpec(method=Method.MCDA), MethodSpec(method=Method.LDA)]
        reports = sweep_dimensions(dataset, specs, (1, 3))
        rows = [(r.method, r.k) for r in reports]
        self.assertIn((Method.MCDA, 3), rows)
        self.assertIn((Method.LDA, 2), rows)
        self.assertNotIn((Method.LDA, 3), rows)

    def test_multilabel(self):
        """Test MCDA runs on multi-label data and classical LDA does not."""
        dataset = generate_multilabel_synthetic(MultiLabelSpec(n=80, dim=8, seed=1))
        report = evaluate_method(dataset, MethodSpec(method=Method.MCDA), 3)
        self.assertEqual(report.flavor, Flavor.MULTI)
        self.assertGreater(report.mean.accuracy, 0.5)
        with self.assertRaises(ConfigError):
            fit_projection(dataset, 3, MethodSpec(method=Method.LDA))
