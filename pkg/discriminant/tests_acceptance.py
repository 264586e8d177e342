"""
End-to-end checks of the evaluation protocol on synthetic data.
"""
import time
from unittest import TestCase

import numpy as np

from .baselines import solve_nlda
from .evaluation import benchmark, evaluate_method, split_folds
from .scatter import dataset_scatter, min_pair_distance, pairwise_between_view
from .schema import Method, MethodSpec, MixtureSpec, MultiLabelSpec, ToyGenSpec
from .solver import solve_mcda
from .synthetic import generate_gaussian_mixture, generate_multilabel_synthetic, generate_nullspace_toy


class TestNullSpaceToy(TestCase):
    """Test MCDA against null-space LDA on the toy data."""

    def test_mcda_keeps_classes_apart(self):
        """Test NLDA collapses within-class scatter while MCDA separates the closest pair further."""
        for seed in range(5):
            dataset = generate_nullspace_toy(ToyGenSpec(seed=seed))
            stats, scatter = dataset_scatter(dataset)
            view = pairwise_between_view(stats)

            nlda = solve_nlda(dataset, 2).matrix
            mcda, _ = solve_mcda(dataset, 2)
            self.assertLessEqual(float(np.trace(nlda.T @ scatter.within @ nlda)), 1e-8)
            self.assertGreater(min_pair_distance(view, mcda.matrix), min_pair_distance(view, nlda), f"seed {seed}")


class TestMixtures(TestCase):
    """Test classification accuracy at the separation extremes."""

    def test_well_separated(self):
        """Test classes twenty noise widths apart are classified perfectly."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, dim=10, separation=20.0, seed=2))
        plan = split_folds(dataset, 5, seed=2)
        for method in (Method.MCDA, Method.LDA, Method.PCA):
            report = evaluate_method(dataset, MethodSpec(method=method), fold_plan=plan)
            self.assertEqual(report.mean.accuracy, 1.0, method.value)

    def test_coincident_centers(self):
        """Test classes with a shared center score near chance."""
        scores = []
        for seed in range(10):
            dataset = generate_gaussian_mixture(
                MixtureSpec(class_count=4, points_per_class=50, dim=5, separation=0.0, seed=seed))
            scores.append(evaluate_method(dataset, MethodSpec(method=Method.PCA, seed=seed), k=2).mean.accuracy)
        self.assertLess(abs(np.mean(scores) - 0.25), 0.15)

    def test_mcda_matches_lda(self):
        """Test MCDA accuracy is not below classical LDA on seven-class, 50-dimensional mixtures over 10 seeds."""
        started = time.perf_counter()
        mcda, lda = [], []
        for seed in range(10):
            dataset = generate_gaussian_mixture(MixtureSpec(class_count=7, points_per_class=30, dim=50, seed=seed))
            plan = split_folds(dataset, 5, seed=seed)
            reports = benchmark(dataset, [MethodSpec(method=Method.MCDA, knn=3, seed=seed),
                                          MethodSpec(method=Method.LDA, knn=3, seed=seed)], k=6, fold_plan=plan)
            mcda.append(reports[0].mean.accuracy)
            lda.append(reports[1].mean.accuracy)
        self.assertGreaterEqual(np.mean(mcda), np.mean(lda) - 0.02)
        self.assertLess(time.perf_counter() - started, 120.0)


class TestMultiLabelBenchmark(TestCase):
    """Test the multi-label benchmark path."""

    def test_supported_methods(self):
        """Test MCDA and PCA both evaluate on multi-label data."""
        dataset = generate_multilabel_synthetic(MultiLabelSpec(n=100, dim=10, seed=3))
        reports = benchmark(dataset, [MethodSpec(method=Method.MCDA), MethodSpec(method=Method.PCA)], k=3)
        for report in reports:
            self.assertFalse(report.infeasible)
            self.assertEqual(len(report.folds), 5)
            self.assertGreaterEqual(report.mean.micro_f1, 0.0)
