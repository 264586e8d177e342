"""
Unit tests for the MCDA objective, its gradient and the descent solver.
"""
import time
from unittest import TestCase

import numpy as np

from ._testing import (
    angle_grid,
    finite_difference_gradient,
    loop_objective,
    random_labeled,
    random_orthonormal,
)
from .datasets import LabeledDataset, as_multilabel
from .exceptions import (
    CoincidentClassMeans,
    ConfigError,
    InitRankExceeded,
    RankCollapse,
    SubspaceRankExceeded,
    WithinScatterDegenerate,
)
from .linalg import orthonormality_error, orthonormalize, principal_angles
from .scatter import dataset_scatter
from .schema import InitStrategy, MixtureSpec, SolverConfig, ToyGenSpec
from .solver import (
    MCDAObjective,
    default_gamma,
    initialize_projection,
    mcda_gradient,
    mcda_objective,
    solve_mcda,
)
from .synthetic import generate_gaussian_mixture, generate_nullspace_toy


class TestObjective(TestCase):
    """Test the objective value."""

    def setUp(self):
        """Create test dataset."""
        self.rng = np.random.default_rng(3)
        self.dataset = random_labeled(self.rng, 30, 10, 4)
        self.stats, self.scatter = dataset_scatter(self.dataset)

    def test_two_point_example(self):
        """Test two single-point classes at unit distance give J = 1."""
        dataset = LabeledDataset([[0.0, 1.0], [0.0, 0.0]], [1, 2])
        stats, scatter = dataset_scatter(dataset)
        self.assertAlmostEqual(mcda_objective(np.eye(2), stats, scatter, gamma=0.0), 1.0, places=14)
        self.assertAlmostEqual(mcda_objective(np.eye(2), stats, scatter, gamma=5.0), 1.0, places=14)

    def test_matches_dense_reference(self):
        """Test the rank-one evaluation against dense pair matrices."""
        G = random_orthonormal(self.rng, 10, 2)
        value = mcda_objective(G, self.stats, self.scatter, gamma=0.3)
        reference = loop_objective(G, self.dataset, gamma=0.3)
        self.assertLess(abs(value - reference) / reference, 1e-10)

    def test_rotation_invariance(self):
        """Test J(G Q) = J(G) for an orthogonal k x k Q."""
        G = random_orthonormal(self.rng, 10, 3)
        Q = random_orthonormal(self.rng, 3, 3)
        before = mcda_objective(G, self.stats, self.scatter, gamma=1.7)
        after = mcda_objective(G @ Q, self.stats, self.scatter, gamma=1.7)
        self.assertLess(abs(after - before) / before, 1e-12)

    def test_degenerate_pair_floored(self):
        """Test coincident projected means cost a finite penalty and are reported."""
        features = np.array([[0.0, 0.0, 3.0, 3.0, 0.0],
                             [0.0, 2.0, 0.0, 2.0, 1.0]])
        stats, scatter = dataset_scatter(LabeledDataset(features, [1, 1, 2, 2, 3]))
        objective = MCDAObjective(stats, scatter, gamma=1.0)
        self.assertTrue(np.isfinite(objective.value(np.eye(2))))
        self.assertEqual(objective.degenerate_pairs(np.eye(2)), [(1, 3)])


class TestGradient(TestCase):
    """Test the analytic gradient."""

    def test_two_class_closed_form(self):
        """Test the K = 2 gradient with zero within-class scatter."""
        dataset = LabeledDataset([[0.0, 0.0, 2.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.5]], [1, 1, 2])
        stats, scatter = dataset_scatter(dataset)
        G = np.array([[0.6, 0.0], [0.8, 0.0], [0.0, 1.0]])
        d = np.array([-2.0, -1.0, -0.5])
        trace = float(d @ G @ G.T @ d)
        expected = -2.0 * 2.0 * np.outer(d, d) @ G / trace ** 2
        np.testing.assert_allclose(mcda_gradient(G, stats, scatter, gamma=3.0), expected, rtol=1e-12, atol=1e-14)

    def test_finite_differences(self):
        """Test the gradient against central differences on random instances."""
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            dataset = random_labeled(rng, 30, 6, 4)
            stats, scatter = dataset_scatter(dataset)
            objective = MCDAObjective(stats, scatter, gamma=0.7)
            G = random_orthonormal(rng, 6, 2)

            analytic = objective.gradient(G)
            numeric = finite_difference_gradient(objective.value, G, step=1e-5)
            mask = np.abs(analytic) > max(1e-8, 1e-6 * np.abs(analytic).max())
            error = np.abs(numeric - analytic)[mask] / np.abs(analytic)[mask]
            self.assertLess(error.max(), 1e-5, f"seed {seed}")


class TestDefaultGamma(TestCase):
    """Test the balancing gamma."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = random_labeled(np.random.default_rng(5), 40, 5, 3)
        self.stats, self.scatter = dataset_scatter(self.dataset)

    def test_balances_identity(self):
        """Test both objective parts are equal at G = I."""
        gamma = default_gamma(self.stats, self.scatter)
        objective = MCDAObjective(self.stats, self.scatter, gamma)
        I = np.eye(5)
        within_part = gamma * objective.within_trace(I)
        self.assertLess(abs(within_part - objective.harmonic_part(I)) / within_part, 1e-12)

    def test_scaling(self):
        """Test scaling the data by c scales gamma by c^-4."""
        scaled = self.dataset.with_features(3.0 * self.dataset.features)
        gamma = default_gamma(self.stats, self.scatter)
        gamma_scaled = default_gamma(*dataset_scatter(scaled))
        self.assertLess(abs(gamma_scaled - gamma / 81.0) / gamma_scaled, 1e-10)

    def test_zero_within_scatter(self):
        """Test noiseless data has no balancing gamma."""
        dataset = generate_nullspace_toy(ToyGenSpec(noise_scale=0.0))
        with self.assertRaises(WithinScatterDegenerate):
            default_gamma(*dataset_scatter(dataset))

    def test_coincident_means(self):
        """Test coincident class means are named in the error."""
        features = np.array([[0.0, 0.0, 3.0, 3.0, 0.0, 0.0],
                             [0.0, 2.0, 0.0, 2.0, 0.5, 1.5]])
        dataset = LabeledDataset(features, [1, 1, 2, 2, 3, 3])
        with self.assertRaises(CoincidentClassMeans) as ctx:
            default_gamma(*dataset_scatter(dataset))
        self.assertEqual(ctx.exception.pairs, [(1, 3)])


class TestInitialization(TestCase):
    """Test starting projections and orthonormalization."""

    def setUp(self):
        """Create test dataset."""
        self.rng = np.random.default_rng(9)
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=10, seed=2))

    def test_random_is_orthonormal_and_seeded(self):
        """Test random starts are orthonormal and reproducible."""
        first = initialize_projection(self.dataset, 3, InitStrategy.RANDOM, seed=4)
        second = initialize_projection(self.dataset, 3, InitStrategy.RANDOM, seed=4)
        self.assertLess(orthonormality_error(first.matrix), 1e-10)
        np.testing.assert_array_equal(first.matrix, second.matrix)

    def test_provided_orthonormal_kept(self):
        """Test an orthonormal provided start is returned unchanged."""
        Q = random_orthonormal(self.rng, 10, 2)
        start = initialize_projection(self.dataset, 2, InitStrategy.PROVIDED, provided=Q)
        np.testing.assert_allclose(start.matrix, Q, atol=1e-12)

    def test_provided_wrong_shape(self):
        """Test a provided start of the wrong shape is a configuration error."""
        with self.assertRaises(ConfigError):
            initialize_projection(self.dataset, 2, InitStrategy.PROVIDED, provided=np.eye(10)[:, :3])

    def test_classical_lda_rank(self):
        """Test classical LDA start refuses k > K-1."""
        with self.assertRaises(InitRankExceeded):
            initialize_projection(self.dataset, 3, InitStrategy.CLASSICAL_LDA)

    def test_auto_beyond_class_rank(self):
        """Test auto falls back to the trace-ratio start when k > K-1."""
        start = initialize_projection(self.dataset, 4, InitStrategy.AUTO)
        self.assertEqual(start.subspace_dim, 4)
        self.assertLess(orthonormality_error(start.matrix), 1e-10)

    def test_classical_lda_beats_random(self):
        """Test the classical LDA start scores below the median random start."""
        stats, scatter = dataset_scatter(self.dataset)
        gamma = default_gamma(stats, scatter)
        lda = initialize_projection(self.dataset, 2, InitStrategy.CLASSICAL_LDA)
        randoms = [mcda_objective(initialize_projection(self.dataset, 2, InitStrategy.RANDOM, seed=s),
                                  stats, scatter, gamma) for s in range(20)]
        self.assertLessEqual(mcda_objective(lda, stats, scatter, gamma), np.median(randoms))

    def test_orthonormalize_scaled(self):
        """Test the polar factor of 5 Q is Q."""
        Q = random_orthonormal(self.rng, 6, 3)
        np.testing.assert_allclose(orthonormalize(5.0 * Q).matrix, Q, atol=1e-12)

    def test_orthonormalize_column_space(self):
        """Test orthonormalization keeps the column space."""
        M = self.rng.standard_normal((8, 3))
        polar = orthonormalize(M).matrix
        self.assertLess(orthonormality_error(polar), 1e-12)
        self.assertLess(principal_angles(polar, M).max(), 1e-8)

    def test_orthonormalize_rank_collapse(self):
        """Test a rank-deficient matrix is rejected."""
        M = self.rng.standard_normal((5, 1))
        with self.assertRaises(RankCollapse):
            orthonormalize(np.hstack([M, M]))


class TestSolver(TestCase):
    """Test the gradient-descent solver."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=6, seed=1))

    def test_report_consistency(self):
        """Test the report agrees with the returned projection."""
        projection, report = solve_mcda(self.dataset, 2)
        stats, scatter = dataset_scatter(self.dataset)
        self.assertLess(orthonormality_error(projection.matrix), 1e-10)
        self.assertEqual(report.final_objective, report.objective_trace[-1])
        self.assertEqual(report.initial_objective, report.objective_trace[0])
        value = mcda_objective(projection, stats, scatter, report.gamma)
        self.assertLess(abs(value - report.final_objective) / value, 1e-12)
        self.assertEqual(report.winning_start, 0)

    def test_monotone_trace(self):
        """Test accepted objective values never increase."""
        for seed in range(3):
            dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, dim=8, seed=seed))
            _, report = solve_mcda(dataset, 2, SolverConfig(init_strategy=InitStrategy.RANDOM, seed=seed))
            self.assertTrue(np.all(np.diff(report.objective_trace) <= 0))

    def test_grid_oracle(self):
        """Test one-dimensional projections of planar data reach the angular grid minimum."""
        grid = angle_grid(1800)
        for class_count in (2, 3):
            for seed in range(5):
                dataset = generate_gaussian_mixture(
                    MixtureSpec(class_count=class_count, points_per_class=20, dim=2, separation=3.0, seed=seed))
                config = SolverConfig(objective_tolerance=1e-12, restarts=24, seed=seed)
                _, report = solve_mcda(dataset, 1, config)

                objective = MCDAObjective(*dataset_scatter(dataset), report.gamma)
                oracle = min(objective.value(grid[:, [i]]) for i in range(grid.shape[1]))
                self.assertLessEqual(report.final_objective, oracle * (1 + 1e-3),
                                     f"K={class_count} seed={seed}")

    def test_restarts_never_worse(self):
        """Test extra random starts cannot raise the final objective."""
        _, single = solve_mcda(self.dataset, 2, SolverConfig(seed=3))
        _, several = solve_mcda(self.dataset, 2, SolverConfig(seed=3, restarts=4))
        self.assertLessEqual(several.final_objective, single.final_objective)
        self.assertIn(several.winning_start, range(5))

    def test_converges_in_high_dimension(self):
        """Test convergence on 4-class, 50-dimensional mixtures within 200 iterations."""
        for seed in range(5):
            dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, points_per_class=30, dim=50, seed=seed))
            started = time.perf_counter()
            _, report = solve_mcda(dataset, 3)
            self.assertLess(time.perf_counter() - started, 10.0)

            self.assertTrue(report.converged, f"seed {seed}")
            self.assertLessEqual(report.iterations_run, 200)
            last, previous = report.objective_trace[-1], report.objective_trace[-2]
            self.assertLessEqual(abs(last - previous) / previous, 1e-6)
            self.assertLessEqual(report.final_gradient_norm, 1e-3 * report.final_objective)

    def test_no_descent_left_at_exit(self):
        """Test short steps along the constrained gradient do not improve a converged solution."""
        for seed in range(5):
            dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, points_per_class=30, dim=50, seed=seed))
            projection, report = solve_mcda(dataset, 3)
            objective = MCDAObjective(*dataset_scatter(dataset), report.gamma)
            G = projection.matrix
            direction = objective.tangent_gradient(G)
            self.assertLessEqual(np.linalg.norm(direction), 1e-3 * report.final_objective)
            direction = direction / np.linalg.norm(direction)
            for step in (1e-3, 1e-2, 5e-2):
                moved = objective.value(orthonormalize(G - step * direction).matrix)
                self.assertGreaterEqual(moved, report.final_objective * (1 - 1e-4), f"seed {seed} step {step}")

    def test_snapping_every_step_agrees(self):
        """Test periodic and per-step orthonormalization end at the same objective value."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, points_per_class=30, dim=50, seed=0))
        _, periodic = solve_mcda(dataset, 3)
        _, every_step = solve_mcda(dataset, 3, SolverConfig(reorthonormalize_every=1))
        self.assertTrue(every_step.converged)
        self.assertLess(abs(periodic.final_objective - every_step.final_objective) / every_step.final_objective, 1e-3)

    def test_within_trace_falls_with_gamma(self):
        """Test a larger gamma never increases the projected within-class scatter."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=3, separation=3.0, seed=4))
        within = []
        for gamma in (1e-2, 1.0, 1e2):
            config = SolverConfig(gamma=gamma, objective_tolerance=1e-10, restarts=10, seed=4)
            within.append(solve_mcda(dataset, 2, config)[1].final_within_trace)
        self.assertLessEqual(within[1], within[0] * (1 + 1e-6))
        self.assertLessEqual(within[2], within[1] * (1 + 1e-6))

    def test_multilabel_one_hot_matches(self):
        """Test one-hot multi-label data yields the single-label solution."""
        config = SolverConfig(init_strategy=InitStrategy.RANDOM, seed=5)
        single, single_report = solve_mcda(self.dataset, 2, config)
        multi, multi_report = solve_mcda(as_multilabel(self.dataset), 2, config)
        self.assertLess(principal_angles(single.matrix, multi.matrix).max(), 1e-8)
        self.assertLess(abs(single_report.final_objective - multi_report.final_objective)
                        / single_report.final_objective, 1e-10)

    def test_subspace_larger_than_dimension(self):
        """Test k > p is rejected."""
        with self.assertRaises(SubspaceRankExceeded):
            solve_mcda(self.dataset, 7)

    def test_explicit_gamma_on_noiseless_data(self):
        """Test noiseless data runs with an explicit gamma and keeps classes apart."""
        dataset = generate_nullspace_toy(ToyGenSpec(noise_scale=0.0))
        projection, report = solve_mcda(dataset, 2, SolverConfig(gamma=1.0))
        self.assertEqual(report.final_within_trace, 0.0)
        self.assertGreater(report.final_min_pair_distance, 0.0)
        self.assertEqual(report.degenerate_pairs, [])
