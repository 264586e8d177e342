"""
Unit tests for the LDA comparison family and PCA.
"""
from unittest import TestCase

import numpy as np
import scipy.linalg

from ._testing import angle_grid, random_orthonormal
from .baselines import (
    solve_classical_lda,
    solve_nlda,
    solve_pca,
    solve_trace_ratio,
    solve_unified_lda,
    trace_ratio_from_scatter,
    trace_ratio_value,
)
from .datasets import LabeledDataset
from .exceptions import NullSpaceAbsent, NullSpaceTooSmall, SubspaceRankExceeded
from .linalg import orthonormality_error, principal_angles
from .scatter import ScatterSet, dataset_scatter
from .schema import Flavor, MixtureSpec, ToyGenSpec, UnifiedLdaConfig, UnifiedVariant
from .synthetic import generate_gaussian_mixture, generate_nullspace_toy


def projected_trace(G, matrix):
    return float(np.trace(G.T @ matrix @ G))


class TestClassicalLda(TestCase):
    """Test classical LDA."""

    def setUp(self):
        """Create test dataset."""
        self.rng = np.random.default_rng(21)
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, dim=8, separation=3.0, seed=6))

    def test_isotropic_direction(self):
        """Test two classes with isotropic scatter project onto the mean difference."""
        pattern = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]])
        features = np.hstack([pattern, pattern + np.array([[5.0], [3.0]])])
        dataset = LabeledDataset(features, [1] * 4 + [2] * 4)
        G = solve_classical_lda(dataset, 1).matrix
        self.assertLess(principal_angles(G, np.array([[5.0], [3.0]])).max(), 1e-6)

    def test_beats_random_subspaces(self):
        """Test the LDA subspace has a higher between / within trace ratio than random ones."""
        _, scatter = dataset_scatter(self.dataset)
        G = solve_classical_lda(self.dataset, 3).matrix
        ratio = projected_trace(G, scatter.between) / projected_trace(G, scatter.within)
        for _ in range(50):
            R = random_orthonormal(self.rng, 8, 3)
            self.assertGreaterEqual(ratio, projected_trace(R, scatter.between) / projected_trace(R, scatter.within))

    def test_rotation_equivariance(self):
        """Test rotating the data rotates the LDA subspace."""
        Q = random_orthonormal(self.rng, 8, 8)
        G = solve_classical_lda(self.dataset, 3).matrix
        rotated = solve_classical_lda(self.dataset.with_features(Q @ self.dataset.features), 3).matrix
        self.assertLess(principal_angles(rotated, Q @ G).max(), 1e-8)

    def test_translation_invariance(self):
        """Test shifting the data leaves the LDA subspace unchanged."""
        G = solve_classical_lda(self.dataset, 3).matrix
        shifted = self.dataset.with_features(self.dataset.features + 50.0)
        self.assertLess(principal_angles(solve_classical_lda(shifted, 3).matrix, G).max(), 1e-8)

    def test_rank_limit(self):
        """Test k > K-1 is infeasible."""
        with self.assertRaises(SubspaceRankExceeded):
            solve_classical_lda(self.dataset, 4)

    def test_zero_within_scatter_fallback(self):
        """Test noiseless data falls back to the top eigenvectors of S_b with a note."""
        projection = solve_classical_lda(generate_nullspace_toy(ToyGenSpec(noise_scale=0.0)), 2)
        self.assertLess(orthonormality_error(projection.matrix), 1e-10)
        self.assertEqual(len(projection.notes), 1)


class TestNullSpaceLda(TestCase):
    """Test null-space LDA."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = generate_nullspace_toy(ToyGenSpec(seed=0))
        _, self.scatter = dataset_scatter(self.dataset)

    def test_zero_projected_within(self):
        """Test the projection lies in the null space of S_w."""
        G = solve_nlda(self.dataset, 2).matrix
        self.assertLessEqual(projected_trace(G, self.scatter.within), 1e-8 * np.trace(self.scatter.within))

    def test_classes_collapse(self):
        """Test same-class points project onto one point."""
        projected = solve_nlda(self.dataset, 2).transform(self.dataset.features)
        labels = self.dataset.labels
        spread = max(np.ptp(projected[:, labels == c], axis=1).max() for c in (1, 2, 3))
        means = np.column_stack([projected[:, labels == c].mean(axis=1) for c in (1, 2, 3)])
        separation = np.ptp(means, axis=1).max()
        self.assertLessEqual(spread, 1e-6 * separation)

    def test_maximizes_between_in_null_space(self):
        """Test Tr(G^T S_b G) is the sum of the top eigenvalues of S_b restricted to null(S_w)."""
        G = solve_nlda(self.dataset, 2).matrix
        N = scipy.linalg.null_space(self.scatter.within, rcond=1e-10)
        top = np.sort(np.linalg.eigvalsh(N.T @ self.scatter.between @ N))[::-1][:2].sum()
        self.assertLess(abs(projected_trace(G, self.scatter.between) - top) / top, 1e-8)

    def test_no_null_space(self):
        """Test n - K >= p leaves no null space."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, dim=10))
        with self.assertRaises(NullSpaceAbsent) as ctx:
            solve_nlda(dataset, 2)
        self.assertEqual(ctx.exception.bound, 10 - (90 - 3))

    def test_null_space_too_small(self):
        """Test k above the null-space dimension is infeasible."""
        dataset = generate_nullspace_toy(ToyGenSpec(points_per_class=12, ambient_dim=35))
        with self.assertRaises(NullSpaceTooSmall):
            solve_nlda(dataset, 3)


class TestTraceRatio(TestCase):
    """Test the iterative trace-ratio method."""

    def test_noiseless_ratio_is_one(self):
        """Test zero within-class scatter gives ratio 1."""
        dataset = generate_nullspace_toy(ToyGenSpec(noise_scale=0.0))
        projection, report = solve_trace_ratio(dataset, 2)
        _, scatter = dataset_scatter(dataset)
        self.assertAlmostEqual(report.lambda_trace[-1], 1.0, places=10)
        self.assertAlmostEqual(trace_ratio_value(projection, scatter), 1.0, places=10)
        self.assertTrue(report.converged)

    def test_rejected_iterate_is_not_converged(self):
        """Test a vanishing denominator keeps the previous iterate and reports no convergence."""
        between = np.diag([1.0, 0.0, 0.0])
        within = np.diag([1.0, 0.0, 0.0])
        scatter = ScatterSet(between=between, within=within, total=between + within, flavor=Flavor.SINGLE)
        projection, report = trace_ratio_from_scatter(scatter, 1)
        self.assertFalse(report.converged)
        self.assertEqual(len(report.notes), 1)
        self.assertIn("vanishing denominator", report.notes[0])
        self.assertEqual(report.lambda_trace, [0.5])
        self.assertAlmostEqual(abs(projection.matrix[0, 0]), 1.0, places=12)

    def test_lambda_non_decreasing(self):
        """Test the ratio sequence never decreases and stays in [0, 1]."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=5, dim=12, seed=8))
        _, report = solve_trace_ratio(dataset, 3)
        self.assertTrue(np.all(np.diff(report.lambda_trace) >= -1e-12))
        self.assertTrue(all(0.0 <= value <= 1.0 for value in report.lambda_trace))

    def test_grid_oracle(self):
        """Test one-dimensional projections of planar data reach the angular grid maximum."""
        grid = angle_grid(1800)
        for seed in range(5):
            dataset = generate_gaussian_mixture(
                MixtureSpec(class_count=3, points_per_class=20, dim=2, separation=2.0, seed=seed))
            _, scatter = dataset_scatter(dataset)
            projection, report = solve_trace_ratio(dataset, 1)
            best = max(trace_ratio_value(grid[:, [i]], scatter) for i in range(grid.shape[1]))
            self.assertGreaterEqual(trace_ratio_value(projection, scatter), best - 1e-3)

    def test_null_space_instances(self):
        """Test the iteration drives projected within-class scatter to zero when a null space exists."""
        for seed in range(5):
            dataset = generate_nullspace_toy(ToyGenSpec(seed=seed))
            _, scatter = dataset_scatter(dataset)
            G = solve_trace_ratio(dataset, 2)[0].matrix
            self.assertLessEqual(projected_trace(G, scatter.within), 1e-6 * projected_trace(G, scatter.total))


class TestUnifiedLda(TestCase):
    """Test the generalized LDA framework and PCA."""

    def setUp(self):
        """Create test dataset."""
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=4, dim=9, seed=13))
        _, self.scatter = dataset_scatter(self.dataset)

    def test_ocm(self):
        """Test OCM captures the top eigenvalues of S_b."""
        G = solve_unified_lda(self.dataset, 3, UnifiedLdaConfig(variant=UnifiedVariant.OCM)).matrix
        top = np.sort(np.linalg.eigvalsh(self.scatter.between))[::-1][:3].sum()
        self.assertLess(orthonormality_error(G), 1e-10)
        self.assertLess(abs(projected_trace(G, self.scatter.between) - top) / top, 1e-10)

    def test_olda_orthonormal(self):
        """Test OLDA columns are orthonormal."""
        projection = solve_unified_lda(self.dataset, 3, UnifiedLdaConfig(variant=UnifiedVariant.OLDA))
        self.assertTrue(projection.constrained)
        self.assertLess(orthonormality_error(projection.matrix), 1e-10)

    def test_ulda_uncorrelated(self):
        """Test ULDA features are uncorrelated: G^T S_t G is diagonal."""
        projection = solve_unified_lda(self.dataset, 3, UnifiedLdaConfig(variant=UnifiedVariant.ULDA))
        self.assertFalse(projection.constrained)
        inner = projection.matrix.T @ self.scatter.total @ projection.matrix
        off_diagonal = inner - np.diag(np.diag(inner))
        self.assertLess(np.abs(off_diagonal).max(), 1e-8 * np.abs(inner).max())

    def test_rlda_approaches_ocm(self):
        """Test a growing mu turns RLDA into OCM."""
        ocm = solve_unified_lda(self.dataset, 3, UnifiedLdaConfig(variant=UnifiedVariant.OCM)).matrix
        scale = np.linalg.norm(self.scatter.total, 2)
        angles = []
        for factor in (1e2, 1e4, 1e6):
            config = UnifiedLdaConfig(variant=UnifiedVariant.RLDA, mu=factor * scale)
            angles.append(principal_angles(solve_unified_lda(self.dataset, 3, config).matrix, ocm).max())
        self.assertGreater(angles[0], angles[1])
        self.assertGreater(angles[1], angles[2])
        self.assertLessEqual(angles[2], 1e-3)

    def test_rank_limit(self):
        """Test k above rank(S_b) is infeasible."""
        for variant in UnifiedVariant:
            with self.assertRaises(SubspaceRankExceeded):
                solve_unified_lda(self.dataset, 4, UnifiedLdaConfig(variant=variant))

    def test_qr_flag_forced(self):
        """Test OLDA always and ULDA never applies QR."""
        self.assertTrue(UnifiedLdaConfig(variant=UnifiedVariant.OLDA, apply_qr=False).apply_qr)
        self.assertFalse(UnifiedLdaConfig(variant=UnifiedVariant.ULDA, apply_qr=True).apply_qr)

    def test_pca(self):
        """Test PCA captures the top eigenvalues of S_t."""
        G = solve_pca(self.dataset, 2).matrix
        top = np.sort(np.linalg.eigvalsh(self.scatter.total))[::-1][:2].sum()
        self.assertLess(abs(projected_trace(G, self.scatter.total) - top) / top, 1e-10)
