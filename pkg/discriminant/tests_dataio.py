"""
Unit tests for CSV input/output, reports and the synthetic generators.
"""
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
import pandas as pd

from .baselines import solve_pca, solve_unified_lda
from .dataio import (
    dump_projection,
    load_csv,
    load_projection_matrix,
    read_report,
    save_csv,
    save_projection_matrix,
    write_report,
)
from .exceptions import (
    ConfigError,
    DataError,
    DataFileError,
    EmptyClass,
    InvalidLabel,
    MalformedIndicator,
    MissingLabel,
    NonNumericFeature,
    RowLengthMismatch,
    UnlabeledRow,
)
from .linalg import null_space
from .scatter import dataset_scatter
from .schema import Flavor, MixtureSpec, MultiLabelSpec, SolverReport, ToyGenSpec, UnifiedLdaConfig, UnifiedVariant
from .synthetic import (
    generate_gaussian_mixture,
    generate_multilabel_synthetic,
    generate_nullspace_toy,
    parse_generator_spec,
)


class TestCsvFiles(TestCase):
    """Test dataset files."""

    def setUp(self):
        """Create test directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text: str) -> Path:
        path = self.dir / "data.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_single_label_round_trip(self):
        """Test features and labels survive a write and read exactly."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, points_per_class=5, dim=4, seed=1))
        save_csv(dataset, self.dir / "mixture.csv")
        loaded = load_csv(self.dir / "mixture.csv")
        self.assertEqual(loaded.flavor, Flavor.SINGLE)
        np.testing.assert_array_equal(loaded.features, dataset.features)
        np.testing.assert_array_equal(loaded.labels, dataset.labels)

    def test_multilabel_round_trip(self):
        """Test indicator files survive a write and read exactly."""
        dataset = generate_multilabel_synthetic(MultiLabelSpec(n=30, dim=3, seed=2))
        save_csv(dataset, self.dir / "multi.csv")
        loaded = load_csv(self.dir / "multi.csv")
        self.assertEqual(loaded.flavor, Flavor.MULTI)
        np.testing.assert_array_equal(loaded.features, dataset.features)
        np.testing.assert_array_equal(loaded.indicator, dataset.indicator)

    def test_header_columns(self):
        """Test written headers use x_j and label columns."""
        dataset = generate_gaussian_mixture(MixtureSpec(class_count=2, points_per_class=3, dim=2))
        save_csv(dataset, self.dir / "out.csv")
        self.assertEqual(list(pd.read_csv(self.dir / "out.csv").columns), ["x_1", "x_2", "label"])

    def test_missing_file(self):
        """Test a missing file is a data file error."""
        with self.assertRaises(DataFileError):
            load_csv(self.dir / "absent.csv")

    def test_too_many_fields(self):
        """Test a row with an extra field reports its row number."""
        path = self.write("x_1,x_2,label\n1,2,1\n3,4,2\n5,6,7,1\n")
        with self.assertRaises(RowLengthMismatch) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 3)

    def test_too_few_fields(self):
        """Test a short row is rejected with its row number."""
        path = self.write("x_1,x_2,label\n1,2,1\n3,4,2\n5,6\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 3)

    def test_non_numeric_feature(self):
        """Test a non-numeric feature names its row and column."""
        path = self.write("x_1,x_2,label\n1,2,1\n3,abc,2\n")
        with self.assertRaises(NonNumericFeature) as ctx:
            load_csv(path)
        self.assertEqual((ctx.exception.row, ctx.exception.column), (2, "x_2"))

    def test_missing_label(self):
        """Test an empty label cell is reported."""
        path = self.write("x_1,label\n1,1\n2,\n3,2\n")
        with self.assertRaises(MissingLabel) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 2)

    def test_invalid_labels(self):
        """Test zero, fractional, text and non-ASCII digit labels are rejected."""
        for bad in ("0", "1.5", "x", "²", "١"):
            path = self.write(f"x_1,label\n1,1\n2,{bad}\n3,2\n")
            with self.assertRaises(InvalidLabel) as ctx:
                load_csv(path)
            self.assertEqual(ctx.exception.row, 2)

    def test_empty_class(self):
        """Test a skipped class id is reported."""
        path = self.write("x_1,label\n1,1\n2,3\n3,3\n")
        with self.assertRaises(EmptyClass) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.class_id, 2)

    def test_malformed_indicator(self):
        """Test indicator cells other than 0 and 1 are rejected."""
        path = self.write("x_1,label_1,label_2\n1,1,0\n2,0,2\n")
        with self.assertRaises(MalformedIndicator) as ctx:
            load_csv(path)
        self.assertEqual((ctx.exception.row, ctx.exception.column), (2, "label_2"))

    def test_unlabeled_row(self):
        """Test an all-zero indicator row is rejected."""
        path = self.write("x_1,label_1,label_2\n1,1,0\n2,0,0\n3,0,1\n")
        with self.assertRaises(UnlabeledRow) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 2)

    def test_empty_indicator_column(self):
        """Test an indicator column with no members is rejected."""
        path = self.write("x_1,label_1,label_2\n1,1,0\n2,1,0\n")
        with self.assertRaises(EmptyClass) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.class_id, 2)


class TestProjectionFiles(TestCase):
    """Test projection dumps and stored matrices."""

    def setUp(self):
        """Create test dataset and directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.dataset = generate_gaussian_mixture(MixtureSpec(class_count=3, points_per_class=8, dim=5, seed=4))

    def tearDown(self):
        self.tmp.cleanup()

    def test_dump_shape_and_values(self):
        """Test the dump has n rows of k coordinates plus the label."""
        projection = solve_pca(self.dataset, 2)
        dump_projection(self.dataset, projection, self.dir / "dump.csv")
        frame = pd.read_csv(self.dir / "dump.csv")
        self.assertEqual(list(frame.columns), ["dim_1", "dim_2", "label"])
        self.assertEqual(len(frame), self.dataset.n_points)
        expected = projection.matrix.T @ self.dataset.features
        np.testing.assert_allclose(frame[["dim_1", "dim_2"]].to_numpy().T, expected, rtol=1e-12, atol=1e-12)

    def test_matrix_round_trip(self):
        """Test a stored orthonormal matrix reloads as a constrained projection."""
        projection = solve_pca(self.dataset, 3)
        save_projection_matrix(projection, self.dir / "projection.csv")
        loaded = load_projection_matrix(self.dir / "projection.csv")
        self.assertTrue(loaded.constrained)
        np.testing.assert_array_equal(loaded.matrix, projection.matrix)

    def test_unconstrained_matrix(self):
        """Test a non-orthonormal matrix reloads as unconstrained."""
        projection = solve_unified_lda(self.dataset, 2, UnifiedLdaConfig(variant=UnifiedVariant.ULDA))
        save_projection_matrix(projection, self.dir / "ulda.csv")
        self.assertFalse(load_projection_matrix(self.dir / "ulda.csv").constrained)

    def test_report_round_trip(self):
        """Test report floats survive serialization exactly."""
        report = SolverReport(objective_trace=[1 / 3, 0.1 + 0.2], final_objective=0.1 + 0.2,
                              final_within_trace=2 / 7, final_min_pair_distance=1e-300,
                              gamma=np.float64(0.7), initial_objective=1 / 3)
        write_report(report, self.dir / "report.json")
        document = read_report(self.dir / "report.json")
        self.assertEqual(document["objective_trace"], [1 / 3, 0.1 + 0.2])
        self.assertEqual(document["final_min_pair_distance"], 1e-300)
        self.assertEqual(document["gamma"], 0.7)


class TestGenerators(TestCase):
    """Test the synthetic generators."""

    def test_noiseless_toy(self):
        """Test noiseless toy points sit on their class centers."""
        dataset = generate_nullspace_toy(ToyGenSpec(noise_scale=0.0))
        _, scatter = dataset_scatter(dataset)
        self.assertTrue(np.all(scatter.within == 0))

    def test_noiseless_toy_needs_null_space(self):
        """Test the noiseless toy refuses n - K >= p."""
        with self.assertRaises(ConfigError):
            generate_nullspace_toy(ToyGenSpec(noise_scale=0.0, ambient_dim=20))

    def test_toy_null_dimension(self):
        """Test the default toy has a null space of dimension p - (n - K)."""
        _, scatter = dataset_scatter(generate_nullspace_toy())
        self.assertEqual(null_space(scatter.within).shape[1], 40 - (30 - 3))

    def test_mixture_shape_and_seed(self):
        """Test mixture size and reproducibility."""
        spec = MixtureSpec(class_count=4, points_per_class=6, dim=3, seed=9)
        first, second = generate_gaussian_mixture(spec), generate_gaussian_mixture(spec)
        self.assertEqual(first.features.shape, (3, 24))
        np.testing.assert_array_equal(first.features, second.features)

    def test_multilabel_properties(self):
        """Test every label is used and enough rows carry several labels."""
        for seed in range(5):
            dataset = generate_multilabel_synthetic(MultiLabelSpec(seed=seed))
            self.assertTrue(np.all(dataset.indicator.sum(axis=0) > 0))
            self.assertGreaterEqual(dataset.multi_label_fraction(), 0.3)

    def test_parse_spec(self):
        """Test generator specs parse into their models."""
        spec = parse_generator_spec("mixture:classes=7,dim=50,seed=3")
        self.assertEqual((spec.class_count, spec.dim, spec.seed), (7, 50, 3))
        self.assertEqual(parse_generator_spec("toy", default_seed=12).seed, 12)
        self.assertEqual(parse_generator_spec("multilabel:labels=5,seed=1", default_seed=12).seed, 1)

    def test_parse_spec_errors(self):
        """Test unknown kinds, unknown keys and invalid values are configuration errors."""
        for text in ("blobs", "mixture:colour=3", "mixture:classes", "toy:classes=0"):
            with self.assertRaises(ConfigError):
                parse_generator_spec(text)
