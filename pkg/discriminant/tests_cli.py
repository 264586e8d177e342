"""
Unit tests for the bench command line.
"""
import json
import logging
import sys
import tempfile
from pathlib import Path
from unittest import TestCase

from click.testing import CliRunner

from mcdabench.logging_config import setup_logging

from .cli import cli
from .dataio import save_csv
from .schema import MixtureSpec
from .synthetic import generate_gaussian_mixture

SEPARABLE = "mixture:classes=3,points=20,dim=6,separation=20"


class CliTestCase(TestCase):
    def setUp(self):
        """Create test runner and directory."""
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()
        logging.getLogger().handlers.clear()

    def invoke(self, *args):
        return self.runner.invoke(cli, [str(a) for a in args])

    def read(self, name):
        return json.loads((self.dir / name).read_text())


class TestFit(CliTestCase):
    """Test the fit and transform commands."""

    def test_fit_mcda(self):
        """Test fitting MCDA writes a projection and a converged report."""
        result = self.invoke("fit", "--generate", "toy", "--method", "mcda", "--gamma", "auto",
                             "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 0, result.output)
        report = self.read("run/report.json")
        self.assertEqual(report["method"], "mcda")
        self.assertEqual(report["k"], 2)
        self.assertTrue(report["solver"]["converged"])
        self.assertTrue((self.dir / "run" / "projection.csv").exists())

    def test_transform(self):
        """Test a fitted projection can be applied to the same data."""
        data = self.dir / "data.csv"
        save_csv(generate_gaussian_mixture(MixtureSpec(class_count=3, points_per_class=10, dim=4)), data)
        self.assertEqual(self.invoke("fit", "--data", data, "--method", "lda", "--out", self.dir / "run").exit_code, 0)
        result = self.invoke("transform", "--data", data, "--projection", self.dir / "run" / "projection.csv",
                             "--out", self.dir / "dump.csv")
        self.assertEqual(result.exit_code, 0, result.output)
        header = (self.dir / "dump.csv").read_text().splitlines()[0]
        self.assertEqual(header, "dim_1,dim_2,label")

    def test_nlda_without_null_space(self):
        """Test NLDA on data without a null space exits with code 4."""
        result = self.invoke("fit", "--generate", "mixture:classes=3,dim=5", "--method", "nlda",
                             "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 4)
        self.assertIn("NullSpaceAbsent", result.output)

    def test_lda_rank_exceeded(self):
        """Test LDA with k > K-1 exits with code 4."""
        result = self.invoke("fit", "--generate", "mixture:classes=3,dim=5", "--method", "lda", "--k", 3,
                             "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 4)
        self.assertIn("SubspaceRankExceeded", result.output)

    def test_missing_data_file(self):
        """Test a missing data file exits with code 3."""
        result = self.invoke("fit", "--data", self.dir / "absent.csv", "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 3)
        self.assertIn("DataFileError", result.output)

    def test_superscript_label(self):
        """Test a non-ASCII digit label exits with code 3 and names the row."""
        data = self.dir / "data.csv"
        data.write_text("x_1,label\n1.0,1\n2.0,²\n3.0,2\n", encoding="utf-8")
        result = self.invoke("fit", "--data", data, "--method", "pca", "--k", 1, "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 3)
        self.assertIn("InvalidLabel", result.output)
        self.assertIn("row 2", result.output)

    def test_conflicting_sources(self):
        """Test giving both --data and --generate is a configuration error."""
        result = self.invoke("fit", "--data", self.dir / "x.csv", "--generate", "toy", "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 2)

    def test_bad_gamma(self):
        """Test a negative gamma is a usage error."""
        result = self.invoke("fit", "--generate", "toy", "--gamma", "-1", "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 2)

    def test_unknown_generator(self):
        """Test an unknown generator is a configuration error."""
        result = self.invoke("fit", "--generate", "blobs", "--out", self.dir / "run")
        self.assertEqual(result.exit_code, 2)
        self.assertIn("ConfigError", result.output)


class TestEvaluate(CliTestCase):
    """Test the evaluate and benchmark commands."""

    def test_separable_comparison(self):
        """Test MCDA and LDA both classify separable data perfectly."""
        result = self.invoke("evaluate", "--generate", SEPARABLE, "--method", "mcda", "--method", "lda",
                             "--out", self.dir / "report.json")
        self.assertEqual(result.exit_code, 0, result.output)
        reports = self.read("report.json")["reports"]
        self.assertEqual([r["method"] for r in reports], ["mcda", "lda"])
        self.assertEqual([r["mean"]["accuracy"] for r in reports], [1.0, 1.0])

    def test_deterministic_reports(self):
        """Test identical invocations write identical reports."""
        for name in ("a.json", "b.json"):
            result = self.invoke("evaluate", "--generate", "mixture:classes=3,dim=5", "--method", "mcda",
                                 "--seed", 7, "--out", self.dir / name)
            self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual((self.dir / "a.json").read_bytes(), (self.dir / "b.json").read_bytes())

    def test_dimension_table(self):
        """Test a dimension sweep lists LDA only up to K-1."""
        result = self.invoke("evaluate", "--generate", "mixture:classes=3,dim=5", "--method", "mcda",
                             "--method", "lda", "--dims", "1..3", "--out", self.dir / "sweep.json")
        self.assertEqual(result.exit_code, 0, result.output)
        rows = {(row["method"], row["k"]) for row in self.read("sweep.json")["table"]}
        self.assertEqual(rows, {("mcda", 1), ("mcda", 2), ("mcda", 3), ("lda", 1), ("lda", 2)})

    def test_single_infeasible_method(self):
        """Test a single infeasible method writes its report and exits with code 4."""
        result = self.invoke("evaluate", "--generate", "mixture:classes=3,dim=5", "--method", "nlda",
                             "--out", self.dir / "report.json")
        self.assertEqual(result.exit_code, 4)
        self.assertTrue(self.read("report.json")["infeasible"])

    def test_bad_dimension_range(self):
        """Test a malformed --dims value is a usage error."""
        result = self.invoke("evaluate", "--generate", "toy", "--dims", "3..1", "--out", self.dir / "r.json")
        self.assertEqual(result.exit_code, 2)

    def test_fixed_mu(self):
        """Test --mu reaches every RLDA fold in evaluate and benchmark."""
        for command in ("evaluate", "benchmark"):
            result = self.invoke(command, "--generate", SEPARABLE, "--method", "rlda", "--mu", "0.5",
                                 "--out", self.dir / f"{command}.json")
            self.assertEqual(result.exit_code, 0, result.output)
            document = self.read(f"{command}.json")
            report = document["reports"][0] if "reports" in document else document
            self.assertEqual([fold["mu"] for fold in report["folds"]], [0.5] * 5)

    def test_bad_mu(self):
        """Test a non-positive --mu is a usage error."""
        result = self.invoke("evaluate", "--generate", "toy", "--method", "rlda", "--mu", "0",
                             "--out", self.dir / "r.json")
        self.assertEqual(result.exit_code, 2)

    def test_benchmark_reports_infeasible(self):
        """Test the benchmark keeps infeasible methods in its report."""
        result = self.invoke("benchmark", "--generate", "mixture:classes=3,dim=5", "--method", "lda",
                             "--method", "nlda", "--out", self.dir / "bench.json")
        self.assertEqual(result.exit_code, 0, result.output)
        reports = self.read("bench.json")["reports"]
        self.assertEqual([r["infeasible"] for r in reports], [False, True])


class TestDemoToy(CliTestCase):
    """Test the null-space toy demonstration."""

    def test_demo_summary(self):
        """Test NLDA zeroes the projected within scatter and MCDA keeps classes further apart."""
        result = self.invoke("demo-toy", "--seed", 0, "--out", self.dir / "demo")
        self.assertEqual(result.exit_code, 0, result.output)
        summary = {m["method"]: m for m in self.read("demo/summary.json")["methods"]}
        self.assertLessEqual(summary["nlda"]["within_trace"], 1e-8)
        self.assertGreater(summary["mcda"]["min_pair_distance"], summary["nlda"]["min_pair_distance"])
        for method in ("pca", "lda", "nlda", "mcda"):
            header = (self.dir / "demo" / f"{method}.csv").read_text().splitlines()[0]
            self.assertEqual(header, "dim_1,dim_2,label")


class TestLoggingSetup(CliTestCase):
    """Test the logging configuration used by every command."""

    def test_levels(self):
        """Test package and dependency loggers get their levels and output goes to stderr."""
        setup_logging(logging.DEBUG)
        self.assertEqual(logging.getLogger("discriminant").level, logging.DEBUG)
        for name in ("sklearn", "joblib"):
            self.assertEqual(logging.getLogger(name).level, logging.WARNING)
        handler = logging.getLogger().handlers[0]
        self.assertIs(handler.stream, sys.stderr)
