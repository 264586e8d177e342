"""
Command-line front end.

    bench fit       --data X.csv --method mcda --out run/
    bench transform --data X.csv --projection run/projection.csv --out dump.csv
    bench evaluate  --generate mixture:classes=7 --method mcda --method lda --out report.json
    bench benchmark --data X.csv --out reports.json
    bench demo-toy  --seed 0 --out demo/

Artifacts are written only to --out paths; logs go to standard error.
Errors print `ErrorName: message` on standard error and exit with the
error family's code (2 config, 3 data, 4 infeasible, 5 numerical).
"""
import functools
import logging
import math
import re
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
from pydantic import ValidationError

from mcdabench import settings
from mcdabench.logging_config import setup_logging

from .baselines import solve_classical_lda, solve_nlda, solve_pca
from .dataio import dump_projection, load_csv, load_projection_matrix, save_projection_matrix, write_report
from .datasets import Dataset
from .evaluation import benchmark as run_benchmark
from .evaluation import evaluate_method, fit_projection, split_folds, sweep_dimensions
from .exceptions import ConfigError, DiscriminantError, InvalidProjection
from .scatter import dataset_scatter, min_pair_distance, pairwise_arithmetic_objective
from .schema import (
    DemoSummary,
    FitReport,
    Flavor,
    Method,
    MethodSpec,
    MethodSummary,
    MULTI_LABEL_METHODS,
    ParameterMode,
    RunConfig,
    SolverConfig,
    ToyGenSpec,
)
from .solver import MCDAObjective, default_gamma, solve_mcda
from .synthetic import generate, generate_nullspace_toy, parse_generator_spec

logger = logging.getLogger(__name__)


# ---------- parameter types ----------

class ParameterValue(click.ParamType):
    """A positive number, `auto` or `tune`."""
    name = "value|auto|tune"

    def convert(self, value, param, ctx):
        if isinstance(value, (float, ParameterMode)):
            return value
        text = str(value).strip().lower()
        if text in (ParameterMode.AUTO.value, ParameterMode.TUNE.value):
            return ParameterMode(text)
        try:
            number = float(text)
        except ValueError:
            self.fail(f"{value!r} is not a number, 'auto' or 'tune'", param, ctx)
        if not math.isfinite(number) or number <= 0:
            self.fail(f"{value!r} must be a positive number", param, ctx)
        return number


class DimensionRange(click.ParamType):
    """An inclusive range `a..b`."""
    name = "a..b"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        match = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", str(value))
        if not match:
            self.fail(f"{value!r} is not a range like 1..8", param, ctx)
        low, high = int(match.group(1)), int(match.group(2))
        if not 1 <= low <= high:
            self.fail(f"{value!r} must satisfy 1 <= a <= b", param, ctx)
        return low, high


PARAMETER = ParameterValue()
DIMENSIONS = DimensionRange()
METHOD_CHOICE = click.Choice([m.value for m in Method])


# ---------- shared plumbing ----------

def handle_errors(command):
    """Turn package errors into `Name: message` on stderr and the family's exit code."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except DiscriminantError as error:
            logger.debug("command failed", exc_info=True)
            click.echo(f"{error.name}: {error}", err=True)
            raise SystemExit(error.exit_code)
        except ValidationError as error:
            click.echo(f"ConfigError: {error.errors()[0]['msg']}", err=True)
            raise SystemExit(ConfigError.exit_code)
    return wrapper


def source_options(command):
    """--data / --generate / --seed / --verbose."""
    options = [
        click.option("--data", type=click.Path(dir_okay=False, path_type=Path), help="Dataset CSV file."),
        click.option("--generate", help="Generator spec, e.g. mixture:classes=7,dim=50."),
        click.option("--seed", type=int, default=settings.DEFAULT_SEED, show_default=True,
                     help="Seed for generators, folds and random starts."),
        click.option("--verbose", is_flag=True, help="DEBUG logging on standard error."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _setup(verbose: bool) -> None:
    setup_logging(logging.DEBUG if verbose else None)


def load_source(config: RunConfig) -> Dataset:
    if config.data is not None:
        return load_csv(config.data)
    return generate(parse_generator_spec(config.generate, default_seed=config.seed))


def _method_spec(method: Method, config: RunConfig) -> MethodSpec:
    return MethodSpec(method=method, gamma=config.gamma, mu=config.mu, knn=config.knn, seed=config.seed,
                      solver=SolverConfig(seed=config.seed))


def _default_k(dataset: Dataset, k: Optional[int]) -> int:
    k = k if k is not None else dataset.class_count - 1
    if k < 1:
        raise ConfigError(f"subspace dimension k must be at least 1, got {k}")
    return k


@click.group()
def cli():
    """Harmonic-mean multi-class discriminant analysis and its LDA baselines."""


# ---------- fit / transform ----------

@cli.command()
@source_options
@click.option("--method", type=METHOD_CHOICE, default=Method.MCDA.value, show_default=True)
@click.option("--k", type=int, help="Subspace dimension (default K-1).")
@click.option("--gamma", type=PARAMETER, default="auto", show_default=True)
@click.option("--mu", type=PARAMETER, default="auto", show_default=True, help="RLDA / OLDA regularizer.")
@click.option("--knn", type=int, default=settings.DEFAULT_KNN, help="Neighbours used while tuning.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Directory for projection.csv and report.json.")
@handle_errors
def fit(data, generate, seed, verbose, method, k, gamma, mu, knn, out):
    """Fit one method on the whole dataset."""
    _setup(verbose)
    config = RunConfig(command="fit", data=data, generate=generate, methods=[method], k=k,
                       gamma=gamma, mu=mu, knn=knn, seed=seed, out=out)
    dataset = load_source(config)
    k = _default_k(dataset, config.k)
    result = fit_projection(dataset, k, _method_spec(config.methods[0], config))

    save_projection_matrix(result.projection, out / "projection.csv")
    report = FitReport(
        method=config.methods[0], k=k, flavor=dataset.flavor, n=dataset.n_points, p=dataset.dimension,
        class_count=dataset.class_count, constrained=result.projection.constrained,
        gamma=result.gamma, mu=result.mu, notes=list(result.projection.notes),
        solver=result.solver, trace_ratio=result.trace_ratio,
    )
    write_report(report, out / "report.json")
    click.echo(f"{config.methods[0].value}: wrote {out / 'projection.csv'} and {out / 'report.json'}")


@cli.command()
@source_options
@click.option("--projection", "projection_path", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="projection.csv written by fit.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="CSV file for the projected coordinates.")
@handle_errors
def transform(data, generate, seed, verbose, projection_path, out):
    """Apply a stored projection and dump the projected points."""
    _setup(verbose)
    config = RunConfig(command="transform", data=data, generate=generate, seed=seed, out=out)
    dataset = load_source(config)
    projection = load_projection_matrix(projection_path)
    if projection.dimension != dataset.dimension:
        raise InvalidProjection(
            f"projection expects dimension {projection.dimension}, dataset has {dataset.dimension}"
        )
    dump_projection(dataset, projection, out)
    click.echo(f"wrote {out}")


# ---------- evaluate / benchmark ----------

@cli.command()
@source_options
@click.option("--method", "methods", type=METHOD_CHOICE, multiple=True, default=[Method.MCDA.value],
              show_default=True, help="Repeat to compare methods.")
@click.option("--k", type=int, help="Subspace dimension (default K-1).")
@click.option("--dims", type=DIMENSIONS, help="Sweep k over a..b instead of a single k.")
@click.option("--gamma", type=PARAMETER, default="auto", show_default=True)
@click.option("--mu", type=PARAMETER, default="auto", show_default=True, help="RLDA / OLDA regularizer.")
@click.option("--knn", type=int, default=settings.DEFAULT_KNN, show_default=True)
@click.option("--folds", type=int, default=settings.DEFAULT_FOLDS, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True, help="Threads for fold evaluation.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="JSON report file.")
@handle_errors
def evaluate(data, generate, seed, verbose, methods, k, dims, gamma, mu, knn, folds, workers, out):
    """Cross-validated KNN evaluation of one or more methods."""
    _setup(verbose)
    config = RunConfig(command="evaluate", data=data, generate=generate, methods=list(methods), k=k,
                       gamma=gamma, mu=mu, knn=knn, folds=folds, seed=seed, out=out, dims=dims)
    dataset = load_source(config)
    plan = split_folds(dataset, config.folds, config.seed)
    specs = [_method_spec(method, config) for method in config.methods]

    if config.dims is not None:
        reports = sweep_dimensions(dataset, specs, config.dims, plan, workers)
        table = [
            {"method": r.method, "k": r.k, "accuracy": r.mean.accuracy,
             "macro_f1": r.mean.macro_f1, "micro_f1": r.mean.micro_f1}
            for r in reports
        ]
        write_report({"reports": [r.to_document() for r in reports], "table": table}, out)
        return

    if len(specs) == 1:
        report = evaluate_method(dataset, specs[0], _default_k(dataset, config.k), plan, workers)
        write_report(report, out)
        if report.infeasible:
            click.echo(report.infeasible_reason, err=True)
            raise SystemExit(4)
        click.echo(f"{report.method.value} k={report.k}: mean accuracy {report.mean.accuracy:.4f}")
        return

    reports = run_benchmark(dataset, specs, _default_k(dataset, config.k), plan, workers)
    write_report({"reports": [r.to_document() for r in reports]}, out)
    for report in reports:
        status = "infeasible" if report.infeasible else f"mean accuracy {report.mean.accuracy:.4f}"
        click.echo(f"{report.method.value} k={report.k}: {status}")


@cli.command()
@source_options
@click.option("--method", "methods", type=METHOD_CHOICE, multiple=True,
              help="Methods to compare (default: every method the dataset supports).")
@click.option("--k", type=int, help="Subspace dimension (default K-1).")
@click.option("--gamma", type=PARAMETER, default="auto", show_default=True)
@click.option("--mu", type=PARAMETER, default="auto", show_default=True, help="RLDA / OLDA regularizer.")
@click.option("--knn", type=int, default=settings.DEFAULT_KNN, show_default=True)
@click.option("--folds", type=int, default=settings.DEFAULT_FOLDS, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@handle_errors
def benchmark(data, generate, seed, verbose, methods, k, gamma, mu, knn, folds, workers, out):
    """Every method at one k under the same folds; infeasible methods are reported as such."""
    _setup(verbose)
    config = RunConfig(command="benchmark", data=data, generate=generate, methods=list(methods) or [Method.MCDA],
                       k=k, gamma=gamma, mu=mu, knn=knn, folds=folds, seed=seed, out=out)
    dataset = load_source(config)
    if methods:
        chosen = config.methods
    elif dataset.flavor == Flavor.MULTI:
        chosen = list(MULTI_LABEL_METHODS)
    else:
        chosen = list(Method)
    plan = split_folds(dataset, config.folds, config.seed)
    specs = [_method_spec(method, config) for method in chosen]
    reports = run_benchmark(dataset, specs, _default_k(dataset, config.k), plan, workers)
    write_report({"reports": [r.to_document() for r in reports]}, out)
    for report in reports:
        status = "infeasible" if report.infeasible else f"mean accuracy {report.mean.accuracy:.4f}"
        click.echo(f"{report.method.value} k={report.k}: {status}")


# ---------- toy demonstration ----------

@cli.command("demo-toy")
@click.option("--seed", type=int, default=settings.DEFAULT_SEED, show_default=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--gamma", type=PARAMETER, default="auto", show_default=True)
@click.option("--noise", type=float, default=ToyGenSpec().noise_scale, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--verbose", is_flag=True)
@handle_errors
def demo_toy(seed, k, gamma, noise, out, verbose):
    """
    Null-space toy: compare PCA, classical LDA, NLDA and MCDA projections.

    Writes <method>.csv dumps and summary.json with the projected between-,
    within- and minimum pairwise class distances.
    """
    _setup(verbose)
    if gamma == ParameterMode.TUNE:
        raise ConfigError("demo-toy takes a fixed gamma or 'auto'")
    dataset = generate_nullspace_toy(ToyGenSpec(seed=seed, noise_scale=noise))
    stats, scatter = dataset_scatter(dataset)
    gamma = default_gamma(stats, scatter) if gamma == ParameterMode.AUTO else gamma

    projections = {
        Method.PCA: solve_pca(dataset, k),
        Method.LDA: solve_classical_lda(dataset, k),
        Method.NLDA: solve_nlda(dataset, k),
        Method.MCDA: solve_mcda(dataset, k, SolverConfig(gamma=gamma, seed=seed))[0],
    }
    objective = MCDAObjective(stats, scatter, gamma)
    summaries: List[MethodSummary] = []
    for method, projection in projections.items():
        G = projection.matrix
        dump_projection(dataset, projection, out / f"{method.value}.csv")
        summaries.append(MethodSummary(
            method=method,
            between_trace=float(np.sum(G * (scatter.between @ G))),
            within_trace=float(np.sum(G * (scatter.within @ G))),
            min_pair_distance=min_pair_distance(objective.view, G),
            harmonic_objective=objective.harmonic_part(G),
            arithmetic_pairwise=pairwise_arithmetic_objective(objective.view, G),
        ))
        click.echo(f"{method.value}: min pair distance {summaries[-1].min_pair_distance:.4f}, "
                   f"Tr(G^T S_w G) {summaries[-1].within_trace:.3e}")

    write_report(DemoSummary(seed=seed, k=k, gamma=gamma, methods=summaries), out / "summary.json")


def main():
    cli(prog_name="bench")
