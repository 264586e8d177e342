"""
Evaluation harness: fold plans, KNN classification in the projected space,
accuracy / macro-F1 / micro-F1, training-only parameter tuning and the
cross-validated method comparison.

Projections are always fit on a training split; test rows are never handed
to fitting or tuning code.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.metrics import multilabel_confusion_matrix
from sklearn.model_selection import KFold, StratifiedKFold

from mcdabench import settings

from .baselines import solve_classical_lda, solve_nlda, solve_pca, solve_trace_ratio, solve_unified_lda
from .datasets import Dataset, MultiLabelDataset
from .exceptions import (
    ClassTooSmallForFolds,
    ConfigError,
    DiscriminantError,
    InvalidDataset,
    MethodInfeasible,
    TrainingLabelsTooFew,
    TuningFailed,
)
from .linalg import Projection
from .schema import (
    ClassMetrics,
    EvalReport,
    FoldResult,
    Flavor,
    Method,
    MethodSpec,
    Metrics,
    MULTI_LABEL_METHODS,
    ParameterMode,
    SolverReport,
    SolverSummary,
    TraceRatioReport,
    UnifiedLdaConfig,
    UnifiedVariant,
    default_gamma_grid,
)
from .solver import solve_mcda

logger = logging.getLogger(__name__)

# Neighbour distances closer than this count as equal
DISTANCE_TIE_TOLERANCE = 1e-12

MU_METHODS = (Method.RLDA, Method.OLDA)


# ---------- fold plans ----------

@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index (0-based) per point."""

    fold_count: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def permuted(self, order: Sequence[int]) -> "FoldPlan":
        """The same plan after reordering points by `order`."""
        return FoldPlan(self.fold_count, self.assignments[np.asarray(order)], self.seed)


def split_folds(dataset: Dataset, fold_count: int = settings.DEFAULT_FOLDS,
                seed: int = settings.DEFAULT_SEED) -> FoldPlan:
    """
    Stratified folds for single-label data, plain shuffled folds for
    multi-label data.

    Raises:
        ClassTooSmallForFolds: a class has fewer members than folds
    """
    if fold_count < 2:
        raise ConfigError(f"fold count must be at least 2, got {fold_count}")

    n = dataset.n_points
    assignments = np.empty(n, dtype=np.int64)
    if dataset.flavor == Flavor.SINGLE:
        sizes = dataset.class_sizes()
        for class_id, size in enumerate(sizes, start=1):
            if size < fold_count:
                raise ClassTooSmallForFolds(class_id, int(size), fold_count)
        splitter = StratifiedKFold(n_splits=fold_count, shuffle=True, random_state=seed)
        splits = splitter.split(np.zeros(n), dataset.labels)
    else:
        if n < fold_count:
            raise InvalidDataset(f"{n} points cannot fill {fold_count} folds")
        splitter = KFold(n_splits=fold_count, shuffle=True, random_state=seed)
        splits = splitter.split(np.zeros(n))

    for fold, (_, test) in enumerate(splits):
        assignments[test] = fold
    assignments.setflags(write=False)
    return FoldPlan(fold_count=fold_count, assignments=assignments, seed=seed)


# ---------- KNN ----------

def _neighbours(train_features: np.ndarray, test_features: np.ndarray, knn: int) -> Tuple[np.ndarray, np.ndarray]:
    """Indices and distances of the knn nearest training points, ordered by (distance, index)."""
    train_size = train_features.shape[1]
    if train_size == 0:
        raise InvalidDataset("KNN needs a non-empty training set")
    if not 1 <= knn <= train_size:
        raise ConfigError(f"knn={knn} must lie in 1..{train_size} (training size)")
    distances = cdist(test_features.T, train_features.T, metric="euclidean")
    order = np.argsort(distances, axis=1, kind="stable")[:, :knn]
    return order, np.take_along_axis(distances, order, axis=1)


def knn_predict(train_features: np.ndarray, train_labels: np.ndarray, test_features: np.ndarray,
                knn: int = settings.DEFAULT_KNN) -> np.ndarray:
    """
    Majority vote of the knn nearest training points (columns are points).

    Vote ties go to the tied class with the nearest member; members at equal
    distance (within 1e-12) leave the smallest class id.
    """
    train_labels = np.asarray(train_labels)
    order, distances = _neighbours(np.asarray(train_features), np.asarray(test_features), knn)
    predicted = np.empty(order.shape[0], dtype=np.int64)
    for row in range(order.shape[0]):
        labels = train_labels[order[row]]
        classes, votes = np.unique(labels, return_counts=True)
        tied = classes[votes == votes.max()]
        if tied.size == 1:
            predicted[row] = tied[0]
            continue
        nearest = np.array([distances[row][labels == c].min() for c in tied])
        closest = tied[nearest <= nearest.min() + DISTANCE_TIE_TOLERANCE]
        predicted[row] = closest.min()
    return predicted


def knn_predict_multilabel(train_features: np.ndarray, train_indicator: np.ndarray,
                           test_features: np.ndarray, knn: int = settings.DEFAULT_KNN) -> np.ndarray:
    """
    Label j is predicted when more than half of the knn neighbours carry it;
    if none does, the most frequent neighbour label (smallest id on ties).
    """
    train_indicator = np.asarray(train_indicator)
    order, _ = _neighbours(np.asarray(train_features), np.asarray(test_features), knn)
    counts = train_indicator[order].sum(axis=1)
    predicted = (counts > knn / 2).astype(np.int64)
    empty = predicted.sum(axis=1) == 0
    predicted[np.flatnonzero(empty), np.argmax(counts[empty], axis=1)] = 1
    return predicted


# ---------- metrics ----------

def _ratio(numerator: float, denominator: float) -> float:
    return float(numerator) / float(denominator) if denominator else 0.0


def compute_metrics(predicted, truth, flavor: Flavor) -> Metrics:
    """
    Accuracy, macro F1 (unweighted mean over labels occurring in either
    predictions or truth) and micro F1 (pooled counts).

    Multi-label accuracy is the mean per-label binary accuracy.
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise InvalidDataset(f"predictions have shape {predicted.shape}, truth has {truth.shape}")
    if truth.shape[0] == 0:
        raise InvalidDataset("no points to score")

    if Flavor(flavor) == Flavor.SINGLE:
        labels = np.union1d(predicted, truth)
        confusion = multilabel_confusion_matrix(truth, predicted, labels=labels)
        accuracy = _ratio(np.sum(predicted == truth), truth.shape[0])
    else:
        present = np.flatnonzero((predicted.sum(axis=0) + truth.sum(axis=0)) > 0)
        labels = present + 1
        confusion = multilabel_confusion_matrix(truth[:, present], predicted[:, present])
        accuracy = _ratio(np.sum(predicted == truth), truth.size)

    per_class = []
    for label, matrix in zip(labels, confusion):
        tp, fp, fn = int(matrix[1, 1]), int(matrix[0, 1]), int(matrix[1, 0])
        per_class.append(ClassMetrics(
            label=int(label),
            precision=_ratio(tp, tp + fp),
            recall=_ratio(tp, tp + fn),
            f1=_ratio(2 * tp, 2 * tp + fp + fn),
            support=tp + fn,
        ))

    tp = int(confusion[:, 1, 1].sum())
    fp = int(confusion[:, 0, 1].sum())
    fn = int(confusion[:, 1, 0].sum())
    macro = float(np.mean([c.f1 for c in per_class])) if per_class else 0.0
    return Metrics(
        accuracy=accuracy,
        macro_f1=macro,
        micro_f1=_ratio(2 * tp, 2 * tp + fp + fn),
        per_class=per_class,
    )


def mean_metrics(metrics: Sequence[Metrics]) -> Metrics:
    """Field-wise arithmetic mean (per-class entries are not averaged)."""
    return Metrics(
        accuracy=float(np.mean([m.accuracy for m in metrics])),
        macro_f1=float(np.mean([m.macro_f1 for m in metrics])),
        micro_f1=float(np.mean([m.micro_f1 for m in metrics])),
    )


# ---------- fitting ----------

@dataclass
class FitResult:
    projection: Projection
    gamma: Optional[float] = None
    mu: Optional[float] = None
    solver: Optional[SolverReport] = None
    trace_ratio: Optional[TraceRatioReport] = None


def fit_projection(train: Dataset, k: int, spec: MethodSpec) -> FitResult:
    """
    Fit one method on training data, resolving gamma / mu first
    (fixed value, `auto` default, or `tune` on the training data).
    """
    method = spec.method
    if train.flavor == Flavor.MULTI and method not in MULTI_LABEL_METHODS:
        raise ConfigError(f"method {method.value} does not support multi-label data")

    if method == Method.MCDA:
        gamma = spec.gamma
        if gamma == ParameterMode.TUNE:
            gamma = tune_gamma(train, k, spec, spec.grid)
        elif gamma == ParameterMode.AUTO:
            gamma = None
        config = spec.solver.model_copy(update={"gamma": gamma})
        projection, report = solve_mcda(train, k, config)
        return FitResult(projection, gamma=report.gamma, solver=report)

    if method == Method.LDA:
        return FitResult(solve_classical_lda(train, k, spec.solver.rank_cutoff))
    if method == Method.NLDA:
        return FitResult(solve_nlda(train, k, spec.solver.rank_cutoff))
    if method == Method.TRACE_RATIO:
        projection, report = solve_trace_ratio(train, k)
        return FitResult(projection, trace_ratio=report)
    if method == Method.PCA:
        return FitResult(solve_pca(train, k))

    mu = None
    if method in MU_METHODS:
        if spec.mu == ParameterMode.TUNE:
            mu = tune_parameter(train, k, spec, "mu", spec.grid or default_gamma_grid())
        elif spec.mu != ParameterMode.AUTO:
            mu = float(spec.mu)
    config = UnifiedLdaConfig(variant=UnifiedVariant(method.value), mu=mu,
                              rank_cutoff=spec.solver.rank_cutoff)
    return FitResult(solve_unified_lda(train, k, config), mu=mu)


def _train_view(features: np.ndarray, indicator: np.ndarray) -> Tuple[MultiLabelDataset, np.ndarray]:
    """Multi-label training set without the columns that have no training member; returns the kept column ids."""
    kept = np.flatnonzero(indicator.sum(axis=0) > 0)
    if kept.size < 2:
        raise TrainingLabelsTooFew(int(kept.size), features.shape[1])
    return MultiLabelDataset(features, indicator[:, kept]), kept


def _score_split(dataset: Dataset, train_idx: np.ndarray, test_idx: np.ndarray, k: int,
                 spec: MethodSpec) -> Tuple[Metrics, FitResult]:
    if dataset.flavor == Flavor.SINGLE:
        train = dataset.subset(train_idx)
        fit = fit_projection(train, k, spec)
        test_features = dataset.features[:, test_idx]
        predicted = knn_predict(fit.projection.transform(train.features), train.labels,
                                fit.projection.transform(test_features), spec.knn)
        return compute_metrics(predicted, dataset.labels[test_idx], Flavor.SINGLE), fit

    train, kept = _train_view(dataset.features[:, train_idx], dataset.indicator[train_idx])
    fit = fit_projection(train, k, spec)
    test_features = dataset.features[:, test_idx]
    partial = knn_predict_multilabel(fit.projection.transform(train.features), train.indicator,
                                     fit.projection.transform(test_features), spec.knn)
    predicted = np.zeros((test_idx.size, dataset.class_count), dtype=np.int64)
    predicted[:, kept] = partial
    truth = dataset.indicator[test_idx].astype(np.int64)
    return compute_metrics(predicted, truth, Flavor.MULTI), fit


# ---------- tuning ----------

def tune_parameter(train: Dataset, k: int, spec: MethodSpec, parameter: str,
                   grid: Sequence[float]) -> float:
    """
    Pick the grid value with the best mean inner-CV accuracy on `train`.

    Grid values are tried in ascending order and only a strictly better score
    replaces the incumbent, so ties go to the smaller value. Grid points whose
    fit fails are skipped.
    """
    if not grid:
        raise ConfigError(f"{parameter} grid must not be empty")

    if train.flavor == Flavor.SINGLE:
        sizes = train.class_sizes()
        inner = min(spec.inner_folds, int(sizes.min()))
        if inner < 2:
            smallest = int(np.argmin(sizes)) + 1
            raise ClassTooSmallForFolds(smallest, int(sizes.min()), 2)
    else:
        inner = min(spec.inner_folds, train.n_points)
    plan = split_folds(train, inner, spec.seed)

    best_value, best_score = None, -np.inf
    errors: List[str] = []
    for value in sorted(float(v) for v in grid):
        fixed = spec.model_copy(update={parameter: value})
        try:
            scores = [
                _score_split(train, plan.train_indices(fold), plan.test_indices(fold), k, fixed)[0].accuracy
                for fold in range(plan.fold_count)
            ]
        except DiscriminantError as error:
            errors.append(f"{parameter}={value:g}: {error.name}: {error}")
            logger.debug(f"tuning {parameter}={value:g} skipped: {error}")
            continue
        score = float(np.mean(scores))
        logger.debug(f"tuning {parameter}={value:g}: mean inner accuracy {score:.4f}")
        if score > best_score:
            best_value, best_score = value, score

    if best_value is None:
        raise TuningFailed(parameter, errors)
    logger.info(f"tuned {parameter}={best_value:g} (inner accuracy {best_score:.4f})")
    return best_value


def tune_gamma(train: Dataset, k: int, spec: MethodSpec, grid: Optional[Sequence[float]] = None) -> float:
    return tune_parameter(train, k, spec, "gamma", grid or default_gamma_grid())


# ---------- cross-validated evaluation ----------

def _fold_result(dataset: Dataset, plan: FoldPlan, fold: int, k: int, spec: MethodSpec) -> FoldResult:
    metrics, fit = _score_split(dataset, plan.train_indices(fold), plan.test_indices(fold), k, spec)
    solver = None
    if fit.solver is not None:
        solver = SolverSummary(iterations=fit.solver.iterations_run, converged=fit.solver.converged,
                               objective_trace=fit.solver.objective_trace)
    logger.debug(f"{spec.method.value} k={k} fold {fold}: accuracy {metrics.accuracy:.4f}")
    return FoldResult(fold=fold, metrics=metrics, gamma=fit.gamma, mu=fit.mu, solver=solver)


def evaluate_method(dataset: Dataset, spec: MethodSpec, k: Optional[int] = None,
                    fold_plan: Optional[FoldPlan] = None, max_workers: int = 1) -> EvalReport:
    """
    Cross-validate one method: per fold, fit on the training portion,
    project both portions and KNN-classify the test portion.

    k defaults to K-1. A method that is infeasible on any fold yields a
    report marked infeasible.
    """
    k = k if k is not None else dataset.class_count - 1
    plan = fold_plan or split_folds(dataset, settings.DEFAULT_FOLDS, spec.seed)
    report = dict(method=spec.method, k=k, flavor=dataset.flavor, knn=spec.knn,
                  fold_count=plan.fold_count, seed=plan.seed)

    try:
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                folds = list(pool.map(lambda f: _fold_result(dataset, plan, f, k, spec), range(plan.fold_count)))
        else:
            folds = [_fold_result(dataset, plan, fold, k, spec) for fold in range(plan.fold_count)]
    except MethodInfeasible as error:
        logger.info(f"{spec.method.value} infeasible at k={k}: {error.name}: {error}")
        return EvalReport(**report, infeasible=True, infeasible_reason=f"{error.name}: {error}")

    mean = mean_metrics([f.metrics for f in folds])
    logger.info(f"{spec.method.value} k={k}: mean accuracy {mean.accuracy:.4f}, macro F1 {mean.macro_f1:.4f}")
    return EvalReport(**report, gamma=[f.gamma for f in folds], folds=folds, mean=mean)


def sweep_dimensions(dataset: Dataset, specs: Sequence[MethodSpec], dims: Tuple[int, int],
                     fold_plan: Optional[FoldPlan] = None, max_workers: int = 1) -> List[EvalReport]:
    """One report per (method, k) for k in dims[0]..dims[1]; infeasible pairs are left out."""
    low, high = dims
    reports = []
    for spec in specs:
        for k in range(low, high + 1):
            report = evaluate_method(dataset, spec, k, fold_plan, max_workers)
            if report.infeasible:
                continue
            reports.append(report)
    return reports


def benchmark(dataset: Dataset, specs: Sequence[MethodSpec], k: Optional[int] = None,
              fold_plan: Optional[FoldPlan] = None, max_workers: int = 1) -> List[EvalReport]:
    """One report per method at a shared k (default K-1), infeasible ones included."""
    return [evaluate_method(dataset, spec, k, fold_plan, max_workers) for spec in specs]
