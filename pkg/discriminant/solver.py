"""
MCDA objective, gradient and the gradient-descent solver.

    J(G) = gamma * Tr(G^T S_w G) + sum_{k1<k2} n_k1 n_k2 / Tr(G^T B_k1k2 G)

subject to G^T G = I. Multi-label datasets go through the same code with
their weighted scatter matrices and label counts.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from mcdabench import settings

from .baselines import check_subspace_dim, classical_lda_from_scatter, trace_ratio_from_scatter
from .datasets import Dataset
from .exceptions import (
    CoincidentClassMeans,
    ConfigError,
    InitRankExceeded,
    NumericalBreakdown,
    RankCollapse,
    WithinScatterDegenerate,
)
from .linalg import Projection, orthonormalize, symmetrize
from .scatter import ClassStats, ScatterSet, dataset_scatter, min_pair_distance, pairwise_between_view
from .schema import InitStrategy, SolverConfig, SolverReport

logger = logging.getLogger(__name__)

# Default epsilon for pair traces, relative to Tr(S_t)
PAIR_FLOOR_SCALE = 1e-12


def _matrix(G) -> np.ndarray:
    return G.matrix if isinstance(G, Projection) else np.asarray(G, dtype=float)


def default_pair_trace_floor(scatter: ScatterSet) -> float:
    total_trace = float(np.trace(scatter.total))
    return PAIR_FLOOR_SCALE * total_trace if total_trace > 0 else PAIR_FLOOR_SCALE


class MCDAObjective:
    """
    The MCDA objective bound to one dataset's statistics.

    Pair traces below the floor epsilon are replaced by epsilon (epsilon^2 in
    the gradient) so a transient coincident projection costs a large but
    finite penalty.
    """

    def __init__(self, stats: ClassStats, scatter: ScatterSet, gamma: float,
                 pair_trace_floor: Optional[float] = None):
        self.view = pairwise_between_view(stats)
        self.within = scatter.within
        self.gamma = float(gamma)
        self.floor = pair_trace_floor if pair_trace_floor is not None else default_pair_trace_floor(scatter)

    def pair_traces(self, G: np.ndarray) -> np.ndarray:
        return self.view.projected_traces(G)

    def within_trace(self, G: np.ndarray) -> float:
        return float(np.sum(G * (self.within @ G)))

    def harmonic_part(self, G: np.ndarray) -> float:
        traces = np.maximum(self.pair_traces(G), self.floor)
        return float(np.sum(self.view.weights / traces))

    def value(self, G: np.ndarray) -> float:
        return self.gamma * self.within_trace(G) + self.harmonic_part(G)

    def gradient(self, G: np.ndarray) -> np.ndarray:
        """2 gamma S_w G - sum 2 n_k1 n_k2 d (d^T G) / Tr(G^T B G)^2."""
        projected = self.view.differences.T @ G
        traces = np.maximum(np.sum(projected * projected, axis=1), self.floor)
        coefficients = 2.0 * self.view.weights / traces ** 2
        return 2.0 * self.gamma * (self.within @ G) - self.view.differences @ (coefficients[:, None] * projected)

    def tangent_gradient(self, G: np.ndarray) -> np.ndarray:
        """Gradient with its normal component at the column-orthonormal G removed."""
        gradient = self.gradient(G)
        return gradient - G @ symmetrize(G.T @ gradient)

    def degenerate_pairs(self, G: np.ndarray) -> List[Tuple[int, int]]:
        traces = self.pair_traces(G)
        return [pair for pair, trace in zip(self.view.pairs, traces) if trace < self.floor]


def mcda_objective(G, stats: ClassStats, scatter: ScatterSet, gamma: float,
                   pair_trace_floor: Optional[float] = None) -> float:
    return MCDAObjective(stats, scatter, gamma, pair_trace_floor).value(_matrix(G))


def mcda_gradient(G, stats: ClassStats, scatter: ScatterSet, gamma: float,
                  pair_trace_floor: Optional[float] = None) -> np.ndarray:
    return MCDAObjective(stats, scatter, gamma, pair_trace_floor).gradient(_matrix(G))


def default_gamma(stats: ClassStats, scatter: ScatterSet) -> float:
    """
    The balancing gamma = (1 / Tr S_w) * sum n_k1 n_k2 / Tr B_k1k2.

    With G = I both parts of the objective are then equal.

    Raises:
        WithinScatterDegenerate: Tr S_w = 0
        CoincidentClassMeans: some pair of class means coincides
    """
    within_trace = float(np.trace(scatter.within))
    if within_trace <= 0:
        raise WithinScatterDegenerate()
    view = pairwise_between_view(stats)
    full_traces = view.full_traces()
    coincident = [pair for pair, trace in zip(view.pairs, full_traces) if trace <= 0]
    if coincident:
        raise CoincidentClassMeans(coincident)
    return float(np.sum(view.weights / full_traces)) / within_trace


# ---------- initialization ----------

def initialize_projection(dataset: Dataset, k: int, strategy: InitStrategy = InitStrategy.AUTO,
                          seed: int = settings.DEFAULT_SEED, provided=None,
                          rank_cutoff: float = settings.RANK_CUTOFF,
                          scatter: Optional[ScatterSet] = None) -> Projection:
    """
    Starting projection for the descent.

    auto picks classical LDA when k <= K-1 and the trace-ratio solution
    otherwise; provided matrices are orthonormalized.
    """
    check_subspace_dim(k, dataset.dimension)
    strategy = InitStrategy(strategy)
    if strategy == InitStrategy.AUTO:
        strategy = InitStrategy.CLASSICAL_LDA if k <= dataset.class_count - 1 else InitStrategy.TRACE_RATIO

    if strategy == InitStrategy.RANDOM:
        rng = np.random.default_rng(seed)
        return orthonormalize(rng.standard_normal((dataset.dimension, k)))

    if strategy == InitStrategy.PROVIDED:
        if provided is None:
            raise ConfigError("init strategy 'provided' requires an initial projection")
        matrix = _matrix(provided)
        if matrix.shape != (dataset.dimension, k):
            raise ConfigError(f"provided projection has shape {matrix.shape}, expected {(dataset.dimension, k)}")
        return orthonormalize(matrix)

    if scatter is None:
        _, scatter = dataset_scatter(dataset)

    if strategy == InitStrategy.CLASSICAL_LDA:
        if k > dataset.class_count - 1:
            raise InitRankExceeded(k, dataset.class_count - 1)
        return classical_lda_from_scatter(scatter, k, dataset.class_count, rank_cutoff)

    projection, _ = trace_ratio_from_scatter(scatter, k)
    return projection


# ---------- descent ----------

@dataclass
class _Descent:
    projection: np.ndarray
    trace: List[float]
    iterations: int
    converged: bool
    notes: List[str] = field(default_factory=list)


def _orthonormal_merit(objective: MCDAObjective, candidate: np.ndarray):
    """Objective of the polar factor of a trial point; collapsed trials are rejected."""
    try:
        polar = orthonormalize(candidate).matrix
    except RankCollapse:
        return np.inf, None
    return objective.value(polar), polar


def _descend(objective: MCDAObjective, start: np.ndarray, config: SolverConfig) -> _Descent:
    """
    Gradient descent with Armijo backtracking.

    The search direction is the gradient at the orthonormal point `current`
    with its normal component removed. Trial points are judged by the
    objective of their orthonormalized version, which is what the trace
    records; the iterate itself is snapped back onto G^T G = I every
    reorthonormalize_every steps, and early whenever progress stalls off the
    constraint. A run converges once the relative change is within
    tolerance and the constrained gradient is small relative to J.
    """
    G = start
    current = start
    value = objective.value(current)
    if not np.isfinite(value):
        raise NumericalBreakdown(0, value)

    trace = [value]
    notes: List[str] = []
    iterations = 0
    since_snap = 0
    converged = False
    direction = objective.tangent_gradient(current)

    for iteration in range(1, config.max_iterations + 1):
        if not np.all(np.isfinite(direction)):
            raise NumericalBreakdown(iteration, "non-finite gradient")
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            converged = True
            break
        stationary = norm <= config.gradient_tolerance * abs(value)

        step = config.initial_step
        accepted = None
        for _ in range(config.max_backtracks):
            candidate = G - (step / norm) * direction
            merit, polar = _orthonormal_merit(objective, candidate)
            if merit <= value - config.sufficient_decrease * step * norm:
                accepted = (candidate, merit, polar)
                break
            step *= config.shrink_factor

        if accepted is None:
            if since_snap > 0:
                # retry from the orthonormal point before giving up
                G = current
                since_snap = 0
                continue
            converged = stationary
            if not stationary:
                notes.append(f"line search found no sufficient decrease at iteration {iteration}")
                logger.warning(f"MCDA line search stalled at iteration {iteration} (J={value:.6g}, |grad|={norm:.3g})")
            break

        candidate, merit, polar = accepted
        since_snap += 1
        if since_snap >= config.reorthonormalize_every:
            G = polar
            since_snap = 0
        else:
            G = candidate
        current = polar
        iterations = iteration
        trace.append(merit)
        change = abs(merit - value) / max(abs(value), 1e-30)
        value = merit
        direction = objective.tangent_gradient(current)
        logger.debug(f"iteration {iteration}: J={merit:.10g} step={step:.3g} change={change:.3g}")
        if change <= config.objective_tolerance:
            if np.linalg.norm(direction) <= config.gradient_tolerance * abs(value):
                converged = True
                break
            if since_snap > 0:
                G = current
                since_snap = 0

    return _Descent(projection=current, trace=trace, iterations=iterations, converged=converged, notes=notes)


def solve_mcda(dataset: Dataset, k: int, config: Optional[SolverConfig] = None,
               initial=None) -> Tuple[Projection, SolverReport]:
    """
    Minimize the MCDA objective over column-orthonormal p x k matrices.

    The configured start is followed by `config.restarts` seeded random
    starts; the run with the lowest final objective is returned.
    """
    config = config or SolverConfig()
    check_subspace_dim(k, dataset.dimension)
    stats, scatter = dataset_scatter(dataset)
    gamma = config.gamma if config.gamma is not None else default_gamma(stats, scatter)
    objective = MCDAObjective(stats, scatter, gamma, config.pair_trace_floor)
    logger.info(
        f"MCDA: n={dataset.n_points} p={dataset.dimension} K={dataset.class_count} k={k} "
        f"gamma={gamma:.6g} init={config.init_strategy.value}"
    )

    starts = [initialize_projection(dataset, k, config.init_strategy, seed=config.seed, provided=initial,
                                    rank_cutoff=config.rank_cutoff, scatter=scatter)]
    for restart in range(config.restarts):
        starts.append(initialize_projection(dataset, k, InitStrategy.RANDOM, seed=config.seed + restart + 1))

    best: Optional[_Descent] = None
    winner = 0
    for index, start in enumerate(starts):
        run = _descend(objective, start.matrix, config)
        logger.debug(f"start {index}: J={run.trace[-1]:.10g} after {run.iterations} iterations")
        if best is None or run.trace[-1] < best.trace[-1]:
            best = run
            winner = index

    final = best.projection
    degenerate = objective.degenerate_pairs(final)
    if degenerate:
        logger.warning(f"MCDA solution projects class means of pairs {degenerate} below the pair-trace floor")
    if not best.converged:
        logger.warning(f"MCDA did not converge in {config.max_iterations} iterations")
    logger.info(f"MCDA finished: J={best.trace[-1]:.10g} iterations={best.iterations} converged={best.converged}")

    report = SolverReport(
        objective_trace=best.trace,
        iterations_run=best.iterations,
        converged=best.converged,
        final_objective=best.trace[-1],
        final_within_trace=objective.within_trace(final),
        final_min_pair_distance=min_pair_distance(objective.view, final),
        gamma=gamma,
        initial_objective=best.trace[0],
        final_gradient_norm=float(np.linalg.norm(objective.tangent_gradient(final))),
        degenerate_pairs=degenerate,
        winning_start=winner,
        notes=list(starts[winner].notes) + best.notes,
    )
    return Projection(final), report
