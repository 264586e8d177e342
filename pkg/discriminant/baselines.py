"""
Comparison methods: classical LDA, null-space LDA, iterative trace ratio,
the four-step generalized LDA family (RLDA / ULDA / OLDA / OCM) and PCA.

Each method has a `*_from_scatter` core working on precomputed scatter
matrices (the MCDA solver initializes from these) and a `solve_*` entry
point taking a dataset.
"""
import logging
from typing import List, Tuple

import numpy as np

from mcdabench import settings

from .datasets import Dataset
from .exceptions import (
    ConfigError,
    InsufficientClasses,
    InvalidDataset,
    NullSpaceAbsent,
    NullSpaceTooSmall,
    SubspaceRankExceeded,
)
from .linalg import (
    Projection,
    eigh_descending,
    inverse_root_factor,
    null_space,
    numerical_rank,
    orthonormal_basis,
    orthonormalize,
    top_eigenvectors,
)
from .scatter import ScatterSet, dataset_scatter
from .schema import TraceRatioReport, UnifiedLdaConfig, UnifiedVariant

logger = logging.getLogger(__name__)

TRACE_RATIO_TOLERANCE = 1e-10
TRACE_RATIO_MAX_ITERATIONS = 100
# Trace-ratio denominators below this fraction of Tr(S_t) are treated as zero
DENOMINATOR_FLOOR = 1e-14
# Default mu for RLDA / OLDA, relative to the mean eigenvalue of S_t
MU_SCALE = 1e-3


def check_subspace_dim(k: int, p: int) -> None:
    if k < 1:
        raise ConfigError(f"subspace dimension k must be at least 1, got {k}")
    if k > p:
        raise SubspaceRankExceeded(k, p, what="p")


def _require_classes(dataset: Dataset) -> None:
    if dataset.class_count < 2:
        raise InsufficientClasses(dataset.class_count)


# ---------- classical LDA ----------

def classical_lda_from_scatter(scatter: ScatterSet, k: int, class_count: int,
                               rank_cutoff: float = settings.RANK_CUTOFF) -> Projection:
    """
    Top-k eigenvectors of S_w^+ S_b, orthonormalized.

    With W = U_r diag(lambda_r^{-1/2}) from S_w, the eigenvectors are W u for
    the top eigenvectors u of the symmetric W^T S_b W.
    """
    if k > class_count - 1:
        raise SubspaceRankExceeded(k, class_count - 1, what="K-1")

    values, vectors = eigh_descending(scatter.within)
    factor = inverse_root_factor(values, vectors, rank_cutoff)
    if factor.shape[1] == 0:
        logger.warning("S_w is numerically zero; classical LDA falls back to the top eigenvectors of S_b")
        projection = orthonormalize(top_eigenvectors(scatter.between, k))
        return projection.with_note("S_w numerically zero: used top eigenvectors of S_b")
    if factor.shape[1] < k:
        raise SubspaceRankExceeded(k, factor.shape[1], what="rank(S_w)")

    reduced = factor.T @ scatter.between @ factor
    return orthonormalize(factor @ top_eigenvectors(reduced, k))


def solve_classical_lda(dataset: Dataset, k: int,
                        rank_cutoff: float = settings.RANK_CUTOFF) -> Projection:
    _require_classes(dataset)
    check_subspace_dim(k, dataset.dimension)
    _, scatter = dataset_scatter(dataset)
    return classical_lda_from_scatter(scatter, k, dataset.class_count, rank_cutoff)


# ---------- null-space LDA ----------

def solve_nlda(dataset: Dataset, k: int, rank_cutoff: float = settings.RANK_CUTOFF) -> Projection:
    """
    Maximize Tr(G^T S_b G) inside the null space of S_w.

    Raises:
        NullSpaceAbsent: S_w has full numerical rank
        NullSpaceTooSmall: the null space has fewer than k dimensions
    """
    _require_classes(dataset)
    check_subspace_dim(k, dataset.dimension)
    _, scatter = dataset_scatter(dataset)

    basis = null_space(scatter.within, rank_cutoff)
    null_dim = basis.shape[1]
    logger.debug(f"S_w null space dimension {null_dim} (p={dataset.dimension}, n={dataset.n_points})")
    if null_dim == 0:
        raise NullSpaceAbsent(null_dim, dataset.n_points, dataset.class_count, dataset.dimension)
    if null_dim < k:
        raise NullSpaceTooSmall(null_dim, k)

    reduced = basis.T @ scatter.between @ basis
    return Projection(basis @ top_eigenvectors(reduced, k))


# ---------- trace ratio ----------

def trace_ratio_value(G, scatter: ScatterSet) -> float:
    """Tr(G^T S_b G) / Tr(G^T S_t G)."""
    matrix = G.matrix if isinstance(G, Projection) else np.asarray(G)
    numerator = float(np.sum(matrix * (scatter.between @ matrix)))
    denominator = float(np.sum(matrix * (scatter.total @ matrix)))
    return numerator / denominator


def _ratio_terms(G: np.ndarray, scatter: ScatterSet) -> Tuple[float, float]:
    return float(np.sum(G * (scatter.between @ G))), float(np.sum(G * (scatter.total @ G)))


def trace_ratio_from_scatter(scatter: ScatterSet, k: int,
                             tolerance: float = TRACE_RATIO_TOLERANCE,
                             max_iterations: int = TRACE_RATIO_MAX_ITERATIONS
                             ) -> Tuple[Projection, TraceRatioReport]:
    """
    Fixed-point iteration lambda <- ratio(G), G <- top-k eigenvectors of S_b - lambda S_t.

    Eigenvalue ties are broken toward small total scatter. An iterate whose
    denominator vanishes, or whose ratio drops, is rejected and the previous
    one kept.
    """
    total_trace = float(np.trace(scatter.total))
    if total_trace <= 0:
        raise InvalidDataset("total scatter is zero: every point coincides")
    floor = DENOMINATOR_FLOOR * total_trace

    G = top_eigenvectors(scatter.between, k, tie_breaker=scatter.total)
    numerator, denominator = _ratio_terms(G, scatter)
    ratio = float(np.clip(numerator / denominator, 0.0, 1.0)) if denominator > floor else 0.0
    lambda_trace = [ratio]
    notes: List[str] = []
    converged = False
    iterations = 0

    for iteration in range(1, max_iterations + 1):
        # the ratio cannot exceed 1
        if ratio >= 1.0 - tolerance:
            converged = True
            break
        candidate = top_eigenvectors(scatter.between - ratio * scatter.total, k, tie_breaker=scatter.total)
        numerator, denominator = _ratio_terms(candidate, scatter)
        if denominator <= floor:
            notes.append(f"vanishing denominator at iteration {iteration}; previous iterate kept")
            logger.debug(f"trace ratio: vanishing denominator at iteration {iteration}, keeping previous iterate")
            break
        new_ratio = float(np.clip(numerator / denominator, 0.0, 1.0))
        if new_ratio < ratio - 1e-12:
            notes.append(f"ratio dropped at iteration {iteration}; previous iterate kept")
            logger.debug(f"trace ratio: ratio dropped at iteration {iteration}, keeping previous iterate")
            break

        G = candidate
        iterations = iteration
        lambda_trace.append(new_ratio)
        change = abs(new_ratio - ratio)
        ratio = new_ratio
        if change <= tolerance:
            converged = True
            break

    if not converged and not notes:
        logger.warning(f"trace ratio did not converge in {max_iterations} iterations (lambda={ratio:.6g})")

    report = TraceRatioReport(lambda_trace=lambda_trace, iterations=iterations, converged=converged, notes=notes)
    return Projection(G), report


def solve_trace_ratio(dataset: Dataset, k: int,
                      tolerance: float = TRACE_RATIO_TOLERANCE,
                      max_iterations: int = TRACE_RATIO_MAX_ITERATIONS
                      ) -> Tuple[Projection, TraceRatioReport]:
    _require_classes(dataset)
    check_subspace_dim(k, dataset.dimension)
    _, scatter = dataset_scatter(dataset)
    return trace_ratio_from_scatter(scatter, k, tolerance, max_iterations)


# ---------- generalized LDA framework ----------

def default_mu(scatter: ScatterSet) -> float:
    p = scatter.total.shape[0]
    return MU_SCALE * float(np.trace(scatter.total)) / p


def unified_lda_from_scatter(scatter: ScatterSet, k: int, config: UnifiedLdaConfig) -> Projection:
    """
    The four steps: eigendecompose S_t, apply the transfer function phi,
    take the top eigenvectors of S~_t^+ S_b, optionally orthonormalize by QR.

    OCM skips the first three steps and returns the top eigenvectors of S_b.
    """
    rank = numerical_rank(scatter.between, config.rank_cutoff)
    if k > rank:
        raise SubspaceRankExceeded(k, rank)

    if config.variant == UnifiedVariant.OCM:
        return Projection(top_eigenvectors(scatter.between, k))

    values, vectors = eigh_descending(scatter.total)
    if config.variant == UnifiedVariant.ULDA:
        transferred = values
    else:
        mu = config.mu if config.mu is not None else default_mu(scatter)
        transferred = values + mu
        logger.debug(f"{config.variant.value}: mu={mu:.6g}")

    factor = inverse_root_factor(transferred, vectors, config.rank_cutoff)
    reduced = factor.T @ scatter.between @ factor
    G = factor @ top_eigenvectors(reduced, k)

    if config.apply_qr:
        return Projection(orthonormal_basis(G))
    return Projection(G, constrained=False)


def solve_unified_lda(dataset: Dataset, k: int, config: UnifiedLdaConfig) -> Projection:
    _require_classes(dataset)
    check_subspace_dim(k, dataset.dimension)
    _, scatter = dataset_scatter(dataset)
    return unified_lda_from_scatter(scatter, k, config)


# ---------- PCA ----------

def solve_pca(dataset: Dataset, k: int) -> Projection:
    """Top-k eigenvectors of S_t."""
    check_subspace_dim(k, dataset.dimension)
    _, scatter = dataset_scatter(dataset)
    return Projection(top_eigenvectors(scatter.total, k))
