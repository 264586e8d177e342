"""
Class statistics and scatter matrices.

Single-label and multi-label data share one code path: a single-label set is
handled through its one-hot indicator, and every class contribution is
weighted by Y_ik. Accumulation runs in ascending class id, then ascending
point index.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from .datasets import Dataset
from .exceptions import InsufficientClasses
from .linalg import symmetrize
from .schema import Flavor

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClassStats:
    """Per-class effective sizes n_k, class means m_k (columns) and global mean m."""

    counts: np.ndarray
    class_means: np.ndarray
    global_mean: np.ndarray
    flavor: Flavor

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def dimension(self) -> int:
        return self.global_mean.shape[0]

    @property
    def total_weight(self) -> float:
        """n for single-label data; label occurrences for multi-label data."""
        return float(self.counts.sum())


@dataclass(frozen=True, eq=False)
class ScatterSet:
    between: np.ndarray
    within: np.ndarray
    total: np.ndarray
    flavor: Flavor


def _readonly(*arrays):
    for array in arrays:
        array.setflags(write=False)


def compute_class_stats(dataset: Dataset) -> ClassStats:
    """
    Class sizes n_k = sum_i Y_ik, class means and the global mean.

    The single-label global mean is the plain point average; the multi-label
    one weights each point by its label multiplicity. Each class mean is
    accumulated relative to the first member of the class, so a class of
    identical points has that point as its mean exactly.
    """
    features = dataset.features
    indicator = dataset.indicator
    counts = indicator.sum(axis=0)
    class_means = np.empty((dataset.dimension, dataset.class_count))
    for k in range(dataset.class_count):
        members = np.flatnonzero(indicator[:, k])
        reference = features[:, members[0]]
        shifted = features[:, members] - reference[:, None]
        class_means[:, k] = reference + (shifted @ indicator[members, k]) / counts[k]

    reference = features[:, 0]
    shifted = features - reference[:, None]
    if dataset.flavor == Flavor.SINGLE:
        global_mean = reference + shifted.sum(axis=1) / dataset.n_points
    else:
        global_mean = reference + (shifted @ indicator).sum(axis=1) / counts.sum()

    _readonly(counts, class_means, global_mean)
    return ClassStats(counts=counts, class_means=class_means, global_mean=global_mean,
                      flavor=dataset.flavor)


def compute_scatter(stats: ClassStats, dataset: Dataset) -> ScatterSet:
    """
    S_b, S_w and S_t, or the multi-label S~_b and S~_w.

    Single-label S_t is accumulated independently from the centered data;
    the multi-label total is S~_b + S~_w by definition.
    """
    features = dataset.features
    indicator = dataset.indicator
    p = dataset.dimension

    within = np.zeros((p, p))
    for k in range(stats.class_count):
        members = np.flatnonzero(indicator[:, k])
        centered = features[:, members] - stats.class_means[:, [k]]
        within += (centered * indicator[members, k]) @ centered.T

    deviations = stats.class_means - stats.global_mean[:, None]
    between = (deviations * stats.counts) @ deviations.T

    if stats.flavor == Flavor.SINGLE:
        centered = features - stats.global_mean[:, None]
        total = centered @ centered.T
    else:
        total = between + within

    between, within, total = symmetrize(between), symmetrize(within), symmetrize(total)
    _readonly(between, within, total)
    return ScatterSet(between=between, within=within, total=total, flavor=stats.flavor)


@dataclass(frozen=True, eq=False)
class PairwiseBetweenView:
    """
    Rank-one pairwise between-class scatter B_{k1k2} = d d^T, d = m_k1 - m_k2.

    Pairs are held as a p x P matrix of differences and a length-P weight
    vector n_k1 * n_k2; no p x p pair matrix is ever formed except through
    `materialize`.
    """

    differences: np.ndarray
    weights: np.ndarray
    pairs: Tuple[Tuple[int, int], ...]

    def __iter__(self) -> Iterator[Tuple[Tuple[int, int], np.ndarray, float]]:
        """Yields ((k1, k2), d, n_k1 * n_k2) with 1-based class ids."""
        for index, pair in enumerate(self.pairs):
            yield pair, self.differences[:, index], float(self.weights[index])

    def difference(self, k1: int, k2: int) -> np.ndarray:
        return self.differences[:, self.pairs.index((k1, k2))]

    def materialize(self, k1: int, k2: int) -> np.ndarray:
        d = self.difference(k1, k2)
        return np.outer(d, d)

    def projected_traces(self, G: np.ndarray) -> np.ndarray:
        """Tr(G^T B_{k1k2} G) = ||G^T d||^2 for every pair."""
        projected = np.asarray(G).T @ self.differences
        return np.sum(projected * projected, axis=0)

    def full_traces(self) -> np.ndarray:
        """Tr(B_{k1k2}) = ||d||^2 for every pair."""
        return np.sum(self.differences * self.differences, axis=0)


def pairwise_between_view(stats: ClassStats) -> PairwiseBetweenView:
    """Pairwise between-class view for all class pairs k1 < k2."""
    K = stats.class_count
    if K < 2:
        raise InsufficientClasses(K)
    pairs: List[Tuple[int, int]] = []
    columns = []
    weights = []
    for k1 in range(K - 1):
        for k2 in range(k1 + 1, K):
            pairs.append((k1 + 1, k2 + 1))
            columns.append(stats.class_means[:, k1] - stats.class_means[:, k2])
            weights.append(stats.counts[k1] * stats.counts[k2])
    differences = np.column_stack(columns)
    weights = np.asarray(weights, dtype=float)
    _readonly(differences, weights)
    return PairwiseBetweenView(differences=differences, weights=weights, pairs=tuple(pairs))


def min_pair_distance(view: PairwiseBetweenView, G: np.ndarray) -> float:
    """min over pairs of Tr(G^T B_{k1k2} G)."""
    return float(np.min(view.projected_traces(G)))


def pairwise_arithmetic_objective(view: PairwiseBetweenView, G: np.ndarray) -> float:
    """Sum of n_k1 n_k2 Tr(G^T B_{k1k2} G): the arithmetic pairwise criterion."""
    return float(np.dot(view.weights, view.projected_traces(G)))


def dataset_scatter(dataset: Dataset) -> Tuple[ClassStats, ScatterSet]:
    stats = compute_class_stats(dataset)
    return stats, compute_scatter(stats, dataset)
