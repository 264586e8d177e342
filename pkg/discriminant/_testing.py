"""
Shared fixtures and brute-force references for the test modules.

The references are written as plain loops over points, pairs and neighbours
so they share no code with the vectorized implementations they check.
"""
from typing import Callable, Dict, Tuple

import numpy as np

from .datasets import Dataset, LabeledDataset, MultiLabelDataset


def random_labeled(rng: np.random.Generator, n: int, p: int, class_count: int,
                   spread: float = 3.0) -> LabeledDataset:
    """Gaussian classes around random centers; every class has at least one member."""
    labels = np.concatenate([np.arange(1, class_count + 1),
                             rng.integers(1, class_count + 1, size=n - class_count)])
    labels = rng.permutation(labels)
    centers = spread * rng.standard_normal((p, class_count))
    features = centers[:, labels - 1] + rng.standard_normal((p, n))
    return LabeledDataset(features, labels, class_count)


def random_multilabel(rng: np.random.Generator, n: int, p: int, label_count: int) -> MultiLabelDataset:
    indicator = (rng.random((n, label_count)) < 0.35).astype(float)
    for row in np.flatnonzero(indicator.sum(axis=1) == 0):
        indicator[row, rng.integers(label_count)] = 1.0
    for column in np.flatnonzero(indicator.sum(axis=0) == 0):
        indicator[column % n, column] = 1.0
    prototypes = 3.0 * rng.standard_normal((p, label_count))
    features = prototypes @ indicator.T + rng.standard_normal((p, n))
    return MultiLabelDataset(features, indicator)


def random_orthonormal(rng: np.random.Generator, p: int, k: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((p, k)))
    return q


# ---------- loop references ----------

def loop_class_means(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts, class means and global mean accumulated point by point."""
    p, n, K = dataset.dimension, dataset.n_points, dataset.class_count
    indicator = dataset.indicator
    counts = np.zeros(K)
    sums = np.zeros((p, K))
    for i in range(n):
        for k in range(K):
            if indicator[i, k]:
                counts[k] += 1
                sums[:, k] += dataset.features[:, i]
    means = sums / counts
    if dataset.flavor.value == "single-label":
        global_mean = dataset.features.sum(axis=1) / n
    else:
        global_mean = sums.sum(axis=1) / counts.sum()
    return counts, means, global_mean


def loop_scatter(dataset: Dataset) -> Dict[str, np.ndarray]:
    """Between, within and pairwise-summed scatter from explicit outer products."""
    counts, means, global_mean = loop_class_means(dataset)
    p, K = dataset.dimension, dataset.class_count
    indicator = dataset.indicator
    within = np.zeros((p, p))
    for i in range(dataset.n_points):
        for k in range(K):
            if indicator[i, k]:
                d = dataset.features[:, i] - means[:, k]
                within += np.outer(d, d)
    between = np.zeros((p, p))
    for k in range(K):
        d = means[:, k] - global_mean
        between += counts[k] * np.outer(d, d)
    pairwise = np.zeros((p, p))
    for k1 in range(K - 1):
        for k2 in range(k1 + 1, K):
            d = means[:, k1] - means[:, k2]
            pairwise += counts[k1] * counts[k2] * np.outer(d, d)
    return {"within": within, "between": between, "pairwise": pairwise}


def loop_objective(G: np.ndarray, dataset: Dataset, gamma: float) -> float:
    """The harmonic objective with every B_{k1k2} formed as a dense p x p matrix."""
    counts, means, _ = loop_class_means(dataset)
    within = loop_scatter(dataset)["within"]
    value = gamma * np.trace(G.T @ within @ G)
    K = dataset.class_count
    for k1 in range(K - 1):
        for k2 in range(k1 + 1, K):
            d = means[:, k1] - means[:, k2]
            B = np.outer(d, d)
            value += counts[k1] * counts[k2] / np.trace(G.T @ B @ G)
    return float(value)


def finite_difference_gradient(function: Callable[[np.ndarray], float], G: np.ndarray,
                               step: float = 1e-5) -> np.ndarray:
    """Central differences, one entry at a time."""
    gradient = np.zeros_like(G)
    for index in np.ndindex(*G.shape):
        forward = G.copy()
        backward = G.copy()
        forward[index] += step
        backward[index] -= step
        gradient[index] = (function(forward) - function(backward)) / (2 * step)
    return gradient


def angle_grid(count: int = 1800) -> np.ndarray:
    """Unit vectors (cos t, sin t) for t on a uniform grid over [0, pi)."""
    angles = np.linspace(0.0, np.pi, count, endpoint=False)
    return np.stack([np.cos(angles), np.sin(angles)])


def loop_knn(train: np.ndarray, train_labels: np.ndarray, test: np.ndarray, knn: int) -> np.ndarray:
    """Sort neighbours by (distance, index), vote, break ties by nearest member then class id."""
    predicted = []
    for j in range(test.shape[1]):
        distances = [(float(np.linalg.norm(test[:, j] - train[:, i])), i) for i in range(train.shape[1])]
        distances.sort()
        nearest = distances[:knn]
        votes: Dict[int, int] = {}
        closest: Dict[int, float] = {}
        for distance, i in nearest:
            label = int(train_labels[i])
            votes[label] = votes.get(label, 0) + 1
            closest[label] = min(closest.get(label, np.inf), distance)
        top = max(votes.values())
        tied = [label for label in votes if votes[label] == top]
        best = min(closest[label] for label in tied)
        predicted.append(min(label for label in tied if closest[label] <= best + 1e-12))
    return np.asarray(predicted)


def loop_f1(predicted: np.ndarray, truth: np.ndarray) -> Tuple[float, float]:
    """Macro and micro F1 of single-label predictions from hand-counted confusions."""
    labels = sorted(set(predicted.tolist()) | set(truth.tolist()))
    per_label = []
    tp_all = fp_all = fn_all = 0
    for label in labels:
        tp = fp = fn = 0
        for guess, actual in zip(predicted, truth):
            if guess == label and actual == label:
                tp += 1
            elif guess == label:
                fp += 1
            elif actual == label:
                fn += 1
        per_label.append(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)
        tp_all, fp_all, fn_all = tp_all + tp, fp_all + fp, fn_all + fn
    micro = 2 * tp_all / (2 * tp_all + fp_all + fn_all)
    return float(np.mean(per_label)), micro
