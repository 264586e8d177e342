"""
Dataset containers.

Features are stored column-per-point (p x n). Both containers validate their
invariants on construction and are read-only afterwards.
"""
import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .exceptions import (
    EmptyClass,
    InvalidDataset,
    InvalidLabel,
    MalformedIndicator,
    NonFiniteFeatures,
    UnlabeledRow,
)
from .schema import Flavor

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def _check_features(features) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2:
        raise InvalidDataset(f"features must be a p x n matrix, got shape {features.shape}")
    p, n = features.shape
    if p < 1:
        raise InvalidDataset("features need at least one dimension")
    if n < 2:
        raise InvalidDataset(f"at least 2 points are required, got {n}")
    if not np.all(np.isfinite(features)):
        bad = np.argwhere(~np.isfinite(features))[0]
        raise NonFiniteFeatures(f"non-finite feature at dimension {bad[0]}, point {bad[1]}")
    return features


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Single-label data: p x n features and a class id in 1..K per point."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int = field(default=0)

    def __post_init__(self):
        features = _check_features(self.features)
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != features.shape[1]:
            raise InvalidDataset(
                f"expected {features.shape[1]} labels, got shape {labels.shape}"
            )
        if labels.dtype.kind == "f":
            if not np.all(np.isfinite(labels)) or np.any(labels != np.round(labels)):
                row = int(np.argmax(~np.isfinite(labels) | (labels != np.round(labels)))) + 1
                raise InvalidLabel(row, labels[row - 1])
        elif labels.dtype.kind not in "iu":
            raise InvalidDataset(f"labels must be integers, got dtype {labels.dtype}")
        labels = labels.astype(np.int64)
        if np.any(labels < 1):
            row = int(np.argmax(labels < 1)) + 1
            raise InvalidLabel(row, int(labels[row - 1]))

        class_count = int(self.class_count) or int(labels.max())
        if labels.max() > class_count:
            raise InvalidDataset(f"label {labels.max()} exceeds class_count={class_count}")
        counts = np.bincount(labels, minlength=class_count + 1)[1:]
        if np.any(counts == 0):
            raise EmptyClass(int(np.argmax(counts == 0)) + 1)

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "class_count", class_count)

    flavor = Flavor.SINGLE

    @property
    def dimension(self) -> int:
        return self.features.shape[0]

    @property
    def n_points(self) -> int:
        return self.features.shape[1]

    @property
    def indicator(self) -> np.ndarray:
        """One-hot n x K indicator matrix."""
        indicator = np.zeros((self.n_points, self.class_count))
        indicator[np.arange(self.n_points), self.labels - 1] = 1.0
        return indicator

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count + 1)[1:]

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[:, indices], self.labels[indices], self.class_count)

    def with_features(self, features: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.class_count)


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """Multi-label data: p x n features and a binary n x K indicator matrix Y."""

    features: np.ndarray
    indicator: np.ndarray

    def __post_init__(self):
        features = _check_features(self.features)
        indicator = np.asarray(self.indicator)
        if indicator.ndim != 2 or indicator.shape[0] != features.shape[1]:
            raise InvalidDataset(
                f"indicator must have {features.shape[1]} rows, got shape {indicator.shape}"
            )
        if indicator.shape[1] < 1:
            raise InvalidDataset("indicator needs at least one label column")
        binary = (indicator == 0) | (indicator == 1)
        if not np.all(binary):
            row, col = np.argwhere(~binary)[0]
            raise MalformedIndicator(int(row) + 1, f"label_{col + 1}", indicator[row, col])
        indicator = indicator.astype(float)
        row_sums = indicator.sum(axis=1)
        if np.any(row_sums == 0):
            raise UnlabeledRow(int(np.argmax(row_sums == 0)) + 1)
        col_sums = indicator.sum(axis=0)
        if np.any(col_sums == 0):
            raise EmptyClass(int(np.argmax(col_sums == 0)) + 1)
        if not np.any(row_sums >= 2):
            logger.info("multi-label dataset has no row with two or more labels")

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "indicator", _frozen(indicator))

    flavor = Flavor.MULTI

    @property
    def dimension(self) -> int:
        return self.features.shape[0]

    @property
    def n_points(self) -> int:
        return self.features.shape[1]

    @property
    def class_count(self) -> int:
        return self.indicator.shape[1]

    def class_sizes(self) -> np.ndarray:
        return self.indicator.sum(axis=0)

    def multi_label_fraction(self) -> float:
        """Fraction of rows carrying two or more labels."""
        return float(np.mean(self.indicator.sum(axis=1) >= 2))

    def subset(self, indices: Sequence[int]) -> "MultiLabelDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return MultiLabelDataset(self.features[:, indices], self.indicator[indices])

    def with_features(self, features: np.ndarray) -> "MultiLabelDataset":
        return MultiLabelDataset(features, self.indicator)


Dataset = Union[LabeledDataset, MultiLabelDataset]


def as_multilabel(dataset: LabeledDataset) -> MultiLabelDataset:
    """The one-hot indicator view of a single-label dataset."""
    return MultiLabelDataset(dataset.features, dataset.indicator)
