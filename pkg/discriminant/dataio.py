"""
CSV datasets, projection matrices and report documents.

Dataset files hold one point per row: feature columns plus either a `label`
column (single-label, ids 1..K) or `label_1..label_K` indicator columns
(multi-label). Row numbers in diagnostics count data rows from 1.
"""
import json
import logging
import os
import re
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from .datasets import Dataset, LabeledDataset, MultiLabelDataset
from .exceptions import (
    DataFileError,
    EmptyClass,
    InvalidDataset,
    InvalidLabel,
    MalformedIndicator,
    MissingLabel,
    NonNumericFeature,
    RowLengthMismatch,
    UnlabeledRow,
)
from .json_utils import dumps
from .linalg import ORTHONORMALITY_TOLERANCE, Projection, orthonormality_error
from .schema import Flavor

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
_LABEL_ID = re.compile(r"[0-9]+")
_FIELD_COUNT_ERROR = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


class CsvSchema(BaseModel):
    """Which columns carry labels. flavor None means: decide from the header."""
    model_config = ConfigDict(frozen=True)

    flavor: Optional[Flavor] = None
    label_column: str = "label"
    indicator_prefix: str = "label_"


class CsvDatasetLoader:
    """Reads and validates one dataset file."""

    def __init__(self, path: Union[str, Path], schema: Optional[CsvSchema] = None):
        self.path = Path(path)
        self.schema = schema or CsvSchema()
        self.frame = self._load_frame()

    def _load_frame(self) -> pd.DataFrame:
        if not os.path.exists(self.path):
            raise DataFileError(self.path, "file not found")
        logger.info(f"Loading dataset from {self.path}")
        try:
            frame = pd.read_csv(self.path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError:
            raise DataFileError(self.path, "file is empty")
        except pd.errors.ParserError as error:
            match = _FIELD_COUNT_ERROR.search(str(error))
            if match:
                expected, line, found = (int(g) for g in match.groups())
                raise RowLengthMismatch(line - 1, expected, found)
            raise DataFileError(self.path, f"unreadable CSV ({error})")
        except (OSError, UnicodeDecodeError) as error:
            raise DataFileError(self.path, str(error))

        # short rows come back padded with NaN
        short = frame.isna().any(axis=1).to_numpy()
        if short.any():
            row = int(np.argmax(short))
            raise RowLengthMismatch(row + 1, frame.shape[1], int(frame.iloc[row].notna().sum()))
        logger.info(f"Loaded {len(frame)} rows, {frame.shape[1]} columns")
        return frame

    def flavor(self) -> Flavor:
        if self.schema.flavor is not None:
            return self.schema.flavor
        columns = list(self.frame.columns)
        if self.schema.label_column in columns:
            return Flavor.SINGLE
        if any(c.startswith(self.schema.indicator_prefix) for c in columns):
            return Flavor.MULTI
        raise InvalidDataset(
            f"{self.path}: no '{self.schema.label_column}' column and no "
            f"'{self.schema.indicator_prefix}*' indicator columns"
        )

    def _label_columns(self, flavor: Flavor) -> List[str]:
        if flavor == Flavor.SINGLE:
            if self.schema.label_column not in self.frame.columns:
                raise InvalidDataset(f"{self.path}: missing label column '{self.schema.label_column}'")
            return [self.schema.label_column]
        columns = [c for c in self.frame.columns if c.startswith(self.schema.indicator_prefix)]
        if not columns:
            raise InvalidDataset(f"{self.path}: no '{self.schema.indicator_prefix}*' indicator columns")
        return columns

    def _features(self, columns: List[str]) -> np.ndarray:
        if not columns:
            raise InvalidDataset(f"{self.path}: no feature columns")
        raw = self.frame[columns]
        numeric = raw.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(numeric)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise NonNumericFeature(int(row) + 1, columns[col], raw.iat[row, col])
        # float() parsing keeps every written digit
        return raw.astype(float).to_numpy()

    def _labels(self, column: str) -> np.ndarray:
        labels = []
        for row, value in enumerate(self.frame[column], start=1):
            text = value.strip()
            if not text:
                raise MissingLabel(row)
            if not _LABEL_ID.fullmatch(text) or int(text) < 1:
                raise InvalidLabel(row, value)
            labels.append(int(text))
        return np.asarray(labels, dtype=np.int64)

    def _indicator(self, columns: List[str]) -> np.ndarray:
        raw = self.frame[columns].apply(lambda s: s.str.strip())
        valid = raw.isin(["0", "1"]).to_numpy()
        if not valid.all():
            row, col = np.argwhere(~valid)[0]
            raise MalformedIndicator(int(row) + 1, columns[col], self.frame[columns].iat[row, col])
        indicator = (raw.to_numpy() == "1").astype(float)
        unlabeled = indicator.sum(axis=1) == 0
        if unlabeled.any():
            raise UnlabeledRow(int(np.argmax(unlabeled)) + 1)
        empty = indicator.sum(axis=0) == 0
        if empty.any():
            col = int(np.argmax(empty))
            raise EmptyClass(col + 1, f"column {columns[col]}")
        return indicator

    def load(self) -> Dataset:
        flavor = self.flavor()
        label_columns = self._label_columns(flavor)
        feature_columns = [c for c in self.frame.columns if c not in label_columns]
        if flavor == Flavor.MULTI:
            # stray single-label column is not a feature
            feature_columns = [c for c in feature_columns if c != self.schema.label_column]
        features = self._features(feature_columns).T

        if flavor == Flavor.SINGLE:
            dataset = LabeledDataset(features, self._labels(label_columns[0]))
        else:
            dataset = MultiLabelDataset(features, self._indicator(label_columns))
        if dataset.class_count < 2:
            raise InvalidDataset(f"{self.path}: at least 2 classes are required, found {dataset.class_count}")
        logger.info(
            f"Dataset {self.path.name}: {flavor.value}, n={dataset.n_points}, "
            f"p={dataset.dimension}, K={dataset.class_count}"
        )
        return dataset


def load_csv(path: Union[str, Path], schema: Optional[CsvSchema] = None) -> Dataset:
    return CsvDatasetLoader(path, schema).load()


def _feature_names(p: int) -> List[str]:
    return [f"x_{j}" for j in range(1, p + 1)]


def _label_frame(dataset: Dataset) -> pd.DataFrame:
    if dataset.flavor == Flavor.SINGLE:
        return pd.DataFrame({"label": dataset.labels})
    columns = [f"label_{j}" for j in range(1, dataset.class_count + 1)]
    return pd.DataFrame(dataset.indicator.astype(np.int64), columns=columns)


def _write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as error:
        raise DataFileError(path, f"cannot write ({error})")
    logger.debug(f"Wrote {len(frame)} rows to {path}")


def save_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    features = pd.DataFrame(dataset.features.T, columns=_feature_names(dataset.dimension))
    _write_frame(pd.concat([features, _label_frame(dataset)], axis=1), path)


def dump_projection(dataset: Dataset, projection: Projection, path: Union[str, Path]) -> None:
    """Projected coordinates G^T x per point (columns dim_1..dim_k) followed by the labels."""
    coordinates = projection.transform(dataset.features).T
    columns = [f"dim_{j}" for j in range(1, projection.subspace_dim + 1)]
    _write_frame(pd.concat([pd.DataFrame(coordinates, columns=columns), _label_frame(dataset)], axis=1), path)


def save_projection_matrix(projection: Projection, path: Union[str, Path]) -> None:
    columns = [f"g_{j}" for j in range(1, projection.subspace_dim + 1)]
    _write_frame(pd.DataFrame(projection.matrix, columns=columns), path)


def load_projection_matrix(path: Union[str, Path]) -> Projection:
    """A stored p x k matrix; it is treated as constrained when its columns are orthonormal."""
    path = Path(path)
    if not path.exists():
        raise DataFileError(path, "file not found")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        matrix = frame.astype(float).to_numpy()
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as error:
        raise DataFileError(path, f"not a projection matrix ({error})")
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise DataFileError(path, "not a projection matrix (no columns)")
    return Projection(matrix, constrained=orthonormality_error(matrix) <= ORTHONORMALITY_TOLERANCE)


def write_report(report, path: Union[str, Path]) -> None:
    """Serialize a report model (or a plain document) as indented JSON."""
    document = report.to_document() if hasattr(report, "to_document") else report
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(document), encoding="utf-8")
    except OSError as error:
        raise DataFileError(path, f"cannot write report ({error})")
    logger.info(f"Report written to {path}")


def read_report(path: Union[str, Path]) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataFileError(path, "file not found")
    except json.JSONDecodeError as error:
        raise DataFileError(path, f"not a report document ({error})")
