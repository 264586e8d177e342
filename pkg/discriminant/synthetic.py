"""
Seeded synthetic datasets.

Every generator is a pure function of its spec (seed included).
"""
import logging
from typing import Dict, Optional, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel, ValidationError
from scipy.spatial.distance import pdist

from .datasets import Dataset, LabeledDataset, MultiLabelDataset
from .exceptions import ConfigError
from .linalg import orthonormal_basis
from .schema import MixtureSpec, MultiLabelSpec, ToyGenSpec

logger = logging.getLogger(__name__)

GeneratorSpec = Union[ToyGenSpec, MixtureSpec, MultiLabelSpec]


def _class_labels(class_count: int, points_per_class: int) -> np.ndarray:
    return np.repeat(np.arange(1, class_count + 1), points_per_class)


def generate_nullspace_toy(spec: Optional[ToyGenSpec] = None) -> LabeledDataset:
    """
    Class centers in a random intrinsic subspace of R^p plus isotropic noise.

    With noise_scale = 0 every point is its class center and S_w = 0.

    Raises:
        ConfigError: noise_scale = 0 but n - K >= p
    """
    spec = spec or ToyGenSpec()
    K, m, p = spec.class_count, spec.points_per_class, spec.ambient_dim
    n = K * m
    if spec.noise_scale == 0 and n - K >= p:
        raise ConfigError(
            f"noiseless toy needs n-K < p for a null space of S_w to exist "
            f"(n-K={n - K}, p={p}; guaranteed null dimension p-(n-K)={p - (n - K)})"
        )

    rng = np.random.default_rng(spec.seed)
    basis = orthonormal_basis(rng.standard_normal((p, spec.intrinsic_dim)))
    centers = basis @ (spec.class_center_scale * rng.standard_normal((spec.intrinsic_dim, K)))
    labels = _class_labels(K, m)
    features = centers[:, labels - 1]
    if spec.noise_scale > 0:
        features = features + spec.noise_scale * rng.standard_normal((p, n))
    logger.debug(f"null-space toy: n={n} p={p} K={K} noise={spec.noise_scale}")
    return LabeledDataset(features, labels, K)


def generate_gaussian_mixture(spec: Optional[MixtureSpec] = None) -> LabeledDataset:
    """
    Isotropic Gaussian classes whose centers are rescaled so the closest
    pair sits exactly `separation` apart.
    """
    spec = spec or MixtureSpec()
    K, m, p = spec.class_count, spec.points_per_class, spec.dim
    rng = np.random.default_rng(spec.seed)

    centers = rng.standard_normal((p, K))
    if K > 1 and spec.separation > 0:
        centers *= spec.separation / float(np.min(pdist(centers.T)))
    else:
        centers = np.zeros((p, K))

    labels = _class_labels(K, m)
    features = centers[:, labels - 1] + spec.noise_scale * rng.standard_normal((p, K * m))
    return LabeledDataset(features, labels, K)


def generate_multilabel_synthetic(spec: Optional[MultiLabelSpec] = None) -> MultiLabelDataset:
    """
    Points are noisy sums of the prototype vectors of their labels.

    At least `multi_label_fraction` of the rows carry two or three labels and
    every label is used at least once.
    """
    spec = spec or MultiLabelSpec()
    L, n = spec.label_count, spec.n
    rng = np.random.default_rng(spec.seed)
    prototypes = spec.prototype_scale * rng.standard_normal((spec.dim, L))

    multi_rows = int(np.ceil(spec.multi_label_fraction * n))
    indicator = np.zeros((n, L))
    for row in range(n):
        size = int(rng.integers(2, min(3, L) + 1)) if row < multi_rows else 1
        indicator[row, rng.choice(L, size=size, replace=False)] = 1.0
    indicator = indicator[rng.permutation(n)]
    for column in np.flatnonzero(indicator.sum(axis=0) == 0):
        indicator[column % n, column] = 1.0

    features = prototypes @ indicator.T + spec.noise_scale * rng.standard_normal((spec.dim, n))
    dataset = MultiLabelDataset(features, indicator)
    logger.debug(f"multi-label synthetic: n={n} L={L} multi-label rows {dataset.multi_label_fraction():.2f}")
    return dataset


# ---------- --generate specs ----------

_GENERATORS: Dict[str, Tuple[Type[BaseModel], Dict[str, str]]] = {
    "toy": (ToyGenSpec, {
        "classes": "class_count", "points": "points_per_class", "dim": "ambient_dim",
        "intrinsic": "intrinsic_dim", "scale": "class_center_scale", "noise": "noise_scale", "seed": "seed",
    }),
    "mixture": (MixtureSpec, {
        "classes": "class_count", "points": "points_per_class", "dim": "dim",
        "separation": "separation", "noise": "noise_scale", "seed": "seed",
    }),
    "multilabel": (MultiLabelSpec, {
        "labels": "label_count", "n": "n", "dim": "dim", "scale": "prototype_scale",
        "noise": "noise_scale", "fraction": "multi_label_fraction", "seed": "seed",
    }),
}


def parse_generator_spec(text: str, default_seed: Optional[int] = None) -> GeneratorSpec:
    """
    Parse `kind[:key=value,...]`, e.g. `mixture:classes=7,dim=50,seed=3`.

    Kinds are toy, mixture and multilabel. A seed not given in the text
    falls back to `default_seed`.
    """
    kind, _, params = text.strip().partition(":")
    if kind not in _GENERATORS:
        raise ConfigError(f"unknown generator {kind!r}; expected one of {', '.join(_GENERATORS)}")
    model, aliases = _GENERATORS[kind]

    values = {}
    for item in filter(None, (part.strip() for part in params.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in aliases:
            raise ConfigError(f"invalid {kind} generator parameter {item!r}; known keys: {', '.join(aliases)}")
        values[aliases[key]] = value.strip()
    if "seed" not in values and default_seed is not None:
        values["seed"] = default_seed

    try:
        return model(**values)
    except ValidationError as error:
        raise ConfigError(f"invalid {kind} generator spec: {error.errors()[0]['msg']}")


def generate(spec: GeneratorSpec) -> Dataset:
    if isinstance(spec, ToyGenSpec):
        return generate_nullspace_toy(spec)
    if isinstance(spec, MixtureSpec):
        return generate_gaussian_mixture(spec)
    return generate_multilabel_synthetic(spec)
