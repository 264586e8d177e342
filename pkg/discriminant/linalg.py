"""
Dense symmetric eigen-helpers and the Projection type.

One numerical-rank rule is used everywhere: an eigenvalue below
cutoff * largest eigenvalue counts as zero.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from mcdabench import settings

from .exceptions import InvalidProjection, RankCollapse

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-8
COLLAPSE_RATIO = 1e-12
TIE_TOLERANCE = 1e-13


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def eigh_descending(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix, largest eigenvalue first."""
    values, vectors = scipy.linalg.eigh(symmetrize(matrix))
    return values[::-1], vectors[:, ::-1]


def numerical_rank(matrix: np.ndarray, cutoff: float = settings.RANK_CUTOFF) -> int:
    values = scipy.linalg.eigvalsh(symmetrize(matrix))
    if values.size == 0 or values.max() <= 0:
        return 0
    return int(np.sum(values > cutoff * values.max()))


def null_space(matrix: np.ndarray, cutoff: float = settings.RANK_CUTOFF) -> np.ndarray:
    """
    Orthonormal basis of the numerical null space of a PSD matrix.

    A numerically zero matrix has the whole space as null space.
    """
    values, vectors = scipy.linalg.eigh(symmetrize(matrix))
    if values.max() <= 0:
        return vectors
    return vectors[:, values < cutoff * values.max()]


def inverse_root_factor(values: np.ndarray, vectors: np.ndarray,
                        cutoff: float = settings.RANK_CUTOFF) -> np.ndarray:
    """
    W = U_r diag(1/sqrt(lambda_r)) so that W W^T is the pseudo-inverse of
    U diag(lambda) U^T, keeping eigenvalues above cutoff * largest.
    """
    if values.size == 0 or values.max() <= 0:
        return np.zeros((vectors.shape[0], 0))
    keep = values > cutoff * values.max()
    return vectors[:, keep] / np.sqrt(values[keep])


def top_eigenvectors(matrix: np.ndarray, k: int,
                     tie_breaker: Optional[np.ndarray] = None) -> np.ndarray:
    """
    The k leading eigenvectors of a symmetric matrix.

    When the k-th eigenvalue is tied with its neighbours and a tie_breaker
    matrix is given, the tied eigenspace is re-diagonalised against it and
    its directions are taken in ascending order of tie_breaker.
    """
    values, vectors = eigh_descending(matrix)
    if tie_breaker is None or k >= values.size:
        return vectors[:, :k]

    tolerance = TIE_TOLERANCE * max(float(np.max(np.abs(values))), 1.0)
    tied = np.abs(values - values[k - 1]) <= tolerance
    if tied.sum() <= 1 or not tied[k]:
        return vectors[:, :k]

    first = int(np.argmax(tied))
    needed = k - first
    block = vectors[:, tied]
    inner = block.T @ tie_breaker @ block
    _, rotation = scipy.linalg.eigh(symmetrize(inner))
    chosen = block @ rotation[:, :needed]
    return np.hstack([vectors[:, :first], chosen])


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Canonical angles between the column spaces of a and b (radians)."""
    return scipy.linalg.subspace_angles(a, b)


@dataclass(frozen=True, eq=False)
class Projection:
    """
    A p x k transformation G.

    Constrained projections satisfy G^T G = I; the uncorrelated LDA variants
    produce unconstrained ones.
    """

    matrix: np.ndarray
    constrained: bool = True
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, copy=True)
        if matrix.ndim != 2:
            raise InvalidProjection(f"projection must be a p x k matrix, got shape {matrix.shape}")
        p, k = matrix.shape
        if not 1 <= k <= p:
            raise InvalidProjection(f"subspace dimension k={k} must lie in 1..p={p}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidProjection("projection contains non-finite entries")
        if self.constrained:
            drift = orthonormality_error(matrix)
            if drift > ORTHONORMALITY_TOLERANCE:
                raise InvalidProjection(f"columns are not orthonormal (||G^T G - I||_F = {drift:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.matrix.shape[1]

    def transform(self, features: np.ndarray) -> np.ndarray:
        """Project p x n features to k x n coordinates G^T X."""
        features = np.asarray(features, dtype=float)
        if features.shape[0] != self.dimension:
            raise InvalidProjection(
                f"features have dimension {features.shape[0]}, projection expects {self.dimension}"
            )
        return self.matrix.T @ features

    def with_note(self, note: str) -> "Projection":
        return Projection(self.matrix, self.constrained, self.notes + (note,))


def orthonormality_error(matrix: np.ndarray) -> float:
    k = matrix.shape[1]
    return float(np.linalg.norm(matrix.T @ matrix - np.eye(k), "fro"))


def orthonormalize(matrix: np.ndarray) -> Projection:
    """
    The polar factor U V^T of the thin SVD M = U S V^T.

    It is the orthonormal matrix nearest to M in Frobenius norm and spans the
    same column space.

    Raises:
        RankCollapse: if sigma_min / sigma_max < 1e-12
    """
    matrix = np.asarray(matrix, dtype=float)
    u, s, vt = scipy.linalg.svd(matrix, full_matrices=False)
    ratio = float(s[-1] / s[0]) if s.size and s[0] > 0 else 0.0
    if ratio < COLLAPSE_RATIO:
        raise RankCollapse(ratio)
    return Projection(u @ vt)


def orthonormal_basis(matrix: np.ndarray) -> np.ndarray:
    """QR-based orthonormal basis of the column space (first columns kept in order)."""
    q, _ = scipy.linalg.qr(matrix, mode="economic")
    return q

