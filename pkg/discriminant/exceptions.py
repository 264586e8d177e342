"""
Error hierarchy for the discriminant package.

Each family carries the exit code the CLI maps it to.
"""
from typing import Optional, Sequence


class DiscriminantError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1

    @property
    def name(self) -> str:
        return type(self).__name__


# ---------- configuration (exit 2) ----------

class ConfigError(DiscriminantError):
    """Raised when a run configuration cannot be resolved."""

    exit_code = 2


# ---------- data (exit 3) ----------

class DataError(DiscriminantError):
    """Raised when a dataset or data file violates the dataset invariants."""

    exit_code = 3


class InvalidDataset(DataError):
    """Shape or size invariants of a dataset do not hold."""


class NonFiniteFeatures(DataError):
    """The feature matrix contains NaN or infinite values."""


class EmptyClass(DataError):
    def __init__(self, class_id, detail: str = ""):
        self.class_id = class_id
        message = f"class {class_id} has no members"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class UnlabeledRow(DataError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} carries no label (indicator row is all zeros)")


class MalformedIndicator(DataError):
    def __init__(self, row: int, column: str, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: indicator value {value!r} is not 0 or 1")


class NonNumericFeature(DataError):
    def __init__(self, row: int, column: str, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: feature value {value!r} is not a finite number")


class MissingLabel(DataError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row}: label is missing")


class InvalidLabel(DataError):
    def __init__(self, row: int, value):
        self.row = row
        self.value = value
        super().__init__(f"row {row}: label {value!r} is not a positive integer class id")


class RowLengthMismatch(DataError):
    def __init__(self, row: int, expected: int, found: Optional[int] = None):
        self.row = row
        self.expected = expected
        self.found = found
        found_text = "fewer" if found is None else str(found)
        super().__init__(f"row {row}: expected {expected} fields, found {found_text}")


class ClassTooSmallForFolds(DataError):
    def __init__(self, class_id, size: int, fold_count: int):
        self.class_id = class_id
        self.size = size
        self.fold_count = fold_count
        super().__init__(
            f"class {class_id} has {size} members, fewer than the {fold_count} folds requested"
        )


class InsufficientClasses(DataError):
    def __init__(self, class_count: int):
        self.class_count = class_count
        super().__init__(f"at least 2 classes are required, dataset has {class_count}")


class InvalidProjection(DataError):
    """A projection matrix has the wrong shape or lost orthonormality."""


class DataFileError(DataError):
    def __init__(self, path, detail: str):
        self.path = str(path)
        super().__init__(f"{path}: {detail}")


# ---------- method infeasible (exit 4) ----------

class MethodInfeasible(DiscriminantError):
    """The requested method has no solution for this data or subspace size."""

    exit_code = 4


class NullSpaceAbsent(MethodInfeasible):
    def __init__(self, null_dim: int, n: int, class_count: int, p: int):
        self.null_dim = null_dim
        self.n = n
        self.class_count = class_count
        self.p = p
        self.bound = p - (n - class_count)
        super().__init__(
            f"the null space of S_w does not exist (d0={null_dim}, n={n}, K={class_count}, "
            f"p={p}; guaranteed dimension p-(n-K)={self.bound})"
        )


class NullSpaceTooSmall(MethodInfeasible):
    def __init__(self, null_dim: int, k: int):
        self.null_dim = null_dim
        self.k = k
        super().__init__(f"null space of S_w has dimension {null_dim} < requested k={k}")


class SubspaceRankExceeded(MethodInfeasible):
    def __init__(self, k: int, rank: int, what: str = "rank(S_b)"):
        self.k = k
        self.rank = rank
        super().__init__(f"requested k={k} exceeds {what}={rank}")


class InitRankExceeded(SubspaceRankExceeded):
    def __init__(self, k: int, rank: int):
        super().__init__(k, rank, what="K-1 (classical LDA initialization)")


class TrainingLabelsTooFew(MethodInfeasible):
    def __init__(self, label_count: int, point_count: int):
        self.label_count = label_count
        self.point_count = point_count
        super().__init__(
            f"a training split of {point_count} points carries only {label_count} label(s); at least 2 are required"
        )


class WithinScatterDegenerate(MethodInfeasible):
    def __init__(self):
        super().__init__("Tr(S_w) = 0: the balancing gamma is undefined, supply gamma explicitly")


class CoincidentClassMeans(MethodInfeasible):
    def __init__(self, pairs: Sequence):
        self.pairs = list(pairs)
        listed = ", ".join(f"({a},{b})" for a, b in self.pairs)
        super().__init__(f"classes with coincident means: {listed}")


# ---------- numerical failure (exit 5) ----------

class NumericalFailure(DiscriminantError):
    exit_code = 5


class RankCollapse(NumericalFailure):
    def __init__(self, ratio: float):
        self.ratio = ratio
        super().__init__(f"matrix lost column rank (sigma_min/sigma_max = {ratio:.3e})")


class NumericalBreakdown(NumericalFailure):
    def __init__(self, iteration: int, value):
        self.iteration = iteration
        self.value = value
        super().__init__(f"objective became non-finite ({value}) at iteration {iteration}")


class TuningFailed(NumericalFailure):
    def __init__(self, parameter: str, errors: Sequence[str]):
        self.parameter = parameter
        self.errors = list(errors)
        super().__init__(
            f"every {parameter} grid point failed; first error: {self.errors[0] if self.errors else 'n/a'}"
        )
