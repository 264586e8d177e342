"""
Schema definitions for solver configuration, run configuration and reports.
Centralized enums and validation rules.
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mcdabench import settings


class Flavor(str, Enum):
    """Dataset flavor."""
    SINGLE = "single-label"
    MULTI = "multi-label"


class Method(str, Enum):
    """Dimensionality-reduction methods the harness can fit."""
    MCDA = "mcda"
    LDA = "lda"
    NLDA = "nlda"
    TRACE_RATIO = "trace-ratio"
    RLDA = "rlda"
    ULDA = "ulda"
    OLDA = "olda"
    OCM = "ocm"
    PCA = "pca"


# Methods that run on multi-label data (label-weighted scatter matrices)
MULTI_LABEL_METHODS = (Method.MCDA, Method.PCA)


class InitStrategy(str, Enum):
    """How the MCDA gradient descent picks its starting projection."""
    AUTO = "auto"
    CLASSICAL_LDA = "classical-lda"
    TRACE_RATIO = "trace-ratio"
    PROVIDED = "provided"
    RANDOM = "random"


class UnifiedVariant(str, Enum):
    """Members of the four-step generalized LDA framework."""
    RLDA = "rlda"
    ULDA = "ulda"
    OLDA = "olda"
    OCM = "ocm"


class ParameterMode(str, Enum):
    """Symbolic values for gamma / mu."""
    AUTO = "auto"
    TUNE = "tune"


def default_gamma_grid() -> List[float]:
    """Powers of ten from 1e-10 to 1e10 (21 points) unless overridden."""
    return [10.0 ** e for e in range(settings.GAMMA_GRID_MIN_EXP, settings.GAMMA_GRID_MAX_EXP + 1)]


# ---------- configuration ----------

class SolverConfig(BaseModel):
    """Parameters of the MCDA gradient descent."""
    model_config = ConfigDict(frozen=True, use_enum_values=False)

    gamma: Optional[float] = Field(None, gt=0, description="Weight of Tr(G^T S_w G); None selects the balancing default")
    max_iterations: int = Field(settings.MAX_ITERATIONS, gt=0)
    objective_tolerance: float = Field(settings.OBJECTIVE_TOLERANCE, gt=0, description="Relative objective change")
    gradient_tolerance: float = Field(settings.GRADIENT_TOLERANCE, gt=0,
                                      description="Constrained gradient norm relative to J")
    initial_step: float = Field(1.0, gt=0, description="First trial displacement (Frobenius norm)")
    shrink_factor: float = Field(0.5, gt=0, lt=1)
    sufficient_decrease: float = Field(1e-4, gt=0, lt=1, description="Armijo constant")
    max_backtracks: int = Field(60, gt=0)
    reorthonormalize_every: int = Field(settings.REORTHONORMALIZE_EVERY, gt=0)
    pair_trace_floor: Optional[float] = Field(None, gt=0, description="Epsilon; None means 1e-12 * Tr(S_t)")
    init_strategy: InitStrategy = InitStrategy.AUTO
    seed: int = settings.DEFAULT_SEED
    restarts: int = Field(0, ge=0, description="Extra seeded random starts")
    rank_cutoff: float = Field(settings.RANK_CUTOFF, gt=0)


class UnifiedLdaConfig(BaseModel):
    """Configuration of the four-step generalized LDA framework."""
    model_config = ConfigDict(frozen=True)

    variant: UnifiedVariant
    mu: Optional[float] = Field(None, ge=0, description="Regularizer; None means 1e-3 * Tr(S_t) / p")
    apply_qr: Optional[bool] = None
    rank_cutoff: float = Field(settings.RANK_CUTOFF, gt=0)

    @model_validator(mode="before")
    @classmethod
    def force_qr(cls, data):
        # QR is part of the definition of OLDA and excluded from ULDA
        if isinstance(data, dict) and "variant" in data:
            data = dict(data)
            variant = UnifiedVariant(data["variant"])
            if variant == UnifiedVariant.OLDA:
                data["apply_qr"] = True
            elif variant == UnifiedVariant.ULDA:
                data["apply_qr"] = False
            elif data.get("apply_qr") is None:
                data["apply_qr"] = False
        return data

    @model_validator(mode="after")
    def check_mu(self):
        if self.variant in (UnifiedVariant.RLDA, UnifiedVariant.OLDA) and self.mu is not None and self.mu <= 0:
            raise ValueError(f"mu must be positive for {self.variant.value}")
        return self


class ToyGenSpec(BaseModel):
    """Null-space toy: class structure in a low-dimensional subspace of R^p."""
    model_config = ConfigDict(frozen=True)

    class_count: int = Field(3, ge=1)
    points_per_class: int = Field(10, ge=1)
    ambient_dim: int = Field(40, ge=1)
    intrinsic_dim: int = Field(3, ge=1)
    class_center_scale: float = Field(1.0, gt=0)
    noise_scale: float = Field(0.1, ge=0)
    seed: int = settings.DEFAULT_SEED

    @model_validator(mode="after")
    def check_dims(self):
        if self.intrinsic_dim > self.ambient_dim:
            raise ValueError("intrinsic_dim cannot exceed ambient_dim")
        return self


class MixtureSpec(BaseModel):
    """Isotropic Gaussian classes with well-spread centers."""
    model_config = ConfigDict(frozen=True)

    class_count: int = Field(3, ge=1)
    points_per_class: int = Field(30, ge=1)
    dim: int = Field(10, ge=1)
    separation: float = Field(4.0, ge=0)
    noise_scale: float = Field(1.0, gt=0)
    seed: int = settings.DEFAULT_SEED


class MultiLabelSpec(BaseModel):
    """Points built as noisy sums of per-label prototypes."""
    model_config = ConfigDict(frozen=True)

    label_count: int = Field(4, ge=2)
    n: int = Field(120, ge=2)
    dim: int = Field(20, ge=1)
    prototype_scale: float = Field(3.0, gt=0)
    noise_scale: float = Field(0.5, ge=0)
    multi_label_fraction: float = Field(0.4, ge=0.3, le=1.0)
    seed: int = settings.DEFAULT_SEED


class MethodSpec(BaseModel):
    """What to fit on a training split and how to resolve its parameter."""
    model_config = ConfigDict(frozen=True)

    method: Method
    gamma: Union[float, ParameterMode] = ParameterMode.AUTO
    mu: Union[float, ParameterMode] = ParameterMode.AUTO
    solver: SolverConfig = Field(default_factory=SolverConfig)
    grid: Optional[List[float]] = None
    inner_folds: int = Field(settings.INNER_FOLDS, ge=2)
    knn: int = Field(settings.DEFAULT_KNN, ge=1)
    seed: int = settings.DEFAULT_SEED

    @field_validator("gamma", "mu")
    @classmethod
    def check_positive(cls, v):
        if isinstance(v, float) and v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("grid")
    @classmethod
    def check_grid(cls, v):
        if v is not None:
            if not v:
                raise ValueError("grid must not be empty")
            if any(g <= 0 for g in v):
                raise ValueError("grid values must be positive")
        return v


class RunConfig(BaseModel):
    """A fully resolved CLI invocation."""
    model_config = ConfigDict(frozen=True)

    command: str
    data: Optional[Path] = None
    generate: Optional[str] = None
    methods: List[Method] = Field(default_factory=lambda: [Method.MCDA])
    k: Optional[int] = Field(None, ge=1)
    gamma: Union[float, ParameterMode] = ParameterMode.AUTO
    mu: Union[float, ParameterMode] = ParameterMode.AUTO
    knn: int = Field(settings.DEFAULT_KNN, ge=1)
    folds: int = Field(settings.DEFAULT_FOLDS, ge=2)
    seed: int = settings.DEFAULT_SEED
    out: Optional[Path] = None
    dims: Optional[Tuple[int, int]] = None

    @model_validator(mode="after")
    def check_source(self):
        if self.command != "demo-toy" and (self.data is None) == (self.generate is None):
            raise ValueError("exactly one of --data or --generate is required")
        if self.dims is not None and not (1 <= self.dims[0] <= self.dims[1]):
            raise ValueError(f"invalid dimension range {self.dims[0]}..{self.dims[1]}")
        return self


# ---------- reports ----------

class ReportModel(BaseModel):
    """Base for serializable reports."""

    def to_document(self) -> dict:
        """JSON-safe dict in field order."""
        from .json_utils import json_safe
        return json_safe(self.model_dump(mode="python"))


class SolverReport(ReportModel):
    """Outcome of one MCDA gradient descent."""
    objective_trace: List[float] = Field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    final_objective: float
    final_within_trace: float
    final_min_pair_distance: float
    gamma: float
    initial_objective: float
    final_gradient_norm: float = 0.0
    degenerate_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    winning_start: int = 0
    notes: List[str] = Field(default_factory=list)


class TraceRatioReport(ReportModel):
    lambda_trace: List[float] = Field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    notes: List[str] = Field(default_factory=list)


class ClassMetrics(BaseModel):
    label: int
    precision: float
    recall: float
    f1: float
    support: int


class Metrics(ReportModel):
    accuracy: float = Field(ge=0, le=1)
    macro_f1: float = Field(ge=0, le=1)
    micro_f1: float = Field(ge=0, le=1)
    per_class: List[ClassMetrics] = Field(default_factory=list)


class FitReport(ReportModel):
    """What `fit` writes next to the projection matrix."""
    method: Method
    k: int
    flavor: Flavor
    n: int
    p: int
    class_count: int
    constrained: bool = True
    gamma: Optional[float] = None
    mu: Optional[float] = None
    notes: List[str] = Field(default_factory=list)
    solver: Optional[SolverReport] = None
    trace_ratio: Optional[TraceRatioReport] = None


class SolverSummary(BaseModel):
    iterations: int
    converged: bool
    objective_trace: List[float]


class FoldResult(ReportModel):
    fold: int
    metrics: Metrics
    gamma: Optional[float] = None
    mu: Optional[float] = None
    solver: Optional[SolverSummary] = None


class EvalReport(ReportModel):
    """Cross-validated evaluation of one method at one subspace dimension."""
    method: Method
    k: int
    flavor: Flavor
    knn: int
    fold_count: int
    seed: int
    gamma: List[Optional[float]] = Field(default_factory=list, description="Gamma used per fold")
    folds: List[FoldResult] = Field(default_factory=list)
    mean: Optional[Metrics] = None
    infeasible: bool = False
    infeasible_reason: Optional[str] = None


class MethodSummary(BaseModel):
    """Projected scatter quantities for the toy comparison."""
    method: Method
    between_trace: float
    within_trace: float
    min_pair_distance: float
    harmonic_objective: float
    arithmetic_pairwise: float


class DemoSummary(ReportModel):
    seed: int
    k: int
    gamma: float
    methods: List[MethodSummary]
