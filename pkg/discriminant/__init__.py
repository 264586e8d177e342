"""
Discriminant package.
Harmonic-mean multi-class discriminant analysis, the LDA comparison family
and the cross-validated KNN evaluation harness.
"""
from .baselines import solve_classical_lda, solve_nlda, solve_pca, solve_trace_ratio, solve_unified_lda
from .solver import solve_mcda

__all__ = [
    'solve_mcda',
    'solve_classical_lda',
    'solve_nlda',
    'solve_trace_ratio',
    'solve_unified_lda',
    'solve_pca',
]
