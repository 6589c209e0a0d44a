"""
P²(μ) 數值實驗

提供面積矩、Gram 最小平方距離、分裂實驗、Bergman/Dirichlet 恆等式與閾值釘定。
"""

from .experiments import (
    PlateauReport,
    SplittingTable,
    full_circle_distances,
    full_circle_experiment,
    full_circle_plateau,
    logarithmic_energy,
    splitting_experiment,
)
from .gram import DistanceResult, GramSystem, MuSpec, distance_to_polynomials, gram_system
from .identities import bergman_identity_check, dirichlet_bilinear_check
from .moments import area_moment, circle_fourier, embedding_audit
from .oracle import PinnedThresholds, pin_thresholds, quadrature_distance

__all__ = [
    "MuSpec",
    "GramSystem",
    "DistanceResult",
    "SplittingTable",
    "PlateauReport",
    "area_moment",
    "circle_fourier",
    "embedding_audit",
    "gram_system",
    "distance_to_polynomials",
    "splitting_experiment",
    "full_circle_experiment",
    "full_circle_distances",
    "full_circle_plateau",
    "logarithmic_energy",
    "bergman_identity_check",
    "dirichlet_bilinear_check",
    "quadrature_distance",
    "pin_thresholds",
    "PinnedThresholds",
]
