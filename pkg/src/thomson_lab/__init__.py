"""
thomson_lab

圓周集合的 Hausdorff 型內容、核心/殘餘分解、Frostman 測度、
分段常數函數 f_n 與 g_k 的構造，以及 P²(μ) 多項式閉包的分裂實驗。
"""

from .circle_sets import (
    Arc,
    ArcUnion,
    CantorComponent,
    GeometricRule,
    HarmonicRule,
    MassBracket,
    StructuredSet,
    canonicalize,
    combine,
    measure,
    to_rational,
)
from .config_manager import LabConfig
from .core_residual import carleson_closure_check, decompose, is_h_carleson
from .errors import (
    LabValidationError,
    NumericalError,
    PreconditionError,
    ResolutionLimitError,
    ThomsonLabError,
)
from .frostman import (
    StepDensity,
    cap_audit,
    dyadic_cap_audit,
    frostman_averaged,
    frostman_dyadic,
)
from .hausdorff_content import content_bracket, dyadic_content
from .herglotz_poisson import build_gk, herglotz_eval, poisson_eval
from .khrushchev_construction import construct_fn
from .measure_functions import ENTROPY, MeasureFunction
from .set_spec import load_set_spec, parse_set_spec

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ArcUnion",
    "CantorComponent",
    "GeometricRule",
    "HarmonicRule",
    "MassBracket",
    "StructuredSet",
    "canonicalize",
    "combine",
    "measure",
    "to_rational",
    "LabConfig",
    "decompose",
    "is_h_carleson",
    "carleson_closure_check",
    "ThomsonLabError",
    "LabValidationError",
    "PreconditionError",
    "NumericalError",
    "ResolutionLimitError",
    "StepDensity",
    "cap_audit",
    "dyadic_cap_audit",
    "frostman_dyadic",
    "frostman_averaged",
    "dyadic_content",
    "content_bracket",
    "herglotz_eval",
    "poisson_eval",
    "build_gk",
    "construct_fn",
    "ENTROPY",
    "MeasureFunction",
    "parse_set_spec",
    "load_set_spec",
]
