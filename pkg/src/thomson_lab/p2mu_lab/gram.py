"""
Gram 系統與到多項式空間的距離

μ = (1 − |z|)^α dA + w·1_E dm。單項式基底下
    G_jk = δ_jk·area_moment(j, α) + ŵ(j − k)
其中 ŵ(m) = ∫ w·1_E e^{−2πimθ} dθ；目標 1_F 的右端 c_j = ∫_F w e^{−2πijθ} dθ。
距離平方 d² = ‖1_F‖² − Re(cᴴ G⁻¹ c)。
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import mpmath
import numpy as np
from scipy import linalg

from ..circle_sets import ArcUnion, MassBracket, StructuredSet, almost_contained, combine
from ..errors import LabValidationError, NumericalError, PreconditionError
from ..frostman import StepDensity
from .moments import (
    CircleSet,
    Weighted,
    area_moments,
    area_moment_extended,
    fourier_coefficients,
    realize_circle_set,
    weighted_pieces,
)

logger = logging.getLogger(__name__)

CONDITION_THRESHOLD = 1e12
PRECISION_ENV = "THOMSON_LAB_PRECISION"


def as_structured(S: CircleSet) -> StructuredSet:
    return S if isinstance(S, StructuredSet) else StructuredSet(S)


@dataclass(frozen=True)
class MuSpec:
    """μ = (1 − |z|)^α dA + w·1_E dm"""

    alpha: float
    E: StructuredSet
    circle_weight: Optional[StepDensity] = None

    def __post_init__(self) -> None:
        if not self.alpha > -1.0:
            raise LabValidationError(f"α 必須 > −1: {self.alpha}")
        object.__setattr__(self, "E", as_structured(self.E))
        w = self.circle_weight
        if w is not None:
            if any(v < 0 for v in w.values):
                raise LabValidationError("圓周權重必須非負")
            outside = combine("difference", ArcUnion.full(), self.E.support())
            if any(v != 0 for v in w.values_on(outside)):
                raise LabValidationError("圓周權重必須支撐在 E 內")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"alpha": self.alpha, "E": self.E.to_spec_dict()}
        if self.circle_weight is not None:
            data["circle_weight"] = self.circle_weight.to_dict()
        return data


@dataclass
class GramSystem:
    """正規方程 G p = c"""

    degree: int
    matrix: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    norm_squared: float
    condition: float
    error_bound: float = 0.0
    depth: int = 0

    def leading(self, N: int) -> "GramSystem":
        """前 N + 1 個單項式的子系統"""
        if N > self.degree:
            raise LabValidationError(f"次數 {N} 超過系統次數 {self.degree}")
        G = self.matrix[: N + 1, : N + 1]
        return GramSystem(
            degree=N,
            matrix=G,
            target=self.target[: N + 1],
            norm_squared=self.norm_squared,
            condition=float(np.linalg.cond(G)),
            error_bound=self.error_bound,
            depth=self.depth,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "norm_squared": self.norm_squared,
            "condition": self.condition,
            "error_bound": self.error_bound,
            "depth": self.depth,
            "area_normalization": "unit disk mass 1",
        }


def circle_part(mu: MuSpec, depth: int) -> Tuple[Weighted, ArcUnion, MassBracket]:
    """E 的外層實現上的加權片段與尾質量"""
    E_D, tail = mu.E.realize(depth)
    return weighted_pieces(E_D, mu.circle_weight), E_D, tail


def gram_system(
    N: int,
    mu: MuSpec,
    F: CircleSet,
    depth: int = 12,
    include_disk: bool = False,
) -> GramSystem:
    """
    組裝 Gram 系統

    Args:
        N: 多項式次數
        mu: 測度描述
        F: 目標集合，幾乎包含於 E
        depth: Cantor 實現代數
        include_disk: 目標在圓盤上也取值 1（常數函數的檢驗用）

    Returns:
        GramSystem
    """
    if N < 0:
        raise LabValidationError(f"次數必須 ≥ 0: {N}")
    F_set = as_structured(F)
    if not almost_contained(F_set, mu.E):
        raise PreconditionError("目標集合不在 E 內")

    pieces, E_D, tail_E = circle_part(mu, depth)
    w_hat = fourier_coefficients(pieces, range(N + 1))
    G = linalg.toeplitz(w_hat, np.conj(w_hat)) + np.diag(area_moments(N, mu.alpha))

    F_D, tail_F = realize_circle_set(F_set, depth)
    F_pieces = weighted_pieces(combine("intersect", F_D, E_D), mu.circle_weight)
    c = fourier_coefficients(F_pieces, range(N + 1))
    norm_squared = float(sum(v * (b - a) for a, b, v in F_pieces))
    if include_disk:
        c[0] += area_moments(0, mu.alpha)[0]
        norm_squared += float(area_moments(0, mu.alpha)[0])

    w_max = 1.0
    if mu.circle_weight is not None:
        w_max = max(float(v) for v in mu.circle_weight.values)
    error_bound = w_max * float(tail_E.upper + tail_F.upper)
    system = GramSystem(
        degree=N,
        matrix=G,
        target=c,
        norm_squared=norm_squared,
        condition=float(np.linalg.cond(G)),
        error_bound=error_bound,
        depth=depth,
    )
    logger.debug(f"Gram 系統 N = {N}: 條件數 {system.condition:.3e}，截斷誤差界 {error_bound:.3e}")
    return system


@dataclass
class DistanceResult:
    """到 span{1, z, …, z^N} 的距離"""

    degree: int
    distance: float
    distance_squared: float
    condition: float
    method: str
    extended_distance: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "N": self.degree,
            "d": self.distance,
            "d_squared": self.distance_squared,
            "cond": self.condition,
            "method": self.method,
        }
        if self.extended_distance is not None:
            data["d_extended"] = self.extended_distance
        return data


def _solve_double(system: GramSystem, refinement_steps: int) -> np.ndarray:
    G, c = system.matrix, system.target
    try:
        factor = linalg.cho_factor(G, lower=False, check_finite=True)
    except linalg.LinAlgError as e:
        logger.error(f"Cholesky 分解失敗，條件數 {system.condition:.3e}")
        raise NumericalError(
            "Gram 矩陣分解失敗", {"degree": system.degree, "condition": system.condition}
        ) from e
    x = linalg.cho_solve(factor, c)
    for _ in range(refinement_steps):
        x = x + linalg.cho_solve(factor, c - G @ x)
    return x


def _distance_extended(system: GramSystem, alpha: Optional[float], dps: int) -> float:
    """mpmath 重新求解；給出 alpha 時面積部分以任意精度重算"""
    with mpmath.workdps(dps):
        n = system.degree + 1
        G = mpmath.matrix(n, n)
        for j in range(n):
            for k in range(n):
                value = system.matrix[j, k]
                G[j, k] = mpmath.mpc(value.real, value.imag)
            if alpha is not None:
                circle = system.matrix[j, j].real - float(area_moments(j, alpha)[j])
                G[j, j] = mpmath.mpf(circle) + area_moment_extended(j, alpha, dps)
        c = mpmath.matrix([mpmath.mpc(v.real, v.imag) for v in system.target])
        x = mpmath.lu_solve(G, c)
        inner = sum(mpmath.conj(c[j]) * x[j] for j in range(n))
        d2 = mpmath.mpf(system.norm_squared) - mpmath.re(inner)
        return float(mpmath.sqrt(max(d2, 0)))


def distance_to_polynomials(
    system: GramSystem,
    precision: Optional[str] = None,
    condition_threshold: float = CONDITION_THRESHOLD,
    refinement_steps: int = 3,
    alpha: Optional[float] = None,
    dps: int = 50,
) -> DistanceResult:
    """
    d² = ‖1_F‖² − Re(cᴴ G⁻¹ c)

    Cholesky 分解加迭代改進；條件數超過門檻或精度設為 extended 時再以 mpmath 求解，
    兩者都回報。

    Args:
        system: Gram 系統
        precision: "double" 或 "extended"，默認讀環境變數 THOMSON_LAB_PRECISION
        condition_threshold: 觸發任意精度的條件數
        refinement_steps: 迭代改進次數
        alpha: 面積權重指數（任意精度重算面積矩用）
        dps: mpmath 位數

    Returns:
        DistanceResult
    """
    precision = precision or os.environ.get(PRECISION_ENV, "double")
    if system.norm_squared == 0 and not np.any(system.target):
        return DistanceResult(system.degree, 0.0, 0.0, system.condition, "trivial")

    x = _solve_double(system, refinement_steps)
    d2 = system.norm_squared - float(np.real(np.vdot(system.target, x)))
    if d2 < -1e-10 * max(1.0, system.norm_squared):
        raise NumericalError(
            "距離平方為負", {"d_squared": d2, "condition": system.condition}
        )
    d2 = max(d2, 0.0)
    result = DistanceResult(
        degree=system.degree,
        distance=float(np.sqrt(d2)),
        distance_squared=d2,
        condition=system.condition,
        method="cholesky",
    )
    if precision == "extended" or system.condition > condition_threshold:
        result.extended_distance = _distance_extended(system, alpha, dps)
        result.method = "cholesky+mpmath"
        logger.info(
            f"N = {system.degree}: 條件數 {system.condition:.3e}，"
            f"雙精度 {result.distance:.12g}，任意精度 {result.extended_distance:.12g}"
        )
    return result


def distance(
    mu: MuSpec,
    F: Union[ArcUnion, StructuredSet],
    N: int,
    depth: int = 12,
    **options: Any,
) -> DistanceResult:
    """gram_system 與 distance_to_polynomials 的組合"""
    return distance_to_polynomials(gram_system(N, mu, F, depth), alpha=mu.alpha, **options)
