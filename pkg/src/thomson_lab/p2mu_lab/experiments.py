"""
分裂實驗與對數能量

splitting_experiment：d_N = dist(1_F, span{1, …, z^N}) 隨 N 的變化；
殘餘目標預期衰減，核心（弧）目標預期有正下界。
logarithmic_energy：Σ n|f̂_n|² 的部分和，殘餘集合上的指示函數會持續增長。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..circle_sets import ArcUnion, StructuredSet, almost_contained, measure_bracket
from ..core_residual import decompose
from ..errors import LabValidationError
from ..frostman import StepDensity
from ..measure_functions import ENTROPY, MeasureFunction
from .gram import DistanceResult, MuSpec, as_structured, distance_to_polynomials, gram_system
from .moments import CircleSet, area_moments, density_fourier, indicator_density

logger = logging.getLogger(__name__)

MONOTONE_TOLERANCE = 1e-10

PREDICT_SPLIT = "splits"
PREDICT_NO_SPLIT = "no_split"
PREDICT_UNKNOWN = "undetermined"


@dataclass
class SplittingTable:
    """(N, d_N, 條件數) 表與趨勢判定"""

    rows: List[DistanceResult]
    prediction: str
    depth: int
    thresholds: Dict[str, float] = field(default_factory=dict)

    @property
    def distances(self) -> List[float]:
        return [
            r.extended_distance if r.extended_distance is not None else r.distance
            for r in self.rows
        ]

    @property
    def nonincreasing(self) -> bool:
        d = self.distances
        return all(b <= a + MONOTONE_TOLERANCE for a, b in zip(d, d[1:]))

    @property
    def strictly_decreasing(self) -> bool:
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def decay_ratio(self) -> float:
        d = self.distances
        return d[-1] / d[0] if d[0] > 0 else 0.0

    @property
    def decaying(self) -> bool:
        """嚴格遞減且 d_last/d_first 低於 residual_ratio"""
        ratio_limit = self.thresholds.get("residual_ratio", 1.0)
        return self.strictly_decreasing and self.decay_ratio < ratio_limit

    @property
    def bounded_below(self) -> bool:
        """所有 d_N 不低於 arc_floor"""
        return min(self.distances) >= self.thresholds.get("arc_floor", 0.0)

    @property
    def observed(self) -> str:
        if self.decaying:
            return "decaying"
        if self.bounded_below:
            return "bounded_below"
        return "inconclusive"

    @property
    def consistent(self) -> bool:
        """與分裂定理的預測一致"""
        if self.prediction == PREDICT_SPLIT:
            return self.decaying
        if self.prediction == PREDICT_NO_SPLIT:
            return self.bounded_below
        return True

    def to_rows(self) -> List[Dict[str, Any]]:
        return [r.to_dict() for r in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows": self.to_rows(),
            "prediction": self.prediction,
            "observed": self.observed,
            "decaying": self.decaying,
            "bounded_below": self.bounded_below,
            "nonincreasing": self.nonincreasing,
            "decay_ratio": self.decay_ratio,
            "consistent": self.consistent,
            "depth": self.depth,
            "thresholds": dict(self.thresholds),
        }


def predict_splitting(E: StructuredSet, F: StructuredSet, h: MeasureFunction) -> str:
    """
    依核心/殘餘分解預測 1_F 是否在多項式閉包內

    F 幾乎包含於殘餘且測度為正：分裂；F 幾乎包含於核心：不分裂。
    """
    decomposition = decompose(E, h)
    if measure_bracket(F).upper == 0:
        return PREDICT_UNKNOWN
    if not decomposition.residual.is_empty and almost_contained(F, decomposition.residual):
        return PREDICT_SPLIT
    if almost_contained(F, decomposition.core):
        return PREDICT_NO_SPLIT
    return PREDICT_UNKNOWN


def splitting_experiment(
    mu: MuSpec,
    F: CircleSet,
    Ns: Sequence[int],
    depth: int = 12,
    h: MeasureFunction = ENTROPY,
    thresholds: Optional[Dict[str, float]] = None,
    progress: bool = False,
    **solver: Any,
) -> SplittingTable:
    """
    d_N 隨 N 的表

    只組裝一次最大次數的 Gram 系統，各 N 取前導子矩陣。

    Args:
        mu: 測度描述
        F: 目標集合
        Ns: 嚴格遞增的次數列表
        depth: Cantor 實現代數
        h: 規範函數（分解用）
        thresholds: residual_ratio、arc_floor
        progress: 顯示進度條
        solver: 傳給 distance_to_polynomials 的參數

    Returns:
        SplittingTable
    """
    Ns = list(Ns)
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise LabValidationError(f"次數列表必須嚴格遞增: {Ns}")
    F_set = as_structured(F)
    system = gram_system(Ns[-1], mu, F_set, depth)
    rows = [
        distance_to_polynomials(system.leading(N), alpha=mu.alpha, **solver)
        for N in tqdm(Ns, desc="d_N", disable=not progress)
    ]
    table = SplittingTable(
        rows=rows,
        prediction=predict_splitting(mu.E, F_set, h),
        depth=depth,
        thresholds=dict(thresholds or {}),
    )
    if not table.nonincreasing:
        logger.warning(f"d_N 不是單調遞減: {table.distances}")
    logger.info(
        f"分裂實驗: 預測 {table.prediction}，觀察 {table.observed}，"
        f"d_last/d_first = {table.decay_ratio:.6g}"
    )
    return table


# 整個圓周、F 為半圓、α = 0 時的 d_∞²
HALF_CIRCLE_PLATEAU_SQUARED = 5.0 / 16.0 - 1.0 / (4.0 * math.pi**2)
PLATEAU_TOLERANCE = 1e-8
PLATEAU_TERMS = 1 << 14


def full_circle_distances(F: ArcUnion, Ns: Sequence[int], alpha: float = 0.0) -> List[float]:
    """
    μ 為面積測度加整個圓周時 d_N 的閉式

    單項式在 μ 下正交：第 n 項的最佳係數為 c_n/(1 + m_n)，留下 |c_n|²·m_n/(1 + m_n)，
    其中 m_n 為面積矩；負頻率與 n > N 的係數整個留下（由 Parseval 求和）。

    Args:
        F: 弧聯集
        Ns: 遞增的次數列表
        alpha: 面積權重指數

    Returns:
        各 N 的 d_N
    """
    Ns = list(Ns)
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise LabValidationError(f"次數列表必須嚴格遞增: {Ns}")
    moments = area_moments(Ns[-1], alpha)
    power = np.abs(density_fourier(indicator_density(F), range(Ns[-1] + 1))) ** 2
    one_sided = (float(F.measure) - power[0]) / 2.0
    kept = np.cumsum(power * moments / (1.0 + moments))
    seen = np.cumsum(power) - power[0]
    return [math.sqrt(max(0.0, 2.0 * one_sided - seen[N] + kept[N])) for N in Ns]


def full_circle_plateau(F: ArcUnion, alpha: float = 0.0, terms: int = PLATEAU_TERMS) -> float:
    """d_N 的極限 d_∞（截斷到 terms 項，誤差 O(1/terms²)）"""
    moments = area_moments(terms, alpha)
    power = np.abs(density_fourier(indicator_density(F), range(terms + 1))) ** 2
    one_sided = (float(F.measure) - power[0]) / 2.0
    return math.sqrt(one_sided + float(np.sum(power * moments / (1.0 + moments))))


@dataclass
class PlateauReport:
    """整個圓周上 Gram 距離、閉式距離與正極限"""

    table: SplittingTable
    exact: List[float]
    plateau: float

    @property
    def max_deviation(self) -> float:
        return max(abs(a - b) for a, b in zip(self.table.distances, self.exact))

    @property
    def above_plateau(self) -> bool:
        return min(self.table.distances) >= self.plateau - PLATEAU_TOLERANCE

    @property
    def passed(self) -> bool:
        return (
            self.plateau > 0
            and self.table.nonincreasing
            and self.above_plateau
            and self.max_deviation <= PLATEAU_TOLERANCE
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "table": self.table.to_dict(),
            "exact": list(self.exact),
            "plateau": self.plateau,
            "max_deviation": self.max_deviation,
            "above_plateau": self.above_plateau,
            "passed": self.passed,
        }


def full_circle_experiment(
    F: ArcUnion,
    Ns: Sequence[int],
    alpha: float = 0.0,
    thresholds: Optional[Dict[str, float]] = None,
    **solver: Any,
) -> PlateauReport:
    """
    E 為整個圓周時的分裂實驗：d_N 遞減到正的 d_∞，不分裂

    Args:
        F: 目標弧聯集
        Ns: 嚴格遞增的次數列表
        alpha: 面積權重指數
        thresholds: 傳給分裂表
        solver: 傳給 distance_to_polynomials 的參數

    Returns:
        PlateauReport
    """
    table = splitting_experiment(
        MuSpec(alpha, ArcUnion.full()), F, Ns, thresholds=thresholds, **solver
    )
    report = PlateauReport(
        table=table,
        exact=full_circle_distances(F, Ns, alpha),
        plateau=full_circle_plateau(F, alpha),
    )
    if not report.passed:
        logger.warning(
            f"整個圓周上的距離偏離閉式: 最大偏差 {report.max_deviation:.3g}，"
            f"d_∞ = {report.plateau:.6g}，d_N = {table.distances}"
        )
    return report


@dataclass
class EnergyReport:
    """對數能量部分和"""

    stops: List[int]
    sums: List[float]
    start: int

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.sums, self.sums[1:]))

    @property
    def growth_ratio(self) -> float:
        return self.sums[-1] / self.sums[0] if self.sums[0] > 0 else float("inf")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "stops": list(self.stops),
            "sums": list(self.sums),
            "increasing": self.increasing,
            "growth_ratio": self.growth_ratio,
        }


def logarithmic_energy(
    f: StepDensity, N0: int, Ms: Sequence[int], weight: str = "n"
) -> EnergyReport:
    """
    Σ_{N0 ≤ n ≤ M} n|f̂_n|²（weight="n+1" 時為 (n+1)|f̂_n|²）

    Args:
        f: 分段常數函數
        N0: 起始頻率
        Ms: 遞增的截止頻率
        weight: "n" 或 "n+1"

    Returns:
        EnergyReport
    """
    Ms = list(Ms)
    if not Ms or Ms[0] < N0 or any(b <= a for a, b in zip(Ms, Ms[1:])):
        raise LabValidationError(f"截止頻率必須遞增且不小於 {N0}: {Ms}")
    n = np.arange(N0, Ms[-1] + 1)
    coefficients = density_fourier(f, n)
    factor = n + 1.0 if weight == "n+1" else n.astype(float)
    cumulative = np.cumsum(factor * np.abs(coefficients) ** 2)
    sums = [float(cumulative[M - N0]) for M in Ms]
    return EnergyReport(stops=Ms, sums=sums, start=N0)
