"""
測度函數（規範函數）h

- entropy：h(t) = t·log(e/t) = t(1 − log t)，默認
- power(β)：h(t) = t^β，0 < β < 1

δ 固定為 1，所有輸入都是不超過 1 的弧長。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import mpmath
import numpy as np

from .errors import DomainError, LabValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Fraction, np.ndarray]

KINDS = ("entropy", "power")


@dataclass(frozen=True)
class MeasureFunction:
    """規範函數；構造時檢查參數使 h(t)/t 遞減"""

    kind: str = "entropy"
    beta: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise LabValidationError(f"未知的規範函數: {self.kind}")
        if self.kind == "power":
            if self.beta is None:
                raise LabValidationError("power 規範函數需要 β")
            beta = float(self.beta)
            if not (0.0 < beta < 1.0):
                raise LabValidationError(
                    f"power 規範函數需要 0 < β < 1（h(t)/t 必須遞減）: {beta}"
                )
            object.__setattr__(self, "beta", beta)
        elif self.beta is not None:
            raise LabValidationError("entropy 規範函數不接受 β")

    @classmethod
    def entropy(cls) -> "MeasureFunction":
        return cls("entropy")

    @classmethod
    def power(cls, beta: float) -> "MeasureFunction":
        return cls("power", beta)

    @classmethod
    def parse(cls, text: str) -> "MeasureFunction":
        """
        解析命令列寫法

        Args:
            text: "entropy" 或 "power:β"

        Returns:
            MeasureFunction
        """
        text = text.strip().lower()
        if text == "entropy":
            return cls.entropy()
        if text.startswith("power:"):
            try:
                beta = float(text.split(":", 1)[1])
            except ValueError as e:
                raise LabValidationError(f"無效的 β: {text}") from e
            return cls.power(beta)
        raise LabValidationError(f"未知的規範函數: {text}（可用 entropy 或 power:β）")

    def to_label(self) -> str:
        if self.kind == "power":
            return f"power:{self.beta!r}"
        return self.kind

    def __call__(self, t: ArrayLike) -> Any:
        return eval_h(self, t)

    def values(self, t: np.ndarray) -> np.ndarray:
        """向量化求值（不做定義域檢查）"""
        t = np.asarray(t, dtype=float)
        if self.kind == "entropy":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = t * (1.0 - np.log(t))
            return np.where(t > 0, out, 0.0)
        return np.power(np.clip(t, 0.0, None), self.beta)

    def ratio(self, t: ArrayLike) -> Any:
        """h(t)/t"""
        if self.kind == "entropy":
            return 1.0 - np.log(t)
        return np.power(t, self.beta - 1.0)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.beta is not None:
            data["beta"] = self.beta
        return data


ENTROPY = MeasureFunction.entropy()


def eval_h(h: MeasureFunction, t: ArrayLike) -> Any:
    """
    計算 h(t)

    Args:
        h: 規範函數
        t: [0,1] 內的數值或 numpy 陣列

    Returns:
        float 或 numpy 陣列
    """
    arr = np.asarray(float(t) if isinstance(t, Fraction) else t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
        raise DomainError("h 的自變數必須在 [0, 1] 內", {"t": arr.tolist()})
    out = h.values(arr)
    if out.ndim == 0:
        return float(out)
    return out


def eval_h_extended(h: MeasureFunction, t: Union[float, Fraction], dps: int = 50) -> mpmath.mpf:
    """任意精度計算 h(t)，作為交叉檢驗"""
    if not (0 <= t <= 1):
        raise DomainError("h 的自變數必須在 [0, 1] 內", {"t": float(t)})
    with mpmath.workdps(dps):
        x = mpmath.mpf(t.numerator) / t.denominator if isinstance(t, Fraction) else mpmath.mpf(t)
        if x == 0:
            return mpmath.mpf(0)
        if h.kind == "entropy":
            return x * (1 - mpmath.log(x))
        return mpmath.power(x, mpmath.mpf(h.beta))


@dataclass
class AxiomReport:
    """公理檢查報告；違反項目帶見證點"""

    gauge: str
    grid_size: int
    checks: Dict[str, bool] = field(default_factory=dict)
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gauge": self.gauge,
            "grid_size": self.grid_size,
            "passed": self.passed,
            "checks": dict(self.checks),
            "violations": list(self.violations),
        }


def check_axioms(
    h: MeasureFunction, grid_size: int, tolerance: float = 1e-12
) -> AxiomReport:
    """
    在均勻網格 t_i = i/grid_size 上檢查公理

    檢查 h(0)=0、h 遞增、h(t)/t 遞減、以及所有網格點對的次可加性
    h(s+t) ≤ h(s)+h(t)。違反不拋出錯誤，寫入報告。

    Args:
        h: 規範函數
        grid_size: 網格份數（≥ 2）
        tolerance: 相對容差

    Returns:
        AxiomReport
    """
    if grid_size < 2:
        raise LabValidationError(f"grid_size 必須 ≥ 2: {grid_size}")

    report = AxiomReport(gauge=h.to_label(), grid_size=grid_size)
    grid = np.arange(grid_size + 1, dtype=float) / grid_size
    values = h.values(grid)

    report.checks["zero_at_origin"] = bool(values[0] == 0.0)
    if not report.checks["zero_at_origin"]:
        report.violations.append({"check": "zero_at_origin", "value": float(values[0])})

    steps = np.diff(values)
    bad = np.nonzero(steps < -tolerance * np.abs(values[1:]))[0]
    report.checks["increasing"] = bad.size == 0
    if bad.size:
        i = int(bad[0])
        report.violations.append(
            {"check": "increasing", "s": float(grid[i]), "t": float(grid[i + 1])}
        )

    ratios = values[1:] / grid[1:]
    ratio_steps = np.diff(ratios)
    bad = np.nonzero(ratio_steps > tolerance * np.abs(ratios[1:]))[0]
    report.checks["ratio_decreasing"] = bad.size == 0
    if bad.size:
        i = int(bad[0])
        report.violations.append(
            {"check": "ratio_decreasing", "s": float(grid[i + 1]), "t": float(grid[i + 2])}
        )

    # 逐列向量化：第 i 列比較 h(t_i + t_j) 與 h(t_i) + h(t_j)，j ≤ grid_size − i
    subadditive = True
    for i in range(1, grid_size // 2 + 1):
        j = np.arange(i, grid_size - i + 1)
        lhs = values[i + j]
        rhs = values[i] + values[j]
        excess = lhs - rhs
        worst = int(np.argmax(excess))
        if excess[worst] > tolerance * max(1.0, float(rhs[worst])):
            subadditive = False
            report.violations.append(
                {
                    "check": "subadditive",
                    "s": float(grid[i]),
                    "t": float(grid[j[worst]]),
                    "excess": float(excess[worst]),
                }
            )
            break
    report.checks["subadditive"] = subadditive

    if not report.passed:
        logger.warning(f"規範函數 {h.to_label()} 公理檢查失敗: {report.violations}")
    return report


def cross_check(h: MeasureFunction, points: np.ndarray, dps: int = 50) -> float:
    """
    雙精度與任意精度求值的最大相對誤差

    Args:
        h: 規範函數
        points: (0,1] 內的點

    Returns:
        最大相對誤差
    """
    points = np.asarray(points, dtype=float)
    fast = h.values(points)
    worst = 0.0
    for x, value in zip(points.tolist(), fast.tolist()):
        exact = eval_h_extended(h, x, dps)
        if exact == 0:
            continue
        worst = max(worst, float(abs((value - exact) / exact)))
    return worst
