"""
面積矩與圓周 Fourier 係數

面積測度歸一化為單位圓盤總質量 1：dA = 2r dr dθ（θ ∈ [0,1)）。
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import mpmath
import numpy as np
from scipy import integrate, special

from ..circle_sets import ArcUnion, MassBracket, StructuredSet, ZERO_BRACKET
from ..errors import DomainError
from ..frostman import StepDensity

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CHUNK_SIZE = 512

CircleSet = Union[ArcUnion, StructuredSet]


def _check_alpha(alpha: float) -> None:
    if not alpha > -1.0:
        raise DomainError(f"α 必須 > −1: {alpha}", {"alpha": alpha})


def area_moment(j: int, alpha: float) -> float:
    """
    ∫|z^j|²(1 − |z|)^α dA = 2·B(2j + 2, α + 1)

    Args:
        j: 非負整數
        alpha: α > −1

    Returns:
        正數，隨 j 遞減
    """
    _check_alpha(alpha)
    if j < 0:
        raise DomainError(f"j 必須 ≥ 0: {j}")
    return 2.0 * math.exp(special.betaln(2 * j + 2, alpha + 1.0))


def area_moments(N: int, alpha: float) -> np.ndarray:
    """j = 0..N 的面積矩"""
    _check_alpha(alpha)
    j = np.arange(N + 1, dtype=float)
    return 2.0 * np.exp(special.betaln(2.0 * j + 2.0, alpha + 1.0))


def area_moment_extended(j: int, alpha: float, dps: int = 50) -> mpmath.mpf:
    """任意精度的面積矩"""
    _check_alpha(alpha)
    with mpmath.workdps(dps):
        return 2 * mpmath.beta(2 * j + 2, mpmath.mpf(alpha) + 1)


# ---------------------------------------------------------------------------
# 圓周 Fourier 係數
# ---------------------------------------------------------------------------


Weighted = List[Tuple[float, float, float]]


def realize_circle_set(S: CircleSet, depth: int) -> Tuple[ArcUnion, MassBracket]:
    """弧聯集原樣返回；結構化集合取第 depth 代外層實現"""
    if isinstance(S, ArcUnion):
        return S, ZERO_BRACKET
    return S.realize(depth)


def weighted_pieces(U: ArcUnion, weight: Optional[StepDensity] = None) -> Weighted:
    """U 上的 (a, b, 權重值) 線性片段；未給權重時值為 1"""
    if weight is None:
        return [(float(a), float(b), 1.0) for a, b in U.intervals]
    pieces: Weighted = []
    for a, b, v in weight.pieces():
        if v == 0:
            continue
        for lo, hi in U.clip(a, b):
            pieces.append((float(lo), float(hi), float(v)))
    return pieces


def fourier_coefficients(pieces: Weighted, ms: Iterable[int]) -> np.ndarray:
    """
    ∫ w e^{−2πimθ} dθ，w 為分段常數

    每個片段的閉式為 v·(e^{−2πima} − e^{−2πimb})/(2πim)，m = 0 時為 v·(b − a)。
    """
    m = np.asarray(list(ms), dtype=float)
    out = np.zeros(m.shape, dtype=complex)
    if not pieces:
        return out
    a, b, v = (np.array(col, dtype=float) for col in zip(*pieces))
    zero = m == 0
    out[zero] = float(np.sum(v * (b - a)))
    nonzero = np.nonzero(~zero)[0]
    for lo in range(0, nonzero.size, CHUNK_SIZE):
        idx = nonzero[lo : lo + CHUNK_SIZE]
        mm = m[idx, None]
        terms = (np.exp(-1j * TWO_PI * mm * a) - np.exp(-1j * TWO_PI * mm * b)) / (
            1j * TWO_PI * mm
        )
        out[idx] = terms @ v
    return out


@dataclass
class FourierCoefficient:
    """Fourier 係數與截斷誤差界"""

    value: complex
    error_bound: float

    def to_dict(self) -> Dict[str, Any]:
        return {"value": [self.value.real, self.value.imag], "error_bound": self.error_bound}


def circle_fourier(S: CircleSet, m: int, depth: int = 12) -> FourierCoefficient:
    """
    ∫_S e^{−2πimθ} dθ

    Cantor 分量以外層實現計算，誤差不超過尾質量。

    Args:
        S: 弧聯集或結構化集合
        m: 整數頻率
        depth: Cantor 實現代數

    Returns:
        FourierCoefficient
    """
    U, tail = realize_circle_set(S, depth)
    value = fourier_coefficients(weighted_pieces(U), [m])[0]
    return FourierCoefficient(complex(value), float(tail.upper))


def density_fourier(d: StepDensity, ms: Iterable[int]) -> np.ndarray:
    """分段常數密度的 Fourier 係數"""
    pieces = [(float(a), float(b), float(v)) for a, b, v in d.pieces() if v != 0]
    return fourier_coefficients(pieces, ms)


def indicator_density(S: CircleSet, depth: int = 12) -> StepDensity:
    """集合（的外層實現）的指示函數"""
    U, _ = realize_circle_set(S, depth)
    return StepDensity.from_pieces((a, b, Fraction(1)) for a, b in U.intervals)


# ---------------------------------------------------------------------------
# 嵌入假設的常數
# ---------------------------------------------------------------------------


@dataclass
class EmbeddingAudit:
    """c₁ = ∫(1 − |z|)^{c₂} dA 的數值積分與閉式比較"""

    c2: float
    quadrature: float
    closed_form: float
    quadrature_error: float

    @property
    def relative_difference(self) -> float:
        return abs(self.quadrature - self.closed_form) / self.closed_form

    @property
    def passed(self) -> bool:
        return math.isfinite(self.quadrature) and self.relative_difference <= 1e-9

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c2": self.c2,
            "quadrature": self.quadrature,
            "closed_form": self.closed_form,
            "relative_difference": self.relative_difference,
            "passed": self.passed,
        }


def embedding_audit(c2: float) -> EmbeddingAudit:
    """
    ∫(1 − |z|)^{c₂} dA 與 2·B(2, c₂ + 1) 的比較

    Args:
        c2: 指數，c₂ > −1 時有限

    Returns:
        EmbeddingAudit
    """
    closed = area_moment(0, c2)
    value, error = integrate.quad(
        lambda r: 2.0 * r * (1.0 - r) ** c2, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200
    )
    audit = EmbeddingAudit(c2=c2, quadrature=value, closed_form=closed, quadrature_error=error)
    logger.debug(f"嵌入常數 c₂ = {c2}: 積分 {value:.15g}，閉式 {closed:.15g}")
    return audit
