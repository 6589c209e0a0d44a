"""
Bergman 恆等式與 Dirichlet 雙線性不等式
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from ..errors import PreconditionError
from ..frostman import StepDensity
from .moments import area_moments, density_fourier

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-12
QUADRATURE_TOLERANCE = 1e-9


@dataclass
class BergmanReport:
    """Σ|p_n|²·area_moment(n, 0)、Σ|p_n|²/(n+1) 與極座標積分的比較"""

    moment_side: float
    series_side: float
    quadrature: float

    @property
    def relative_difference(self) -> float:
        scale = max(abs(self.series_side), 1e-300)
        return abs(self.moment_side - self.series_side) / scale

    @property
    def quadrature_difference(self) -> float:
        scale = max(abs(self.series_side), 1e-300)
        return abs(self.quadrature - self.series_side) / scale

    @property
    def passed(self) -> bool:
        if self.series_side == 0:
            return self.moment_side == 0 and abs(self.quadrature) <= QUADRATURE_TOLERANCE
        return (
            self.relative_difference <= IDENTITY_TOLERANCE
            and self.quadrature_difference <= QUADRATURE_TOLERANCE
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "moment_side": self.moment_side,
            "series_side": self.series_side,
            "quadrature": self.quadrature,
            "relative_difference": self.relative_difference,
            "quadrature_difference": self.quadrature_difference,
            "passed": self.passed,
        }


def _polar_norm(p: np.ndarray) -> float:
    """
    ∫|p|² dA（歸一化）

    |p(re^{2πiθ})|² 在 θ 上是次數 ≤ 2N 的三角多項式，2N + 1 個均勻角度精確；
    在 r 上是次數 2N + 1 的多項式，N + 1 個 Gauss–Legendre 節點精確。
    """
    N = p.size - 1
    nodes, weights = np.polynomial.legendre.leggauss(N + 1)
    r = 0.5 * (nodes + 1.0)
    theta = np.arange(2 * N + 1) / (2 * N + 1)
    z = r[:, None] * np.exp(2j * math.pi * theta)[None, :]
    values = np.polynomial.polynomial.polyval(z, p)
    radial = np.mean(np.abs(values) ** 2, axis=1)
    return float(np.sum(0.5 * weights * 2.0 * r * radial))


def bergman_identity_check(coefficients: Sequence[complex]) -> BergmanReport:
    """
    Σ|p_n|²·area_moment(n, 0) 與 Σ|p_n|²/(n+1)

    Args:
        coefficients: p_0, …, p_N

    Returns:
        BergmanReport
    """
    p = np.asarray(coefficients, dtype=complex)
    if p.size == 0:
        p = np.zeros(1, dtype=complex)
    weights = np.abs(p) ** 2
    n = np.arange(p.size)
    report = BergmanReport(
        moment_side=float(np.sum(weights * area_moments(p.size - 1, 0.0))),
        series_side=float(np.sum(weights / (n + 1.0))),
        quadrature=_polar_norm(p),
    )
    if not report.passed:
        logger.warning(f"Bergman 恆等式檢查失敗: {report.to_dict()}")
    return report


@dataclass
class DirichletReport:
    """|Σ f̂_n·conj(p_n)| ≤ (Σ(n+1)|f̂_n|²)^{1/2}·(Σ|p_n|²/(n+1))^{1/2}"""

    bilinear: float
    energy: float
    bergman_norm: float
    stops: List[int]
    partial_sums: List[float]

    @property
    def bound(self) -> float:
        return math.sqrt(self.energy) * math.sqrt(self.bergman_norm)

    @property
    def slack(self) -> float:
        return self.bound - self.bilinear

    @property
    def passed(self) -> bool:
        return self.slack >= -IDENTITY_TOLERANCE * max(1.0, self.bound)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bilinear": self.bilinear,
            "energy": self.energy,
            "bergman_norm": self.bergman_norm,
            "bound": self.bound,
            "slack": self.slack,
            "stops": list(self.stops),
            "partial_sums": list(self.partial_sums),
            "passed": self.passed,
        }


def dirichlet_bilinear_check(
    f: StepDensity, coefficients: Sequence[complex], M: int
) -> DirichletReport:
    """
    Cauchy–Schwarz 不等式的實例，並回報 Dirichlet 部分和 Σ_{n≤m}(n+1)|f̂_n|²

    部分和在 m = 2⁶, 2⁷, …（不超過 M）與 M 處取值。

    Args:
        f: 圓周上的分段常數函數
        coefficients: p_0, …, p_N
        M: 截止頻率，M ≥ N

    Returns:
        DirichletReport
    """
    p = np.asarray(coefficients, dtype=complex)
    if M < p.size - 1:
        raise PreconditionError(f"截止頻率 {M} 小於多項式次數 {p.size - 1}")
    f_hat = density_fourier(f, range(M + 1))
    n = np.arange(M + 1)
    energies = np.cumsum((n + 1.0) * np.abs(f_hat) ** 2)
    bilinear = abs(complex(np.sum(f_hat[: p.size] * np.conj(p))))
    bergman_norm = float(np.sum(np.abs(p) ** 2 / (np.arange(p.size) + 1.0)))

    stops = [2**e for e in range(6, 64) if 2**e < M] + [M]
    return DirichletReport(
        bilinear=bilinear,
        energy=float(energies[-1]),
        bergman_norm=bergman_norm,
        stops=stops,
        partial_sums=[float(energies[m]) for m in stops],
    )
