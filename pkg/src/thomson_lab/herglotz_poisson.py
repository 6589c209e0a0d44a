"""
Herglotz 與 Poisson 積分

分段常數密度的 Herglotz 積分有閉式：值為 v 的片段 [a, b) 貢獻
    v·[(b − a) + (1/(iπ))·(log(1 − z·e^{−2πib}) − log(1 − z·e^{−2πia}))]
|z| < 1 時 1 − z·e^{−2πiθ} 的實部為正，主值對數不需要追蹤分支。

g_k = exp(H_{f_{n_k}}/k)，n_k 取使 f_n 在殘餘部分上不超過 −k·log k 的最小代數。
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .circle_sets import StructuredSet
from .core_residual import decompose
from .errors import DomainError, NotApplicableError, PreconditionError, ResolutionLimitError
from .frostman import CapAuditReport, StepDensity, cap_audit
from .khrushchev_construction import FnFunction, construct_fn
from .measure_functions import MeasureFunction

if TYPE_CHECKING:
    from .p2mu_lab.gram import MuSpec

logger = logging.getLogger(__name__)

BOUNDARY_MARGIN = 1e-12
CHUNK_SIZE = 256
TWO_PI = 2.0 * math.pi

ComplexLike = Union[complex, np.ndarray]


def _as_points(z: ComplexLike, margin: float) -> Tuple[np.ndarray, bool]:
    points = np.asarray(z, dtype=complex)
    scalar = points.ndim == 0
    points = np.atleast_1d(points)
    if points.size and np.max(np.abs(points)) > 1.0 - margin:
        raise DomainError(
            "|z| 太接近單位圓",
            {"max_modulus": float(np.max(np.abs(points))), "margin": margin},
        )
    return points, scalar


def _active_pieces(d: StepDensity) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    edges = d.float_edges
    values = d.float_values
    mask = values != 0
    return edges[:-1][mask], edges[1:][mask], values[mask]


def herglotz_eval(d: StepDensity, z: ComplexLike, margin: float = BOUNDARY_MARGIN) -> Any:
    """
    H(z) = ∫ (ζ + z)/(ζ − z) d(密度)(ζ)

    Args:
        d: 有號分段常數密度
        z: 單點或陣列，|z| ≤ 1 − margin
        margin: 與單位圓的最小距離

    Returns:
        complex 或與 z 同形狀的複數陣列
    """
    points, scalar = _as_points(z, margin)
    starts, ends, values = _active_pieces(d)
    mass = float(np.sum(values * (ends - starts)))
    out = np.full(points.shape, mass, dtype=complex)
    if values.size:
        u_start = np.exp(-1j * TWO_PI * starts)
        u_end = np.exp(-1j * TWO_PI * ends)
        flat = points.ravel()
        result = out.ravel()
        for lo in range(0, flat.size, CHUNK_SIZE):
            block = flat[lo : lo + CHUNK_SIZE, None]
            logs = np.log1p(-block * u_end) - np.log1p(-block * u_start)
            result[lo : lo + CHUNK_SIZE] += (logs @ values) / (1j * math.pi)
        out = result.reshape(points.shape)
    return complex(out[0]) if scalar else out


def poisson_eval(d: StepDensity, z: ComplexLike, margin: float = BOUNDARY_MARGIN) -> Any:
    """Poisson 積分 = Re H"""
    value = herglotz_eval(d, z, margin)
    return value.real if isinstance(value, complex) else np.real(value)


def herglotz_quadrature(
    d: StepDensity, z: complex, epsabs: float = 1e-13, epsrel: float = 1e-12
) -> complex:
    """以 scipy 自適應積分逐片段計算核函數積分，作為閉式的參照"""
    _as_points(z, BOUNDARY_MARGIN)
    z = complex(z)

    def kernel(theta: float) -> complex:
        zeta = complex(math.cos(TWO_PI * theta), math.sin(TWO_PI * theta))
        return (zeta + z) / (zeta - z)

    total = 0j
    for a, b, v in zip(*_active_pieces(d)):
        re, _ = integrate.quad(
            lambda t: kernel(t).real, a, b, epsabs=epsabs, epsrel=epsrel, limit=200
        )
        im, _ = integrate.quad(
            lambda t: kernel(t).imag, a, b, epsabs=epsabs, epsrel=epsrel, limit=200
        )
        total += v * complex(re, im)
    return total


def growth_grid(radii: int, angles: int, min_distance: float) -> np.ndarray:
    """1 − |z| 從 1/2 對數遞減到 min_distance 的極座標網格"""
    distances = np.geomspace(0.5, min_distance, radii)
    theta = np.arange(angles) / angles
    return ((1.0 - distances)[:, None] * np.exp(1j * TWO_PI * theta)[None, :]).ravel()


def poisson_growth_ratio(
    d: StepDensity,
    h: MeasureFunction,
    radii: int = 40,
    angles: int = 256,
    min_distance: float = 1e-6,
    cap_factor: float = 1.0,
    cap_report: Optional[CapAuditReport] = None,
) -> float:
    """
    經驗常數 C = sup Re H(z)·(1 − |z|)/h(1 − |z|)

    前置條件 mass(Δ) ≤ cap_factor·h(|Δ|) 以斷點對審核確認。

    Args:
        d: 密度
        h: 規範函數
        radii: 徑向取樣數
        angles: 角向取樣數
        min_distance: 最小的 1 − |z|
        cap_factor: 上限倍數
        cap_report: 已完成的上限審核（省去重新窮舉）

    Returns:
        取樣網格上的上確界（不小於 0）
    """
    audit = cap_report or cap_audit(d, h, factor=cap_factor)
    if not audit.passed:
        raise PreconditionError(
            "密度不滿足區間上限", {"worst_excess": audit.worst_excess, "witness": audit.witness}
        )
    points = growth_grid(radii, angles, min_distance)
    distance = 1.0 - np.abs(points)
    ratios = poisson_eval(d, points) * distance / h.values(distance)
    k = int(np.argmax(ratios))
    constant = max(0.0, float(ratios[k]))
    logger.debug(f"Poisson 增長常數 {constant:.6g}，見證點 {points[k]}")
    return constant


# ---------------------------------------------------------------------------
# g_k
# ---------------------------------------------------------------------------


def sample_grid(rows: int, cols: int, radius: float = 0.9) -> np.ndarray:
    """|z| ≤ radius 上的極座標網格（rows 個半徑 × cols 個角度）"""
    r = np.linspace(0.0, radius, rows)
    theta = np.arange(cols) / cols
    return (r[:, None] * np.exp(1j * TWO_PI * theta)[None, :]).ravel()


@dataclass
class GkReport:
    """g_k 的檢查結果"""

    value_at_zero: complex
    core_modulus: float
    residual_modulus: float
    interior_bound_ok: bool
    compact_deviation: float
    compact_max_modulus: float
    compact_bound: float

    def passed(self, k: int, tolerance: float = 1e-12) -> bool:
        return (
            abs(self.value_at_zero - 1.0) <= tolerance
            and self.core_modulus == 1.0
            and self.residual_modulus <= 1.0 / k + tolerance
            and self.interior_bound_ok
            and self.compact_max_modulus <= self.compact_bound + 1e-9
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value_at_zero": [self.value_at_zero.real, self.value_at_zero.imag],
            "core_modulus": self.core_modulus,
            "residual_modulus": self.residual_modulus,
            "interior_bound_ok": self.interior_bound_ok,
            "compact_deviation": self.compact_deviation,
            "compact_max_modulus": self.compact_max_modulus,
            "compact_bound": self.compact_bound,
        }


@dataclass
class GkFunction:
    """g_k = exp(H_{f_{n_k}}/k)"""

    k: int
    n_k: int
    fn: FnFunction
    growth_constant: float
    h: MeasureFunction
    growth_shape: Tuple[int, int] = (40, 256)
    min_distance: float = 1e-6
    report: Optional[GkReport] = field(default=None, repr=False)

    @cached_property
    def density(self) -> StepDensity:
        return self.fn.density.scale(Fraction(1, self.k))

    def __call__(self, z: ComplexLike) -> Any:
        return np.exp(herglotz_eval(self.density, z))

    def boundary_modulus(self, theta: Fraction) -> float:
        """單位圓上 |g_k| = exp(f_{n_k}/k)"""
        return math.exp(float(self.fn.value_at(Fraction(theta))) / self.k)

    def interior_bound(self, z: ComplexLike) -> Any:
        """exp((4C/k)·h(1 − |z|)/(1 − |z|))"""
        t = 1.0 - np.abs(np.asarray(z, dtype=complex))
        return np.exp(4.0 * self.growth_constant / self.k * self.h.values(t) / t)

    def check(self, rows: int = 64, cols: int = 64, radius: float = 0.9) -> GkReport:
        """
        檢查 g_k(0) = 1、核心上邊界模為 1、殘餘上不超過 1/k、內部增長界

        內部增長界在量測 C 的同一網格上審核；C 再對緊集網格取上確界，
        使 |z| ≤ radius 上的界由 h(t)/t 的單調性直接給出。

        Args:
            rows: 緊集網格半徑數
            cols: 緊集網格角度數
            radius: 緊集半徑

        Returns:
            GkReport
        """
        core_values = self.fn.density.values_on(self.fn.core_realized)
        res_values = self.fn.density.values_on(self.fn.residual_realized)
        core_modulus = max((math.exp(float(v) / self.k) for v in core_values), default=1.0)
        residual_modulus = max(
            (math.exp(float(v) / self.k) for v in res_values), default=0.0
        )

        compact = sample_grid(rows, cols, radius)
        compact_values = self(compact)
        t = 1.0 - np.abs(compact)
        compact_ratio = float(np.max(poisson_eval(self.fn.density, compact) * t / self.h.values(t)))
        self.growth_constant = max(self.growth_constant, compact_ratio)
        outer = growth_grid(*self.growth_shape, self.min_distance)
        outer_ok = bool(np.all(np.abs(self(outer)) <= self.interior_bound(outer) * (1 + 1e-9)))
        compact_bound = float(self.interior_bound(np.array([radius]))[0])
        self.report = GkReport(
            value_at_zero=complex(self(0j)),
            core_modulus=core_modulus,
            residual_modulus=residual_modulus,
            interior_bound_ok=outer_ok,
            compact_deviation=float(np.max(np.abs(compact_values - 1.0))),
            compact_max_modulus=float(np.max(np.abs(compact_values))),
            compact_bound=compact_bound,
        )
        return self.report

    def samples(
        self, rows: int, cols: int, radius: float = 0.9
    ) -> List[Tuple[float, float, float, float, float]]:
        """CSV 行：z 實部、z 虛部、g_k 實部、g_k 虛部、|g_k|"""
        points = sample_grid(rows, cols, radius)
        values = self(points)
        return [
            (float(z.real), float(z.imag), float(g.real), float(g.imag), float(abs(g)))
            for z, g in zip(points, values)
        ]

    def norm_squared(
        self, mu: "MuSpec", radial_nodes: int = 64, angular_nodes: int = 256
    ) -> float:
        """
        ‖g_k‖² 在 L²(μ) 中

        內部：r 方向 Gauss–Legendre × 均勻角度，權重 (1 − r)^α·2r（歸一化面積）。
        邊界：∫_E exp(2f/k)·w dm，f 分段常數，逐片段精確求和。

        Args:
            mu: 測度描述（alpha、E、可選的圓周權重）
            radial_nodes: 徑向節點數
            angular_nodes: 角度節點數

        Returns:
            範數平方
        """
        nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
        r = 0.5 * (nodes + 1.0)
        w_r = 0.5 * weights * 2.0 * r * np.power(1.0 - r, mu.alpha)
        theta = np.arange(angular_nodes) / angular_nodes
        points = r[:, None] * np.exp(1j * TWO_PI * theta)[None, :]
        modulus = np.abs(self(points.ravel())).reshape(points.shape) ** 2
        interior = float(np.sum(w_r * modulus.mean(axis=1)))

        E_D, _ = mu.E.realize(self.fn.settings.get("cantor_depth", 12))
        boundary = 0.0
        for a, b, v in self.fn.density.pieces():
            factor = math.exp(2.0 * float(v) / self.k)
            for lo, hi in E_D.clip(a, b):
                weight = mu.circle_weight.mass(lo, hi) if mu.circle_weight else hi - lo
                boundary += factor * float(weight)
        return interior + boundary

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "k": self.k,
            "n_k": self.n_k,
            "growth_constant": self.growth_constant,
            "gauge": self.h.to_label(),
        }
        if self.report is not None:
            data["report"] = self.report.to_dict()
        return data


def select_generation(
    E: StructuredSet,
    h: MeasureFunction,
    k: int,
    generation_budget: int = 11,
    cache: Optional[Dict[int, FnFunction]] = None,
    **construction: Any,
) -> FnFunction:
    """
    最小的 n 使 sup_{res} f_n ≤ −k·log k

    Args:
        E: 結構化集合
        h: 規範函數
        k: 正整數
        generation_budget: 最大代數
        cache: 各代 f_n 的共用快取
        construction: 傳給 construct_fn 的參數

    Returns:
        f_{n_k}
    """
    if k < 1:
        raise PreconditionError(f"k 必須 ≥ 1: {k}")
    cache = cache if cache is not None else {}
    threshold = -k * math.log(k)
    decomposition = construction.pop("decomposition", None) or decompose(E, h)
    if decomposition.residual.is_empty:
        raise NotApplicableError("殘餘部分為空，g_k 無定義")

    sups: List[float] = []
    for n in range(1, generation_budget + 1):
        if n not in cache:
            cache[n] = construct_fn(E, h, n, decomposition=decomposition, **construction)
        sup = cache[n].sup_on_residual()
        sups.append(sup)
        if sup <= threshold + 1e-12:
            logger.info(f"k = {k}: n_k = {n}，殘餘上確界 {sup:.6g} ≤ {threshold:.6g}")
            return cache[n]
    raise ResolutionLimitError(
        "代數預算內找不到足夠負的 f_n",
        {"k": k, "threshold": threshold, "budget": generation_budget, "sups": sups},
    )


def build_gk(
    E: StructuredSet,
    h: MeasureFunction,
    k: int,
    generation_budget: int = 11,
    cache: Optional[Dict[int, FnFunction]] = None,
    growth_radii: int = 40,
    growth_angles: int = 256,
    min_distance: float = 1e-6,
    **construction: Any,
) -> GkFunction:
    """
    構造 g_k 並量測增長常數 C

    Args:
        E: 結構化集合（殘餘部分非空）
        h: 規範函數
        k: 正整數
        generation_budget: f_n 的最大代數
        cache: 各代 f_n 的共用快取
        growth_radii: 增長常數的徑向取樣數
        growth_angles: 增長常數的角向取樣數
        min_distance: 最小的 1 − |z|
        construction: 傳給 construct_fn 的參數

    Returns:
        GkFunction（尚未執行 check）
    """
    fn = select_generation(E, h, k, generation_budget, cache, **construction)
    # 性質 (i) 給出 ∫_Δ f_n ≤ 2h(|Δ|)，沿用構造時的審核
    constant = poisson_growth_ratio(
        fn.density,
        h,
        growth_radii,
        growth_angles,
        min_distance,
        cap_factor=2.0,
        cap_report=fn.report.cap if fn.report else None,
    )
    return GkFunction(
        k=k,
        n_k=fn.generation,
        fn=fn,
        growth_constant=constant,
        h=h,
        growth_shape=(growth_radii, growth_angles),
        min_distance=min_distance,
    )
