"""
Frostman 測度構造

1. 二進階梯：在 D 的最細一代區間上放質量 h(2^-depth)，由下往上把質量超過
   h(|d|) 的區間按比例縮小
2. 平均：在 U 的每條弧 α_n 上把密度換成平均值 c_n，再除以 12

輸出為分段常數密度 StepDensity，區間上限 ν(Δ) ≤ h(|Δ|) 以斷點對窮舉審核。
"""
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .circle_sets import Arc, ArcUnion, format_rational
from .errors import LabValidationError, PreconditionError, ResolutionLimitError
from .hausdorff_content import ContentBracket, DyadicCell, dyadic_content
from .measure_functions import MeasureFunction

logger = logging.getLogger(__name__)

CAP_TOLERANCE = 1e-12
AVERAGING_DIVISOR = 12

Piece = Tuple[Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class StepDensity:
    """
    [0,1) 上的分段常數密度

    edges 從 0 到 1 嚴格遞增；values[i] 是 [edges[i], edges[i+1]) 上的值。
    值為 Fraction，任何區間的質量都能精確計算。
    """

    edges: Tuple[Fraction, ...] = (Fraction(0), Fraction(1))
    values: Tuple[Fraction, ...] = (Fraction(0),)

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.values) + 1:
            raise LabValidationError("斷點數必須比值的數目多 1")
        if self.edges[0] != 0 or self.edges[-1] != 1:
            raise LabValidationError("斷點必須從 0 到 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise LabValidationError("斷點必須嚴格遞增")

    @classmethod
    def zero(cls) -> "StepDensity":
        return cls()

    @classmethod
    def constant(cls, value: Fraction) -> "StepDensity":
        return cls((Fraction(0), Fraction(1)), (Fraction(value),))

    @classmethod
    def from_pieces(cls, pieces: Iterable[Piece]) -> "StepDensity":
        """
        由互不重疊的 (a, b, value) 線性片段建立密度，其餘位置為 0

        相鄰且同值的片段會合併。
        """
        ordered = sorted((a, b, v) for a, b, v in pieces if b > a)
        edges: List[Fraction] = [Fraction(0)]
        values: List[Fraction] = []
        cursor = Fraction(0)
        for a, b, v in ordered:
            if a < cursor:
                raise LabValidationError(f"片段重疊: [{a}, {b})")
            if a > cursor:
                values.append(Fraction(0))
                edges.append(a)
            values.append(Fraction(v))
            edges.append(b)
            cursor = b
        if cursor < 1:
            values.append(Fraction(0))
            edges.append(Fraction(1))
        if not values:
            return cls.zero()
        return cls._merged(edges, values)

    @classmethod
    def _merged(cls, edges: List[Fraction], values: List[Fraction]) -> "StepDensity":
        keep_edges = [edges[0]]
        keep_values: List[Fraction] = []
        for i, v in enumerate(values):
            if keep_values and keep_values[-1] == v:
                keep_edges[-1] = edges[i + 1]
            else:
                keep_values.append(v)
                keep_edges.append(edges[i + 1])
        return cls(tuple(keep_edges), tuple(keep_values))

    def pieces(self) -> Iterator[Piece]:
        for i, v in enumerate(self.values):
            yield self.edges[i], self.edges[i + 1], v

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        return self.edges

    @cached_property
    def _cumulative(self) -> List[Fraction]:
        cumulative = [Fraction(0)]
        for a, b, v in self.pieces():
            cumulative.append(cumulative[-1] + v * (b - a))
        return cumulative

    def _mass_to(self, x: Fraction) -> Fraction:
        i = bisect_right(self.edges, x) - 1
        if i >= len(self.values):
            return self._cumulative[-1]
        return self._cumulative[i] + self.values[i] * (x - self.edges[i])

    def mass(self, a: Fraction, b: Fraction) -> Fraction:
        """∫_[a,b) 密度，0 ≤ a ≤ b ≤ 1"""
        if b <= a:
            return Fraction(0)
        return self._mass_to(b) - self._mass_to(a)

    def mass_arc(self, arc: Arc) -> Fraction:
        return sum((self.mass(a, b) for a, b in arc.intervals()), Fraction(0))

    def mass_on(self, U: ArcUnion) -> Fraction:
        return sum((self.mass(a, b) for a, b in U.intervals), Fraction(0))

    @property
    def total(self) -> Fraction:
        return self._cumulative[-1]

    def value_at(self, x: Fraction) -> Fraction:
        x = Fraction(x) % 1
        return self.values[bisect_right(self.edges, x) - 1]

    def values_on(self, U: ArcUnion) -> List[Fraction]:
        """與 U 有正測度交集的片段上的值"""
        found = []
        for a, b, v in self.pieces():
            if U.overlap(a, b) > 0:
                found.append(v)
        return found

    def _combine(
        self, other: "StepDensity", op: Callable[[Fraction, Fraction], Fraction]
    ) -> "StepDensity":
        edges = sorted(set(self.edges) | set(other.edges))
        values = []
        for a in edges[:-1]:
            values.append(op(self.value_at(a), other.value_at(a)))
        return self._merged(edges, values)

    def __add__(self, other: "StepDensity") -> "StepDensity":
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: "StepDensity") -> "StepDensity":
        return self._combine(other, lambda x, y: x - y)

    def scale(self, factor: Fraction) -> "StepDensity":
        return self._merged(list(self.edges), [v * factor for v in self.values])

    def restrict(self, U: ArcUnion) -> "StepDensity":
        """乘上 U 的指示函數"""
        pieces: List[Piece] = []
        for a, b, v in self.pieces():
            if v == 0:
                continue
            for lo, hi in U.clip(a, b):
                pieces.append((lo, hi, v))
        return StepDensity.from_pieces(pieces)

    @cached_property
    def float_edges(self) -> np.ndarray:
        return np.array([float(e) for e in self.edges])

    @cached_property
    def float_values(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @cached_property
    def float_cumulative(self) -> np.ndarray:
        return np.array([float(c) for c in self._cumulative])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "breakpoints": [format_rational(e) for e in self.edges],
            "values": [float(v) for v in self.values],
            "total": float(self.total),
        }


# ---------------------------------------------------------------------------
# 區間上限審核
# ---------------------------------------------------------------------------


@dataclass
class CapAuditReport:
    """ν(Δ) − factor·h(|Δ|) 在所有斷點對區間上的最大值"""

    worst_excess: float
    witness: Optional[Tuple[float, float]]
    pairs_checked: int
    factor: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst_excess <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "worst_excess": self.worst_excess,
            "witness": list(self.witness) if self.witness else None,
            "pairs_checked": self.pairs_checked,
            "factor": self.factor,
            "passed": self.passed,
        }


def cap_audit(
    d: StepDensity,
    h: MeasureFunction,
    factor: float = 1.0,
    tolerance: float = CAP_TOLERANCE,
) -> CapAuditReport:
    """
    窮舉所有斷點對區間（含跨越 0 的區間）

    固定兩端所在的片段時，質量對端點是線性的而 −h(|Δ|) 是凸的（h 凹），
    最大值在斷點上取到，因此斷點對的檢查對所有區間都成立。

    Args:
        d: 分段常數密度
        h: 規範函數
        factor: 上限倍數
        tolerance: 容差

    Returns:
        CapAuditReport；witness 為最壞的區間 (起點, 長度)
    """
    x = d.float_edges
    cum = d.float_cumulative
    total = cum[-1]
    n = len(x)
    worst = -np.inf
    witness: Optional[Tuple[float, float]] = None
    pairs = 0
    for i in range(n - 1):
        lengths = x[i + 1 :] - x[i]
        masses = cum[i + 1 :] - cum[i]
        excess = masses - factor * h.values(lengths)
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst = float(excess[k])
            witness = (float(x[i]), float(lengths[k]))
        if i > 0:
            # 從 x[j] 繞過 0 到 x[i] 的區間
            wrap_len = 1.0 - lengths[:-1]
            wrap_mass = total - masses[:-1]
            if wrap_len.size:
                excess = wrap_mass - factor * h.values(wrap_len)
                k = int(np.argmax(excess))
                if excess[k] > worst:
                    worst = float(excess[k])
                    witness = (float(x[i + 1 + k]), float(wrap_len[k]))
                pairs += wrap_len.size
        pairs += lengths.size
    report = CapAuditReport(
        worst_excess=float(worst),
        witness=witness,
        pairs_checked=pairs,
        factor=factor,
        tolerance=tolerance,
    )
    if not report.passed:
        logger.warning(f"區間上限審核失敗: 超出 {worst:.3e}，見證區間 {witness}")
    return report


def dyadic_cap_audit(
    d: StepDensity,
    h: MeasureFunction,
    depth: int,
    root: Optional[DyadicCell] = None,
    tolerance: float = CAP_TOLERANCE,
) -> CapAuditReport:
    """
    只在根區間內第 0 到 depth 代的二進區間上審核 ν(d) ≤ h(|d|)

    二進階梯只保證這一族區間上的上限；任意區間上的上限要經過平均化。

    Returns:
        CapAuditReport；witness 為最壞的二進區間 (起點, 長度)
    """
    root = root or DyadicCell.root()
    worst = -np.inf
    witness: Optional[Tuple[float, float]] = None
    cells = 0
    for generation in range(root.generation, depth + 1):
        count = 2 ** (generation - root.generation)
        width = 2.0**-generation
        x = float(root.start) + width * np.arange(count + 1)
        masses = np.diff(np.interp(x, d.float_edges, d.float_cumulative))
        excess = masses - float(h.values(width))
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst = float(excess[k])
            witness = (float(x[k]), width)
        cells += count
    report = CapAuditReport(
        worst_excess=float(worst),
        witness=witness,
        pairs_checked=cells,
        factor=1.0,
        tolerance=tolerance,
    )
    if not report.passed:
        logger.warning(f"二進區間上限審核失敗: 超出 {worst:.3e}，見證區間 {witness}")
    return report


# ---------------------------------------------------------------------------
# 二進階梯
# ---------------------------------------------------------------------------


@dataclass
class FrostmanResult:
    """Frostman 構造的輸出與後置條件檢查"""

    density: StepDensity
    depth: int
    content: ContentBracket
    required_ratio: float
    support: ArcUnion
    cap: Optional[CapAuditReport] = None
    arc_masses: List[Tuple[Arc, Fraction]] = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return self.density.total

    @property
    def achieved_ratio(self) -> float:
        """total / M_{h,d} 下界"""
        if self.content.lower == 0:
            return float("inf")
        return float(self.total) / self.content.lower

    @property
    def mass_ok(self) -> bool:
        return float(self.total) * (1.0 / self.required_ratio) >= self.content.lower - CAP_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.mass_ok and (self.cap is None or self.cap.passed)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "density": self.density.to_dict(),
            "depth": self.depth,
            "content": self.content.to_dict(),
            "achieved_ratio": self.achieved_ratio,
            "required_ratio": self.required_ratio,
            "mass_ok": self.mass_ok,
            "passed": self.passed,
        }
        if self.cap is not None:
            data["cap_audit"] = self.cap.to_dict()
        if self.arc_masses:
            data["arc_masses"] = [
                {"arc": arc.to_list(), "mass": float(m)} for arc, m in self.arc_masses
            ]
        return data


def _check_dyadic(D: ArcUnion, depth: int) -> None:
    scale = 2**depth
    for a, b in D.intervals:
        for e in (a, b):
            if (e * scale).denominator != 1:
                raise PreconditionError(
                    "端點不是所給深度的二進有理數",
                    {"endpoint": format_rational(e), "depth": depth},
                )


def _ladder(D: ArcUnion, h: MeasureFunction, depth: int, root: DyadicCell) -> np.ndarray:
    """根區間內第 depth 代各區間的質量"""
    levels = depth - root.generation
    count = 2**levels
    origin = root.start
    scale = 2**depth
    occupied = np.zeros(count, dtype=bool)
    for a, b in D.clip(root.start, root.end):
        lo = int((a - origin) * scale)
        hi = int((b - origin) * scale)
        occupied[lo:hi] = True

    masses = np.where(occupied, float(h.values(2.0**-depth)), 0.0)
    for level in range(levels - 1, -1, -1):
        block = 2 ** (levels - level)
        cell_mass = masses.reshape(-1, block).sum(axis=1)
        cap = float(h.values(2.0 ** -(root.generation + level)))
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(cell_mass > cap, cap / cell_mass, 1.0)
        masses = masses * np.repeat(factor, block)
    return masses


def frostman_dyadic(
    D: ArcUnion,
    h: MeasureFunction,
    depth: int,
    root: Optional[DyadicCell] = None,
    audit: bool = True,
) -> FrostmanResult:
    """
    二進階梯 Frostman 測度

    Args:
        D: 端點為深度 depth 二進有理數的弧聯集
        h: 規範函數
        depth: 最細代數
        root: 只在此二進區間內構造（更粗的區間上限由根區間的上限推出）
        audit: 是否審核各二進區間的上限

    Returns:
        FrostmanResult；total ≥ M_{h,d}(D) 下界 / 2 經檢查而非假設
    """
    root = root or DyadicCell.root()
    if depth < root.generation:
        raise LabValidationError("depth 小於根區間的代數")
    _check_dyadic(D, depth)

    masses = _ladder(D, h, depth, root)
    width = Fraction(1, 2**depth)
    pieces = []
    for k in np.nonzero(masses > 0)[0]:
        a = root.start + int(k) * width
        pieces.append((a, a + width, Fraction(float(masses[k])) / width))
    density = StepDensity.from_pieces(pieces)
    content = dyadic_content(D, h, max(depth, 1), root=root)
    result = FrostmanResult(
        density=density,
        depth=depth,
        content=content,
        required_ratio=0.5,
        support=D,
        cap=dyadic_cap_audit(density, h, depth, root) if audit else None,
    )
    logger.debug(
        f"二進階梯深度 {depth}: 總質量 {float(density.total):.6g}，"
        f"比值 {result.achieved_ratio:.4g}"
    )
    return result


def _components(U: ArcUnion, root: DyadicCell) -> List[Tuple[Fraction, Fraction]]:
    """U 在根區間內的連通分量（線性區間）"""
    if root.generation == 0:
        return [(arc.start, arc.end) for arc in U.arcs]
    return U.clip(root.start, root.end)


def _inner_cells(
    components: List[Tuple[Fraction, Fraction]], k: int, root: DyadicCell
) -> ArcUnion:
    """各分量內第 k 代的二進區間聯集（跨越 0 的分量分兩段處理）"""
    width = Fraction(1, 2**k)
    pieces = []
    for a, b in components:
        for lo, hi in ((a, min(b, Fraction(1))), (Fraction(0), b - 1)):
            if hi <= lo:
                continue
            first = -(-lo // width)
            last = hi // width
            if last > first:
                pieces.append((first * width, last * width))
    clipped = ArcUnion.from_intervals(pieces)
    return ArcUnion.from_intervals(clipped.clip(root.start, root.end))


def frostman_averaged(
    U: ArcUnion,
    h: MeasureFunction,
    depth: int,
    root: Optional[DyadicCell] = None,
    audit: bool = True,
) -> FrostmanResult:
    """
    平均化的 Frostman 測度

    在每條弧 α_n 內取二進區間 d'_n，逐代加細直到 M_{h,d}(∪d'_n) 下界達到
    M_{h,d}(U) 下界的一半；在 ∪d'_n 上跑二進階梯，把每條 α_n 上的密度換成
    平均值 c_n = mass(α_n)/|α_n|，最後除以 12。

    Args:
        U: 非空弧聯集
        h: 規範函數
        depth: 二進深度
        root: 只在此二進區間內構造
        audit: 是否做區間上限審核

    Returns:
        FrostmanResult；density 在每條 α_n 上為常數
    """
    root = root or DyadicCell.root()
    components = _components(U, root)
    if not components:
        raise PreconditionError("U 在根區間內為空")

    target = dyadic_content(U, h, depth, root=root)
    support = ArcUnion.empty()
    for k in range(root.generation + 1, depth + 1):
        support = _inner_cells(components, k, root)
        if support.is_empty:
            continue
        reached = dyadic_content(support, h, depth, root=root)
        if reached.lower >= target.lower / 2:
            break
    else:
        raise ResolutionLimitError(
            "二進子集在深度預算內未達到一半內容",
            {"depth": depth, "target": target.lower},
        )

    masses = _ladder(support, h, depth, root)
    width = Fraction(1, 2**depth)
    starts = [a for a, _ in components]
    totals = [Fraction(0)] * len(components)
    for k in np.nonzero(masses > 0)[0]:
        x = root.start + int(k) * width
        i = _owner(components, starts, x)
        totals[i] += Fraction(float(masses[k]))

    pieces: List[Piece] = []
    arc_masses: List[Tuple[Arc, Fraction]] = []
    for (a, b), total in zip(components, totals):
        arc_masses.append((Arc(a, b - a), total))
        value = total / (b - a) / AVERAGING_DIVISOR
        if b > 1:
            pieces.append((a, Fraction(1), value))
            pieces.append((Fraction(0), b - 1, value))
        else:
            pieces.append((a, b, value))

    density = StepDensity.from_pieces(pieces)
    result = FrostmanResult(
        density=density,
        depth=depth,
        content=target,
        required_ratio=1.0 / 24.0,
        support=support,
        cap=cap_audit(density, h) if audit else None,
        arc_masses=arc_masses,
    )
    if not result.passed:
        logger.warning(
            f"Frostman 後置條件失敗: 比值 {result.achieved_ratio:.4g}，"
            f"上限審核 {result.cap.passed if result.cap else 'skipped'}"
        )
    return result


def _owner(
    components: List[Tuple[Fraction, Fraction]], starts: List[Fraction], x: Fraction
) -> int:
    """包含點 x 的分量編號；跨越 0 的分量排在最後"""
    i = bisect_right(starts, x) - 1
    if i >= 0 and x < components[i][1]:
        return i
    if components[-1][1] > 1 and x + 1 < components[-1][1]:
        return len(components) - 1
    raise PreconditionError("二進區間不在任何分量內", {"x": format_rational(x)})
