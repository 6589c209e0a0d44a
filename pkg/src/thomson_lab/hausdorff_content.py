"""
二進 Hausdorff 內容

在二進樹上做動態規劃計算 M_{h,d}(U) 的嚴格上下界，並導出 M_h、M⁰_h、M⁰_{h,d}。
第 0 代（整個圓）也是覆蓋元素。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .circle_sets import ArcUnion, combine
from .errors import LabValidationError, NumericalError, PreconditionError
from .measure_functions import MeasureFunction

logger = logging.getLogger(__name__)

VARIANTS = ("M_hd", "M_h", "M0_hd", "M0_h")
VARIANT_ALIASES = {"mhd": "M_hd", "mh": "M_h", "m0hd": "M0_hd", "m0h": "M0_h"}
ASSERT_TOLERANCE = 1e-12


def normalize_variant(name: str) -> str:
    """接受 "mhd"、"M_hd" 等寫法"""
    if name in VARIANTS:
        return name
    key = name.replace("_", "").replace("-", "").lower()
    if key in VARIANT_ALIASES:
        return VARIANT_ALIASES[key]
    raise LabValidationError(f"未知的內容變體: {name}（可用 {', '.join(VARIANTS)}）")


@dataclass(frozen=True, order=True)
class DyadicCell:
    """第 n 代二進區間 [j·2⁻ⁿ, (j+1)·2⁻ⁿ)"""

    generation: int
    index: int

    def __post_init__(self) -> None:
        if self.generation < 0 or not (0 <= self.index < 2**self.generation):
            raise LabValidationError(f"無效的二進區間: ({self.generation}, {self.index})")

    @classmethod
    def root(cls) -> "DyadicCell":
        return cls(0, 0)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 2**self.generation)

    @property
    def start(self) -> Fraction:
        return Fraction(self.index, 2**self.generation)

    @property
    def end(self) -> Fraction:
        return Fraction(self.index + 1, 2**self.generation)

    def children(self) -> Tuple["DyadicCell", "DyadicCell"]:
        n, j = self.generation + 1, 2 * self.index
        return DyadicCell(n, j), DyadicCell(n, j + 1)

    def contains(self, other: "DyadicCell") -> bool:
        if other.generation < self.generation:
            return False
        return other.index >> (other.generation - self.generation) == self.index

    def to_list(self) -> List[int]:
        return [self.generation, self.index]


@dataclass
class ContentBracket:
    """內容的上下界；sandwich_lower 為 M_{h,d}/2（僅 M_h 系列）"""

    lower: float
    upper: float
    depth: int
    variant: str = "M_hd"
    sandwich_lower: Optional[float] = None
    cover: Optional[List[DyadicCell]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.lower < 0 or self.lower > self.upper + ASSERT_TOLERANCE:
            raise NumericalError(
                "內容區間不合法", {"lower": self.lower, "upper": self.upper}
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    def overlaps(self, other: "ContentBracket", tolerance: float = ASSERT_TOLERANCE) -> bool:
        return self.lower <= other.upper + tolerance and other.lower <= self.upper + tolerance

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "lower": self.lower,
            "upper": self.upper,
            "depth": self.depth,
            "variant": self.variant,
        }
        if self.sandwich_lower is not None:
            data["sandwich_lower"] = self.sandwich_lower
        if self.cover is not None:
            data["cover"] = [cell.to_list() for cell in self.cover]
        return data


class _DyadicProgram:
    """單次呼叫的動態規劃；只下降到部分覆蓋的區間"""

    def __init__(self, U: ArcUnion, h: MeasureFunction, max_depth: int):
        self.U = U
        self.h = h
        self.max_depth = max_depth
        self._h_cell = [float(h.values(2.0**-n)) for n in range(max_depth + 1)]

    def _h(self, length: Fraction) -> float:
        return float(self.h.values(float(length)))

    def solve(self, cell: DyadicCell) -> Tuple[float, float, List[DyadicCell]]:
        covered = self.U.overlap(cell.start, cell.end)
        if covered == 0:
            return 0.0, 0.0, []
        own = self._h_cell[cell.generation]
        if covered == cell.length:
            return own, own, [cell]
        if cell.generation >= self.max_depth:
            return self._h(covered), own, [cell]

        left, right = cell.children()
        lo_l, up_l, cover_l = self.solve(left)
        lo_r, up_r, cover_r = self.solve(right)
        lower = min(own, lo_l + lo_r)
        # 平手時取較粗的覆蓋
        if own <= up_l + up_r:
            return lower, own, [cell]
        return lower, up_l + up_r, cover_l + cover_r


def dyadic_content(
    U: ArcUnion,
    h: MeasureFunction,
    max_depth: int,
    root: Optional[DyadicCell] = None,
    with_cover: bool = False,
) -> ContentBracket:
    """
    M_{h,d}(U) 的嚴格上下界

    完全覆蓋的區間代價為 h(|d|)，空區間為 0，其餘取 min(h(|d|), 左+右)。
    到 max_depth 仍部分覆蓋的區間貢獻 [h(|d∩U|), h(|d|)]。

    Args:
        U: 弧聯集
        h: 規範函數
        max_depth: 最大代數（絕對代數，≥ 1）
        root: 只在此二進區間內計算，默認為整個圓
        with_cover: 是否輸出達到上界的覆蓋

    Returns:
        ContentBracket（variant="M_hd"）
    """
    if max_depth < 1:
        raise LabValidationError(f"max_depth 必須 ≥ 1: {max_depth}")
    root = root or DyadicCell.root()
    if root.generation > max_depth:
        raise LabValidationError("根區間的代數超過 max_depth")

    lower, upper, cover = _DyadicProgram(U, h, max_depth).solve(root)
    logger.debug(
        f"M_hd 深度 {max_depth}: [{lower:.12g}, {upper:.12g}]，覆蓋 {len(cover)} 個區間"
    )
    return ContentBracket(
        lower=lower,
        upper=upper,
        depth=max_depth,
        variant="M_hd",
        cover=cover if with_cover else None,
    )


def content_bracket(
    U: ArcUnion,
    h: MeasureFunction,
    max_depth: int,
    variant: str = "M_h",
    null_parts: Optional[ArcUnion] = None,
) -> ContentBracket:
    """
    由二進內容導出的各種內容上下界

    - M_h ∈ [M_{h,d}/2, M_{h,d}]，並以 h(|U|) 收緊下界
    - M⁰ 變體先刪去呼叫者明確標示的零測部分再做同樣的動態規劃

    Args:
        U: 弧聯集
        h: 規範函數
        max_depth: 最大代數
        variant: M_hd | M_h | M0_hd | M0_h
        null_parts: 呼叫者標示的零測部分（弧聯集本身沒有零測分量）

    Returns:
        ContentBracket
    """
    variant = normalize_variant(variant)
    if variant.startswith("M0") and null_parts is not None and not null_parts.is_empty:
        U = combine("difference", U, null_parts)

    dyadic = dyadic_content(U, h, max_depth)
    if variant == "M_hd":
        return dyadic

    floor = float(h.values(float(U.measure)))
    if dyadic.upper < floor - ASSERT_TOLERANCE:
        logger.error(f"內容上界 {dyadic.upper} 低於 h(|U|) = {floor}")
        raise NumericalError(
            "內容上界低於 h(|U|)", {"upper": dyadic.upper, "h_measure": floor}
        )

    if variant == "M0_hd":
        return ContentBracket(
            lower=max(dyadic.lower, min(floor, dyadic.upper)),
            upper=dyadic.upper,
            depth=max_depth,
            variant=variant,
        )

    sandwich = dyadic.lower / 2
    return ContentBracket(
        lower=max(sandwich, min(floor, dyadic.upper)),
        upper=dyadic.upper,
        depth=max_depth,
        variant=variant,
        sandwich_lower=sandwich,
    )


@dataclass
class ContinuityReport:
    """遞增序列的內容探測結果"""

    brackets: List[ContentBracket]
    nondecreasing: bool
    limit: ContentBracket

    def to_dict(self) -> Dict[str, Any]:
        return {
            "brackets": [b.to_dict() for b in self.brackets],
            "nondecreasing": self.nondecreasing,
            "limit": self.limit.to_dict(),
        }


def continuity_probe(
    sets: Sequence[ArcUnion], h: MeasureFunction, depth: int
) -> ContinuityReport:
    """
    遞增集合序列的 M_{h,d} 下界

    Args:
        sets: A_1 ⊆ A_2 ⊆ …
        h: 規範函數
        depth: 最大代數

    Returns:
        ContinuityReport；limit 為聯集在同一深度的內容
    """
    if not sets:
        raise PreconditionError("序列不可為空")
    for n, (A, B) in enumerate(zip(sets, sets[1:])):
        if not combine("difference", A, B).is_empty:
            raise PreconditionError("序列不是遞增的", {"index": n})

    brackets = [dyadic_content(A, h, depth) for A in sets]
    lowers = [b.lower for b in brackets]
    nondecreasing = all(b >= a - ASSERT_TOLERANCE for a, b in zip(lowers, lowers[1:]))
    limit = dyadic_content(sets[-1], h, depth)
    if not nondecreasing:
        logger.warning(f"內容下界不是遞增的: {lowers}")
    return ContinuityReport(brackets=brackets, nondecreasing=nondecreasing, limit=limit)
