"""
圓周上的精確集合代數

單位圓參數化為 [0,1)（總測度 1），所有端點均為 Fraction。
- Arc：半開弧 [start, start+length) mod 1
- ArcUnion：互不相交、互不相鄰的弧，內部以 [0,1] 上的線性區間儲存
- CantorComponent：齊次中間間隙規則生成的胖 Cantor 集（可帶裁剪窗口）
- StructuredSet：弧的有限聯集加上 Cantor 分量
"""
import logging
from abc import ABC, abstractmethod
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .errors import (
    InvalidArcError,
    LabValidationError,
    RationalParseError,
    ResolutionLimitError,
)

logger = logging.getLogger(__name__)

Interval = Tuple[Fraction, Fraction]
RationalLike = Union[Fraction, int, str, Sequence[int], float]

DEFAULT_BIT_BUDGET = 65536
DEFAULT_TOLERANCE = Fraction(1, 10**12)
MP_DPS = 50
# 裁剪分量的邊界下降最多走這麼多代
MAX_DESCENT_LEVELS = 200

ZERO = Fraction(0)
ONE = Fraction(1)


def to_rational(value: Any) -> Fraction:
    """
    將輸入轉成精確有理數

    Args:
        value: Fraction、int、十進位或 "p/q" 字串、[num, den] 對，
               或 float（以其十進位表示解析）

    Returns:
        Fraction
    """
    if isinstance(value, bool):
        raise RationalParseError(f"無效的有理數: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise RationalParseError(f"無效的有理數: {value!r}") from e
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise RationalParseError(f"[num, den] 必須為整數: {value!r}")
        if den == 0:
            raise RationalParseError(f"分母為零: {value!r}")
        return Fraction(num, den)
    raise RationalParseError(f"無效的有理數: {value!r}")


def format_rational(value: Fraction) -> str:
    """輸出 "num/den"（整數時只輸出分子）"""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# 線性區間工具
# ---------------------------------------------------------------------------


def _merge(intervals: Iterable[Interval]) -> List[Interval]:
    ordered = sorted((a, b) for a, b in intervals if b > a)
    merged: List[List[Fraction]] = []
    for a, b in ordered:
        if merged and a <= merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1][1] = b
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def _intersect(xs: Sequence[Interval], ys: Sequence[Interval]) -> List[Interval]:
    result: List[Interval] = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        lo = max(xs[i][0], ys[j][0])
        hi = min(xs[i][1], ys[j][1])
        if hi > lo:
            result.append((lo, hi))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return result


def _complement(xs: Sequence[Interval]) -> List[Interval]:
    gaps: List[Interval] = []
    cursor = ZERO
    for a, b in xs:
        if a > cursor:
            gaps.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < ONE:
        gaps.append((cursor, ONE))
    return gaps


def _subtract(xs: Sequence[Interval], ys: Sequence[Interval]) -> List[Interval]:
    return _intersect(xs, _complement(ys))


def _length(xs: Iterable[Interval]) -> Fraction:
    return sum((b - a for a, b in xs), ZERO)


# ---------------------------------------------------------------------------
# 弧與弧聯集
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    """半開弧 [start, start+length) mod 1"""

    start: Fraction
    length: Fraction

    def __post_init__(self) -> None:
        start = to_rational(self.start)
        length = to_rational(self.length)
        if length <= 0 or length > 1:
            raise InvalidArcError(
                f"弧長必須在 (0, 1] 內: {length}",
                {"start": format_rational(start), "length": format_rational(length)},
            )
        object.__setattr__(self, "start", ZERO if length == 1 else start % 1)
        object.__setattr__(self, "length", length)

    @classmethod
    def full(cls) -> "Arc":
        return cls(ZERO, ONE)

    @classmethod
    def from_endpoints(cls, a: RationalLike, b: RationalLike) -> "Arc":
        """由端點 a、b 建立弧 [a, b)；b < a 時跨越 0"""
        start = to_rational(a) % 1
        end = to_rational(b) % 1
        length = (end - start) % 1
        if length == 0:
            raise InvalidArcError(f"端點重合: {a}, {b}")
        return cls(start, length)

    @property
    def end(self) -> Fraction:
        return self.start + self.length

    @property
    def wraps(self) -> bool:
        return self.end > 1

    def intervals(self) -> List[Interval]:
        if self.length == 1:
            return [(ZERO, ONE)]
        if not self.wraps:
            return [(self.start, self.end)]
        return [(ZERO, self.end - 1), (self.start, ONE)]

    def to_list(self) -> List[str]:
        return [format_rational(self.start), format_rational(self.length)]


@dataclass(frozen=True)
class ArcUnion:
    """
    弧的有限聯集

    intervals 為 [0,1] 上排序、互不相交且互不相鄰的線性區間；
    跨越 0 的弧以 [0, e) 與 [s, 1) 兩段表示，arcs 屬性會把它們合回一條弧。
    """

    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self) -> None:
        ivs = tuple((to_rational(a), to_rational(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not (ZERO <= a < b <= ONE):
                raise InvalidArcError(f"區間超出 [0,1]: [{a}, {b})")
        for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
            if a2 <= b1:
                raise InvalidArcError("區間必須排序且互不相鄰，請使用 canonicalize")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_intervals(cls, intervals: Iterable[Interval]) -> "ArcUnion":
        return cls(tuple(_merge(intervals)))

    @classmethod
    def empty(cls) -> "ArcUnion":
        return cls(())

    @classmethod
    def full(cls) -> "ArcUnion":
        return cls(((ZERO, ONE),))

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        ivs = list(self.intervals)
        if not ivs:
            return ()
        if ivs == [(ZERO, ONE)]:
            return (Arc.full(),)
        wrap: Optional[Arc] = None
        if len(ivs) > 1 and ivs[0][0] == 0 and ivs[-1][1] == 1:
            head = ivs.pop(0)
            tail = ivs.pop()
            wrap = Arc(tail[0], (ONE - tail[0]) + head[1])
        arcs = [Arc(a, b - a) for a, b in ivs]
        if wrap is not None:
            arcs.append(wrap)
        return tuple(arcs)

    @property
    def measure(self) -> Fraction:
        return _length(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return self.intervals == ((ZERO, ONE),)

    @cached_property
    def _starts(self) -> List[Fraction]:
        return [a for a, _ in self.intervals]

    @cached_property
    def _prefix(self) -> List[Fraction]:
        prefix = [ZERO]
        for a, b in self.intervals:
            prefix.append(prefix[-1] + (b - a))
        return prefix

    def _cumulative(self, x: Fraction) -> Fraction:
        i = bisect_right(self._starts, x) - 1
        if i < 0:
            return ZERO
        a, b = self.intervals[i]
        return self._prefix[i] + (min(x, b) - a)

    def overlap(self, a: Fraction, b: Fraction) -> Fraction:
        """|U ∩ [a, b)|，0 ≤ a ≤ b ≤ 1"""
        if b <= a:
            return ZERO
        return self._cumulative(b) - self._cumulative(a)

    def overlap_arc(self, arc: Arc) -> Fraction:
        return sum((self.overlap(a, b) for a, b in arc.intervals()), ZERO)

    def clip(self, a: Fraction, b: Fraction) -> List[Interval]:
        """與線性區間 [a, b) 的交集"""
        return _intersect(self.intervals, [(a, b)])

    def to_list(self) -> List[List[str]]:
        return [arc.to_list() for arc in self.arcs]


def canonicalize(arcs: Iterable[Arc]) -> ArcUnion:
    """
    將任意弧序列化為最小的互不相交排序表示

    Args:
        arcs: 可重疊、跨越 0、未排序的弧

    Returns:
        ArcUnion（測度不變，相鄰與重疊的弧會合併）
    """
    pieces: List[Interval] = []
    for arc in arcs:
        if not isinstance(arc, Arc):
            arc = Arc(*arc)
        pieces.extend(arc.intervals())
    return ArcUnion.from_intervals(pieces)


def combine(op: str, A: ArcUnion, B: ArcUnion) -> ArcUnion:
    """
    弧聯集的精確布林運算

    Args:
        op: "union" | "intersect" | "difference"
        A, B: 正規化的輸入

    Returns:
        ArcUnion
    """
    if op == "union":
        return ArcUnion.from_intervals(list(A.intervals) + list(B.intervals))
    if op == "intersect":
        return ArcUnion.from_intervals(_intersect(A.intervals, B.intervals))
    if op == "difference":
        return ArcUnion.from_intervals(_subtract(A.intervals, B.intervals))
    raise LabValidationError(f"未知的集合運算: {op}")


def complement(A: ArcUnion) -> ArcUnion:
    return ArcUnion.from_intervals(_complement(A.intervals))


# ---------------------------------------------------------------------------
# 測度區間
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassBracket:
    """測度的嚴格有理數上下界"""

    lower: Fraction
    upper: Fraction

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"下界大於上界: {self.lower} > {self.upper}")

    @classmethod
    def exact(cls, value: Fraction) -> "MassBracket":
        return cls(value, value)

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return float((self.lower + self.upper) / 2)

    def __add__(self, other: "MassBracket") -> "MassBracket":
        return MassBracket(self.lower + other.lower, self.upper + other.upper)

    def __sub__(self, other: "MassBracket") -> "MassBracket":
        return MassBracket(self.lower - other.upper, self.upper - other.lower)

    def scale(self, factor: Fraction) -> "MassBracket":
        if factor < 0:
            return MassBracket(self.upper * factor, self.lower * factor)
        return MassBracket(self.lower * factor, self.upper * factor)

    def shift(self, value: Fraction) -> "MassBracket":
        return MassBracket(self.lower + value, self.upper + value)

    def clamp_nonnegative(self) -> "MassBracket":
        return MassBracket(max(self.lower, ZERO), max(self.upper, ZERO))

    def contains(self, value: Union[Fraction, float]) -> bool:
        return float(self.lower) <= float(value) <= float(self.upper)

    def intersects(self, other: "MassBracket") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": format_rational(self.lower),
            "upper": format_rational(self.upper),
            "lower_float": float(self.lower),
            "upper_float": float(self.upper),
        }


ZERO_BRACKET = MassBracket(ZERO, ZERO)


# ---------------------------------------------------------------------------
# 間隙規則
# ---------------------------------------------------------------------------


class GapRule(ABC):
    """第 n 代從每個存活區間挖去中間長度 λ_n 的間隙"""

    kind: str = ""

    @abstractmethod
    def gap(self, n: int) -> Fraction:
        """λ_n（n ≥ 1）"""

    @abstractmethod
    def tail_bracket(self, depth: int) -> MassBracket:
        """Σ_{n>depth} 2ⁿ⁻¹ λ_n"""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def total_removed_bracket(self) -> MassBracket:
        return self.tail_bracket(0)

    def removed_through(self, depth: int) -> Fraction:
        return _removed_through(self, depth)

    @property
    def label(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "kind")
        return f"{self.kind}({params})"


@lru_cache(maxsize=4096)
def _removed_through(rule: GapRule, depth: int) -> Fraction:
    if depth <= 0:
        return ZERO
    return _removed_through(rule, depth - 1) + 2 ** (depth - 1) * rule.gap(depth)


@dataclass(frozen=True)
class GeometricRule(GapRule):
    """λ_n = a·qⁿ，總移除量 a·q/(1−2q)（需 q < 1/2）"""

    a: Fraction
    q: Fraction
    kind: str = field(default="geometric", init=False)

    def __post_init__(self) -> None:
        a = to_rational(self.a)
        q = to_rational(self.q)
        if a <= 0:
            raise LabValidationError(f"geometric 規則需要 a > 0: {a}")
        if not (0 < q < Fraction(1, 2)):
            raise LabValidationError(f"geometric 規則需要 0 < q < 1/2: {q}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q", q)

    def gap(self, n: int) -> Fraction:
        return self.a * self.q**n

    def tail_bracket(self, depth: int) -> MassBracket:
        ratio = 2 * self.q
        value = self.a * self.q * ratio**depth / (1 - ratio)
        return MassBracket.exact(value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "a": format_rational(self.a),
            "q": format_rational(self.q),
        }


@dataclass(frozen=True)
class HarmonicRule(GapRule):
    """λ_n = a·2⁻ⁿ·n⁻ᵖ，總移除量 (a/2)·ζ(p)（p 為 ≥ 2 的整數）"""

    a: Fraction
    p: int
    kind: str = field(default="harmonic", init=False)

    def __post_init__(self) -> None:
        a = to_rational(self.a)
        if a <= 0:
            raise LabValidationError(f"harmonic 規則需要 a > 0: {a}")
        p = self.p
        if isinstance(p, (str, Fraction, float)):
            p_value = to_rational(p)
            if p_value.denominator != 1:
                raise LabValidationError(f"harmonic 規則的 p 必須為整數: {p}")
            p = int(p_value)
        if isinstance(p, bool) or not isinstance(p, int) or p < 2:
            raise LabValidationError(f"harmonic 規則需要整數 p ≥ 2: {self.p}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", p)

    def gap(self, n: int) -> Fraction:
        return self.a / (2**n * n**self.p)

    def tail_bracket(self, depth: int) -> MassBracket:
        # Hurwitz zeta ζ(p, depth+1) = Σ_{n>depth} n⁻ᵖ
        with mpmath.workdps(MP_DPS):
            value = mpmath.zeta(self.p, depth + 1)
        center = self.a / 2 * Fraction(float(value))
        margin = center / 10**14
        return MassBracket(center - margin, center + margin)

    def integral_tail_bounds(self, depth: int) -> MassBracket:
        """積分比較給出的寬鬆但嚴格的界"""
        p = self.p
        if depth == 0:
            lower = 1 + Fraction(1, (p - 1) * 2 ** (p - 1))
            upper = 1 + Fraction(1, p - 1)
        else:
            lower = Fraction(1, (p - 1) * (depth + 1) ** (p - 1))
            upper = Fraction(1, (p - 1) * depth ** (p - 1))
        return MassBracket(self.a / 2 * lower, self.a / 2 * upper)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "a": format_rational(self.a), "p": self.p}


def rule_from_dict(data: Dict[str, Any]) -> GapRule:
    """從 JSON 字典建立間隙規則"""
    kind = data.get("kind")
    try:
        if kind == "geometric":
            return GeometricRule(data["a"], data["q"])
        if kind == "harmonic":
            return HarmonicRule(data["a"], data["p"])
    except KeyError as e:
        raise LabValidationError(f"{kind} 規則缺少參數: {e}") from e
    raise LabValidationError(f"未知的間隙規則: {kind}")


# ---------------------------------------------------------------------------
# Cantor 分量
# ---------------------------------------------------------------------------


def _check_bits(value: Fraction, bit_budget: int) -> None:
    if value.denominator.bit_length() > bit_budget:
        raise ResolutionLimitError(
            "有理數分母超出位元預算",
            {"bits": value.denominator.bit_length(), "bit_budget": bit_budget},
        )


@dataclass(frozen=True)
class CantorComponent:
    """
    宿主弧上的齊次胖 Cantor 集

    clip 不為 None 時表示 (Cantor 集) ∩ clip；分類沿用未裁剪的分量。
    """

    host: Arc
    rule: GapRule
    max_depth_hint: int = 12
    clip: Optional[Arc] = None

    def __post_init__(self) -> None:
        if self.host.wraps:
            raise LabValidationError("Cantor 宿主弧不可跨越 0", {"host": self.host.to_list()})
        if self.max_depth_hint < 0:
            raise LabValidationError(f"max_depth_hint 必須 ≥ 0: {self.max_depth_hint}")
        removed = self.rule.total_removed_bracket()
        if removed.upper >= self.host.length:
            raise LabValidationError(
                "移除間隙總量不小於宿主弧長",
                {
                    "removed": float(removed.upper),
                    "host_length": float(self.host.length),
                    "rule": self.rule.label,
                },
            )
        if self.clip is not None:
            clip = self.clip
            if clip.wraps or clip.start < self.host.start or clip.end > self.host.end:
                raise LabValidationError(
                    "裁剪窗口必須位於宿主弧內",
                    {"clip": clip.to_list(), "host": self.host.to_list()},
                )
            if clip == self.host:
                object.__setattr__(self, "clip", None)

    @property
    def underlying(self) -> "CantorComponent":
        """去掉裁剪窗口後的分量"""
        if self.clip is None:
            return self
        return replace(self, clip=None)

    @property
    def key(self) -> Tuple[Arc, GapRule]:
        return (self.host, self.rule)

    @property
    def window(self) -> Interval:
        arc = self.clip or self.host
        return (arc.start, arc.end)

    def with_window(self, a: Fraction, b: Fraction) -> Optional["CantorComponent"]:
        """同一 Cantor 集在 [a, b) ∩ 宿主上的部分；空集時回傳 None"""
        lo = max(a, self.host.start)
        hi = min(b, self.host.end)
        if hi <= lo:
            return None
        return replace(self, clip=Arc(lo, hi - lo))

    def surviving_length(self, n: int) -> Fraction:
        """第 n 代每個存活區間的長度 L_n = (L₀ − R_n)/2ⁿ"""
        return (self.host.length - self.rule.removed_through(n)) / 2**n

    def limit_mass(self) -> MassBracket:
        """未裁剪 Cantor 集的測度"""
        return self.rule.total_removed_bracket().scale(Fraction(-1)).shift(
            self.host.length
        )

    def generation_intervals(
        self,
        depth: int,
        window: Optional[Interval] = None,
        bit_budget: int = DEFAULT_BIT_BUDGET,
    ) -> List[Interval]:
        """
        第 depth 代與窗口有正測度交集的存活區間

        Args:
            depth: 代數（0 為宿主本身）
            window: 線性窗口，默認為分量的有效窗口
            bit_budget: 分母位元上限

        Returns:
            排序的 (a, b) 列表（未裁剪到窗口）
        """
        if depth < 0:
            raise LabValidationError(f"depth 必須 ≥ 0: {depth}")
        lo, hi = window if window is not None else self.window
        lefts = [self.host.start]
        for n in range(1, depth + 1):
            length = self.surviving_length(n)
            _check_bits(length, bit_budget)
            shift = length + self.rule.gap(n)
            next_lefts = []
            for x in lefts:
                for y in (x, x + shift):
                    if y < hi and y + length > lo:
                        next_lefts.append(y)
            lefts = next_lefts
        length = self.surviving_length(depth)
        return [(x, x + length) for x in lefts]

    def mass_bracket(self, tolerance: Fraction = DEFAULT_TOLERANCE) -> MassBracket:
        """
        (Cantor 集) ∩ 窗口 的測度

        齊次性：第 n 代每個存活區間內的 Cantor 質量恰為 (L₀ − T)/2ⁿ。
        完全落在窗口內的區間精確計入，跨越邊界的區間沿兩條邊界路徑下降。
        """
        limit = self.limit_mass()
        if self.clip is None:
            return limit
        lo, hi = self.window
        removed = self.rule.total_removed_bracket()
        weight = ZERO
        straddle = ZERO
        lefts = [self.host.start]
        for n in range(MAX_DESCENT_LEVELS + 1):
            length = self.surviving_length(n)
            piece_upper = (self.host.length - removed.lower) / 2**n
            crossing = []
            for x in lefts:
                a, b = x, x + length
                if a >= lo and b <= hi:
                    weight += Fraction(1, 2**n)
                elif a < hi and b > lo:
                    crossing.append(x)
            if not crossing:
                break
            if len(crossing) * piece_upper <= tolerance or n == MAX_DESCENT_LEVELS:
                for x in crossing:
                    covered = min(x + length, hi) - max(x, lo)
                    straddle += min(piece_upper, covered)
                break
            shift = self.surviving_length(n + 1) + self.rule.gap(n + 1)
            lefts = [y for x in crossing for y in (x, x + shift)]
        return MassBracket(limit.lower * weight, limit.upper * weight + straddle)

    def realize(
        self,
        depth: int,
        bit_budget: int = DEFAULT_BIT_BUDGET,
        tolerance: Fraction = DEFAULT_TOLERANCE,
    ) -> Tuple[ArcUnion, MassBracket]:
        """外層實現與尾質量（|outer| − |真集合|）"""
        lo, hi = self.window
        pieces = [
            (max(a, lo), min(b, hi))
            for a, b in self.generation_intervals(depth, bit_budget=bit_budget)
        ]
        outer = ArcUnion.from_intervals(pieces)
        if self.clip is None:
            return outer, self.rule.tail_bracket(depth)
        mass = self.mass_bracket(tolerance)
        tail = MassBracket.exact(outer.measure) - mass
        return outer, tail.clamp_nonnegative()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "host": self.host.to_list(),
            "rule": self.rule.to_dict(),
            "depth": self.max_depth_hint,
        }
        if self.clip is not None:
            data["clip"] = self.clip.to_list()
        return data


def realize_cantor(
    c: CantorComponent, depth: int, bit_budget: int = DEFAULT_BIT_BUDGET
) -> Tuple[ArcUnion, MassBracket]:
    """
    Cantor 分量的第 depth 代外層實現

    Returns:
        (outer, tail_mass)：真集合 ⊆ outer 且 |outer| − |真集合| = tail_mass
    """
    return c.realize(depth, bit_budget=bit_budget)


# ---------------------------------------------------------------------------
# 結構化集合
# ---------------------------------------------------------------------------


def _overlaps(x: Interval, y: Interval) -> bool:
    return min(x[1], y[1]) > max(x[0], y[0])


@dataclass(frozen=True)
class StructuredSet:
    """弧聯集 plain 加上 Cantor 分量；各分量的有效窗口兩兩不交且與 plain 不交"""

    plain: ArcUnion = field(default_factory=ArcUnion.empty)
    cantor_parts: Tuple[CantorComponent, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(sorted(self.cantor_parts, key=lambda c: c.window))
        object.__setattr__(self, "cantor_parts", parts)
        windows = [c.window for c in parts]
        for first, second in zip(windows, windows[1:]):
            if _overlaps(first, second):
                raise LabValidationError(
                    "Cantor 宿主重疊",
                    {"first": [str(v) for v in first], "second": [str(v) for v in second]},
                )
        for w in windows:
            if self.plain.overlap(*w) > 0:
                raise LabValidationError(
                    "Cantor 宿主與弧部分重疊", {"window": [str(v) for v in w]}
                )

    @classmethod
    def empty(cls) -> "StructuredSet":
        return cls()

    @classmethod
    def full(cls) -> "StructuredSet":
        return cls(ArcUnion.full())

    @classmethod
    def from_arcs(cls, *arcs: Arc) -> "StructuredSet":
        return cls(canonicalize(arcs))

    @classmethod
    def from_cantor(cls, *parts: CantorComponent) -> "StructuredSet":
        return cls(ArcUnion.empty(), tuple(parts))

    @property
    def is_empty(self) -> bool:
        return self.plain.is_empty and not self.cantor_parts

    @property
    def is_plain(self) -> bool:
        return not self.cantor_parts

    def support(self) -> ArcUnion:
        """plain 與各有效窗口的聯集（包含 Cantor 間隙）"""
        return ArcUnion.from_intervals(
            list(self.plain.intervals) + [c.window for c in self.cantor_parts]
        )

    def measure_bracket(self, tolerance: Fraction = DEFAULT_TOLERANCE) -> MassBracket:
        total = MassBracket.exact(self.plain.measure)
        share = tolerance / max(1, len(self.cantor_parts))
        for part in self.cantor_parts:
            total = total + part.mass_bracket(share)
        return total

    def realize(
        self, depth: int, bit_budget: int = DEFAULT_BIT_BUDGET
    ) -> Tuple[ArcUnion, MassBracket]:
        """plain ∪ 各 Cantor 分量的外層實現，以及總尾質量"""
        pieces = list(self.plain.intervals)
        tail = ZERO_BRACKET
        for part in self.cantor_parts:
            outer, part_tail = part.realize(depth, bit_budget=bit_budget)
            pieces.extend(outer.intervals)
            tail = tail + part_tail
        return ArcUnion.from_intervals(pieces), tail

    def with_parts(self, parts: Iterable[CantorComponent]) -> "StructuredSet":
        return StructuredSet(self.plain, tuple(parts))

    def to_spec_dict(self) -> Dict[str, Any]:
        return {
            "plain": self.plain.to_list(),
            "cantor": [c.to_dict() for c in self.cantor_parts],
        }


def measure_bracket(
    S: StructuredSet, tolerance: Fraction = DEFAULT_TOLERANCE
) -> MassBracket:
    return S.measure_bracket(tolerance)


def measure(
    S: StructuredSet, tolerance: Fraction = DEFAULT_TOLERANCE
) -> Union[Fraction, MassBracket]:
    """
    結構化集合的測度

    Returns:
        所有級數有閉式時回傳精確 Fraction，否則回傳寬度 ≤ tolerance 的 MassBracket
    """
    bracket = S.measure_bracket(tolerance)
    if bracket.is_exact:
        return bracket.lower
    return bracket


def _window_pieces(part: CantorComponent, pieces: Iterable[Interval]) -> List[CantorComponent]:
    result = []
    for a, b in pieces:
        clipped = part.with_window(a, b)
        if clipped is not None:
            result.append(clipped)
    return result


def restrict(S: StructuredSet, I: Arc) -> StructuredSet:
    """
    與弧 I 的精確交集

    部分覆蓋的 Cantor 分量改寫為帶裁剪窗口的分量。
    """
    arc_ivs = I.intervals()
    plain = ArcUnion.from_intervals(_intersect(S.plain.intervals, arc_ivs))
    parts: List[CantorComponent] = []
    for part in S.cantor_parts:
        parts.extend(_window_pieces(part, _intersect([part.window], arc_ivs)))
    return StructuredSet(plain, tuple(parts))


def _merge_parts(parts: Iterable[CantorComponent]) -> List[CantorComponent]:
    """同一底層分量的窗口合併；不同分量的窗口重疊時無法表示"""
    groups: Dict[Tuple[Arc, GapRule], List[Interval]] = {}
    owners: Dict[Tuple[Arc, GapRule], CantorComponent] = {}
    for part in parts:
        groups.setdefault(part.key, []).append(part.window)
        owners.setdefault(part.key, part.underlying)
    merged: List[CantorComponent] = []
    for key, windows in groups.items():
        merged.extend(_window_pieces(owners[key], _merge(windows)))
    merged.sort(key=lambda c: c.window)
    for first, second in zip(merged, merged[1:]):
        if _overlaps(first.window, second.window) and first.key != second.key:
            raise LabValidationError(
                "不同 Cantor 分量重疊，結果無法在結構化集合中表示",
                {"first": first.rule.label, "second": second.rule.label},
            )
    return merged


def union_structured(A: StructuredSet, B: StructuredSet) -> StructuredSet:
    """結構化集合的精確聯集"""
    plain = combine("union", A.plain, B.plain)
    parts: List[CantorComponent] = []
    for part, other in [(p, B.plain) for p in A.cantor_parts] + [
        (p, A.plain) for p in B.cantor_parts
    ]:
        parts.extend(_window_pieces(part, _subtract([part.window], other.intervals)))
    return StructuredSet(plain, tuple(_merge_parts(parts)))


def intersect_structured(A: StructuredSet, B: StructuredSet) -> StructuredSet:
    """結構化集合的精確交集"""
    plain = combine("intersect", A.plain, B.plain)
    parts: List[CantorComponent] = []
    for part in A.cantor_parts:
        parts.extend(_window_pieces(part, _intersect([part.window], B.plain.intervals)))
    for part in B.cantor_parts:
        parts.extend(_window_pieces(part, _intersect([part.window], A.plain.intervals)))
    for pa in A.cantor_parts:
        for pb in B.cantor_parts:
            if not _overlaps(pa.window, pb.window):
                continue
            if pa.key != pb.key:
                raise LabValidationError(
                    "不同 Cantor 分量相交，結果無法在結構化集合中表示",
                    {"first": pa.rule.label, "second": pb.rule.label},
                )
            parts.extend(_window_pieces(pa, _intersect([pa.window], [pb.window])))
    return StructuredSet(plain, tuple(_merge_parts(parts)))


def almost_contained(C: StructuredSet, E: StructuredSet) -> bool:
    """判定 |C ∖ E| = 0"""
    # Cantor 分量在每條弧內都留有正測度的間隙，弧只能被 plain 覆蓋
    if not combine("difference", C.plain, E.plain).is_empty:
        return False
    for part in C.cantor_parts:
        cover = list(E.plain.intervals) + [
            q.window for q in E.cantor_parts if q.key == part.key
        ]
        leftover = _subtract([part.window], _merge(cover))
        for piece in _window_pieces(part, leftover):
            if piece.mass_bracket().upper > 0:
                return False
    return True


def realize_set(
    S: StructuredSet, depth: int, bit_budget: int = DEFAULT_BIT_BUDGET
) -> Tuple[ArcUnion, MassBracket]:
    return S.realize(depth, bit_budget=bit_budget)
