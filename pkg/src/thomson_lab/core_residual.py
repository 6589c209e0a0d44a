"""
h-Carleson 證書、核心/殘餘分解與不可見性檢查

閉集 K ⊆ T 是 h-Carleson 集當且僅當其餘弧 ℓ_n 滿足 Σ h(|ℓ_n|) < ∞。
弧的有限聯集的餘集是有限弧聯集，總是 h-Carleson；Cantor 分量依間隙規則的
閉式級數判定。
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .circle_sets import (
    Arc,
    ArcUnion,
    CantorComponent,
    GapRule,
    GeometricRule,
    HarmonicRule,
    MassBracket,
    StructuredSet,
    almost_contained,
    canonicalize,
    combine,
    complement,
    intersect_structured,
    restrict,
    union_structured,
)
from .errors import PreconditionError, UnsupportedRuleError
from .hausdorff_content import ASSERT_TOLERANCE, ContentBracket, dyadic_content
from .measure_functions import MeasureFunction

logger = logging.getLogger(__name__)

CARLESON = "Carleson"
NOT_CARLESON = "NotCarleson"
DEFAULT_TERMS = 60
RESIDUAL_PREMISE = (
    "divergent homogeneous rule: every portion of the set has a divergent gap "
    "series (self-similarity), recorded as a premise"
)


@dataclass
class CarlesonCertificate:
    """
    h-Carleson 判定證書

    收斂時 Σ h(|ℓ_n|) ∈ [gap_sum_partial, gap_sum_partial + tail_bound]；
    發散時對 n ≥ n₀ 有 term_n ≥ c/n。inner_partial 只計入各分量內部的間隙。
    """

    verdict: str
    gap_sum_partial: float
    tail_bound: Optional[float] = None
    divergence_witness: Optional[Tuple[int, float]] = None
    inner_partial: float = 0.0
    terms: int = 0
    source: str = ""
    premise: Optional[str] = None
    components: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def is_carleson(self) -> bool:
        return self.verdict == CARLESON

    @property
    def total_upper(self) -> float:
        if not self.is_carleson:
            return math.inf
        return self.gap_sum_partial + (self.tail_bound or 0.0)

    @property
    def inner_sum(self) -> float:
        if not self.is_carleson:
            return math.inf
        return self.inner_partial + (self.tail_bound or 0.0)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "verdict": self.verdict,
            "gap_sum_partial": self.gap_sum_partial,
            "inner_partial": self.inner_partial,
            "terms": self.terms,
            "source": self.source,
        }
        if self.tail_bound is not None:
            data["tail_bound"] = self.tail_bound
        if self.divergence_witness is not None:
            n0, c = self.divergence_witness
            data["divergence_witness"] = {"n0": n0, "c": c}
        if self.premise:
            data["premise"] = self.premise
        if self.components:
            data["components"] = list(self.components)
        return data


# ---------------------------------------------------------------------------
# 間隙級數
# ---------------------------------------------------------------------------


class GapSeries:
    """
    Cantor 分量的間隙級數 Σ_{n≥1} 2ⁿ⁻¹ h(λ_n)

    每一對（規範函數 × 間隙規則）給出閉式的斂散判定、尾項上界或發散見證。
    """

    def __init__(self, rule: GapRule, h: MeasureFunction):
        if not isinstance(rule, (GeometricRule, HarmonicRule)):
            raise UnsupportedRuleError(f"沒有閉式級數檢驗的間隙規則: {rule!r}")
        self.rule = rule
        self.h = h
        self.a = float(rule.a)
        self._classify()

    def _classify(self) -> None:
        rule, h, a = self.rule, self.h, self.a
        self.witness: Optional[Tuple[int, float]] = None
        if isinstance(rule, GeometricRule):
            q = float(rule.q)
            if h.kind == "entropy":
                self.convergent = True
            else:
                self.ratio = 2.0 * q**h.beta
                self.convergent = self.ratio < 1.0
                if not self.convergent:
                    # 2ⁿ⁻¹(aqⁿ)^β = (a^β/2)·rⁿ ≥ a^β/2 ≥ (a^β/2)/n
                    self.witness = (1, a**h.beta / 2.0)
            return

        p = rule.p
        if h.kind == "entropy":
            self.convergent = p >= 3
            if not self.convergent:
                # term_n = (a/2nᵖ)(1 − log a + n log 2 + p log n) ≥ (a log 2/2)/n
                base = 1.0 - math.log(a)
                n0 = 1
                while base + p * math.log(n0) < 0:
                    n0 += 1
                self.witness = (n0, a * math.log(2.0) / 2.0)
            return

        # power × harmonic：(a^β/2)·2^{n(1−β)}·n^{−pβ} ≥ (a^β/2)/n
        beta = h.beta
        self.convergent = False
        slope = (1.0 - beta) * math.log(2.0)
        n0 = max(1, math.ceil((p * beta - 1.0) / slope))
        while n0 * slope < (p * beta - 1.0) * math.log(n0):
            n0 += 1
        self.witness = (n0, a**beta / 2.0)

    def term(self, n: int) -> float:
        """2ⁿ⁻¹·h(λ_n)，直接以規範函數求值"""
        gap = float(self.rule.gap(n))
        return 2.0 ** (n - 1) * float(self.h.values(gap))

    def closed_form_term(self, n: int) -> float:
        """展開後的通項，用來交叉檢驗 term"""
        a = self.a
        if isinstance(self.rule, GeometricRule):
            q = float(self.rule.q)
            if self.h.kind == "entropy":
                return a / 2.0 * (2.0 * q) ** n * (1.0 - math.log(a) - n * math.log(q))
            return a**self.h.beta / 2.0 * (2.0 * q**self.h.beta) ** n
        p = self.rule.p
        if self.h.kind == "entropy":
            return a / (2.0 * n**p) * (1.0 - math.log(a) + n * math.log(2.0) + p * math.log(n))
        beta = self.h.beta
        return a**beta / 2.0 * 2.0 ** (n * (1.0 - beta)) * n ** (-p * beta)

    def partial_sum(self, start: int, stop: int) -> float:
        """Σ_{start ≤ n ≤ stop} term_n"""
        return math.fsum(self.term(n) for n in range(start, stop + 1))

    def tail_after(self, N: int) -> float:
        """Σ_{n>N} term_n 的上界（收斂時）"""
        if not self.convergent:
            return math.inf
        a = self.a
        if isinstance(self.rule, GeometricRule):
            q = float(self.rule.q)
            if self.h.kind == "entropy":
                r = 2.0 * q
                geom = r ** (N + 1) / (1.0 - r)
                weighted = r ** (N + 1) * ((N + 1) - N * r) / (1.0 - r) ** 2
                A = 1.0 - math.log(a)
                return a / 2.0 * (max(A, 0.0) * geom - math.log(q) * weighted)
            r = self.ratio
            return a**self.h.beta / 2.0 * r ** (N + 1) / (1.0 - r)
        # entropy × harmonic, p ≥ 3：積分比較
        p = self.rule.p
        N = max(N, 2)
        A = max(1.0 - math.log(a), 0.0)
        bound = (
            A * N ** (1 - p) / (p - 1)
            + math.log(2.0) * N ** (2 - p) / (p - 2)
            + p * N ** (1 - p) * (math.log(N) / (p - 1) + 1.0 / (p - 1) ** 2)
        )
        return a / 2.0 * bound

    def sum_from(self, start: int, terms: int = DEFAULT_TERMS) -> Tuple[float, float]:
        """(Σ_{start ≤ n ≤ N} term_n, 尾項上界)，N = max(start, terms)"""
        stop = max(start, terms)
        return self.partial_sum(start, stop), self.tail_after(stop)

    def certificate(self, terms: int = DEFAULT_TERMS, source: str = "") -> CarlesonCertificate:
        partial = self.partial_sum(1, terms)
        if self.convergent:
            return CarlesonCertificate(
                verdict=CARLESON,
                gap_sum_partial=partial,
                tail_bound=self.tail_after(terms),
                inner_partial=partial,
                terms=terms,
                source=source or self.rule.label,
            )
        return CarlesonCertificate(
            verdict=NOT_CARLESON,
            gap_sum_partial=partial,
            divergence_witness=self.witness,
            inner_partial=partial,
            terms=terms,
            source=source or self.rule.label,
            premise=RESIDUAL_PREMISE,
        )


def _arc_gap_sum(arcs: ArcUnion, h: MeasureFunction) -> float:
    return math.fsum(float(h.values(float(arc.length))) for arc in arcs.arcs)


def carleson_from_arcs(arcs: ArcUnion, h: MeasureFunction) -> CarlesonCertificate:
    """
    以一族弧為餘集的閉集 T ∖ ∪arcs

    gap_sum_partial 為合併後餘弧的精確和；family_sum = Σ h(|arc|) 經次可加性
    給出上界。
    """
    merged = _arc_gap_sum(arcs, h)
    cert = CarlesonCertificate(
        verdict=CARLESON,
        gap_sum_partial=merged,
        tail_bound=0.0,
        terms=len(arcs.arcs),
        source="arcs",
    )
    cert.components.append({"family_sum": merged, "arcs": len(arcs.arcs)})
    return cert


def closed_complement(I: Arc, U: ArcUnion) -> ArcUnion:
    """I ∖ U（作為閉集時取閉包，測度相同）"""
    return combine("difference", canonicalize([I]), U)


def is_h_carleson(
    closed_set: Union[ArcUnion, CantorComponent, StructuredSet],
    h: MeasureFunction,
    terms: int = DEFAULT_TERMS,
) -> CarlesonCertificate:
    """
    判定閉集是否為 h-Carleson 集

    Args:
        closed_set: 閉弧的有限聯集、Cantor 分量或結構化集合
        h: 規範函數
        terms: 級數顯式求和的項數

    Returns:
        CarlesonCertificate
    """
    if isinstance(closed_set, ArcUnion):
        gaps = complement(closed_set)
        total = _arc_gap_sum(gaps, h)
        return CarlesonCertificate(
            verdict=CARLESON,
            gap_sum_partial=total,
            tail_bound=0.0,
            terms=len(gaps.arcs),
            source="arcs",
        )
    if isinstance(closed_set, CantorComponent):
        return certify_closed_set(StructuredSet.from_cantor(closed_set), h, terms)
    return certify_closed_set(closed_set, h, terms)


def _distinct_components(S: StructuredSet) -> List[CantorComponent]:
    """同一底層分量的多個裁剪片段只計一次"""
    seen: Dict[Tuple[Arc, GapRule], CantorComponent] = {}
    for part in S.cantor_parts:
        seen.setdefault(part.key, part)
    return list(seen.values())


def certify_closed_set(
    S: StructuredSet, h: MeasureFunction, terms: int = DEFAULT_TERMS
) -> CarlesonCertificate:
    """
    結構化閉集的 h-Carleson 證書

    間隙和 = 各有效片段之間的餘弧（精確有限和）+ 各分量的間隙級數。
    裁剪分量沿用完整分量的級數，因此是上界估計。
    """
    outer = _arc_gap_sum(complement(S.support()), h)
    inner = 0.0
    tail = 0.0
    components: List[Dict[str, Any]] = []
    for part in _distinct_components(S):
        cert = GapSeries(part.rule, h).certificate(terms)
        components.append({"rule": part.rule.to_dict(), **cert.to_dict()})
        if not cert.is_carleson:
            return CarlesonCertificate(
                verdict=NOT_CARLESON,
                gap_sum_partial=outer + cert.gap_sum_partial,
                divergence_witness=cert.divergence_witness,
                inner_partial=cert.inner_partial,
                terms=terms,
                source=part.rule.label,
                premise=cert.premise,
                components=components,
            )
        inner += cert.gap_sum_partial
        tail += cert.tail_bound or 0.0
    return CarlesonCertificate(
        verdict=CARLESON,
        gap_sum_partial=outer + inner,
        tail_bound=tail,
        inner_partial=inner,
        terms=terms,
        source="structured",
        components=components,
    )


# ---------------------------------------------------------------------------
# 分解
# ---------------------------------------------------------------------------


@dataclass
class Decomposition:
    """核心/殘餘分解；measure_core 對應 h-Carleson 子集測度的上確界"""

    core: StructuredSet
    residual: StructuredSet
    certificates: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def measure_core(self) -> MassBracket:
        return self.core.measure_bracket()

    @property
    def measure_residual(self) -> MassBracket:
        return self.residual.measure_bracket()

    def additivity_holds(self, E: StructuredSet) -> bool:
        """|core| + |residual| 與 |E| 的區間相交"""
        return (self.measure_core + self.measure_residual).intersects(E.measure_bracket())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "core": self.core.to_spec_dict(),
            "residual": self.residual.to_spec_dict(),
            "certificates": list(self.certificates),
            "measure_core": self.measure_core.to_dict(),
            "measure_residual": self.measure_residual.to_dict(),
        }


def decompose(
    E: StructuredSet, h: MeasureFunction, terms: int = DEFAULT_TERMS
) -> Decomposition:
    """
    核心/殘餘分解

    弧總是核心；Carleson 判定的 Cantor 分量歸入核心，其餘歸入殘餘。
    零測集 N 取為空集。

    Args:
        E: 結構化集合
        h: 規範函數

    Returns:
        Decomposition
    """
    core_parts: List[CantorComponent] = []
    residual_parts: List[CantorComponent] = []
    certificates: List[Dict[str, Any]] = []
    verdicts: Dict[Tuple[Arc, GapRule], CarlesonCertificate] = {}

    for part in E.cantor_parts:
        if part.key not in verdicts:
            verdicts[part.key] = GapSeries(part.rule, h).certificate(terms)
        cert = verdicts[part.key]
        certificates.append(
            {"host": part.host.to_list(), "rule": part.rule.to_dict(), **cert.to_dict()}
        )
        (core_parts if cert.is_carleson else residual_parts).append(part)

    result = Decomposition(
        core=StructuredSet(E.plain, tuple(core_parts)),
        residual=StructuredSet(ArcUnion.empty(), tuple(residual_parts)),
        certificates=certificates,
    )
    logger.info(
        f"分解完成: 核心 {len(core_parts)} 個 Cantor 分量，殘餘 {len(residual_parts)} 個"
    )
    return result


# ---------------------------------------------------------------------------
# 餘集內容與不可見性
# ---------------------------------------------------------------------------


def complement_content_bracket(
    I: Arc, Y: StructuredSet, h: MeasureFunction, depth: int
) -> ContentBracket:
    """
    M⁰_h(I ∖ Y) 的上下界

    下界：max(M_{h,d}(I ∖ outer) 下界 / 2, h(|I ∖ Y| 下界))，outer 為 Y 的外層實現
    上界：min(h(|I|), M_{h,d}(I ∖ outer) 上界 + 更深代間隙的級數尾項,
              以 I 內間隙本身覆蓋的級數和)

    Args:
        I: 弧
        Y: 結構化集合
        h: 規範函數
        depth: 二進深度與 Cantor 實現代數

    Returns:
        ContentBracket（variant="M0_h"）
    """
    Y_I = restrict(Y, I)
    outer, _ = Y_I.realize(depth)
    difference = closed_complement(I, outer)
    dyadic = dyadic_content(difference, h, depth)

    h_I = float(h.values(float(I.length)))
    leftover = I.length - Y_I.measure_bracket().upper
    floor = float(h.values(float(max(leftover, Fraction(0)))))
    lower = max(dyadic.lower / 2.0, floor)

    deeper = 0.0
    gap_cover = _arc_gap_sum(closed_complement(I, Y_I.support()), h)
    for part in _distinct_components(Y_I):
        series = GapSeries(part.rule, h)
        partial, tail = series.sum_from(depth + 1)
        deeper += partial + tail
        full_partial, full_tail = series.sum_from(1)
        gap_cover += full_partial + full_tail
    upper = min(h_I, dyadic.upper + deeper, gap_cover)
    return ContentBracket(
        lower=min(lower, upper), upper=upper, depth=depth, variant="M0_h"
    )


@dataclass
class InvisibilityReport:
    """I ∖ C 與 I ∖ (C ∩ core) 的內容上下界比較"""

    depths: List[int]
    without_c: List[ContentBracket]
    without_core_part: List[ContentBracket]
    consistent: bool
    nondecreasing: bool

    @property
    def passed(self) -> bool:
        return self.consistent and self.nondecreasing

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depths": list(self.depths),
            "without_c": [b.to_dict() for b in self.without_c],
            "without_core_part": [b.to_dict() for b in self.without_core_part],
            "consistent": self.consistent,
            "nondecreasing": self.nondecreasing,
            "passed": self.passed,
        }


def _nondecreasing(values: Sequence[float]) -> bool:
    return all(b >= a - ASSERT_TOLERANCE for a, b in zip(values, values[1:]))


def invisibility_check(
    E: StructuredSet,
    I: Arc,
    C: StructuredSet,
    h: MeasureFunction,
    depths: Sequence[int] = (6, 10, 14),
    decomposition: Optional[Decomposition] = None,
) -> InvisibilityReport:
    """
    殘餘部分對 M⁰_h 不可見的有限解析度檢查

    每個深度比較 M⁰_h(I ∖ C) 與 M⁰_h(I ∖ (C ∩ core_h(E))) 的區間是否相交，
    並檢查兩串下界隨深度遞增。

    Args:
        E: 結構化集合
        I: 弧
        C: 幾乎包含於 E 的結構化集合
        h: 規範函數
        depths: 遞增的深度列表

    Returns:
        InvisibilityReport
    """
    if not almost_contained(C, E):
        raise PreconditionError("C 不是幾乎包含於 E")
    decomposition = decomposition or decompose(E, h)
    core_part = intersect_structured(C, decomposition.core)

    without_c = [complement_content_bracket(I, C, h, d) for d in depths]
    without_core = [complement_content_bracket(I, core_part, h, d) for d in depths]
    consistent = all(a.overlaps(b) for a, b in zip(without_c, without_core))
    nondecreasing = _nondecreasing([b.lower for b in without_c]) and _nondecreasing(
        [b.lower for b in without_core]
    )
    if not consistent:
        logger.warning("不可見性檢查: 區間不相交")
    return InvisibilityReport(
        depths=list(depths),
        without_c=without_c,
        without_core_part=without_core,
        consistent=consistent,
        nondecreasing=nondecreasing,
    )


@dataclass
class ClosureReport:
    """兩個 h-Carleson 集的聯集與交集證書"""

    certificate_a: CarlesonCertificate
    certificate_b: CarlesonCertificate
    union: CarlesonCertificate
    intersection: CarlesonCertificate
    union_bound: float
    intersection_bound: float

    @property
    def passed(self) -> bool:
        return (
            self.union.is_carleson
            and self.intersection.is_carleson
            and self.union.total_upper <= self.union_bound + ASSERT_TOLERANCE
            and self.intersection.total_upper <= self.intersection_bound + ASSERT_TOLERANCE
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.certificate_a.to_dict(),
            "b": self.certificate_b.to_dict(),
            "union": self.union.to_dict(),
            "intersection": self.intersection.to_dict(),
            "union_bound": self.union_bound,
            "intersection_bound": self.intersection_bound,
            "passed": self.passed,
        }


def carleson_closure_check(
    A: StructuredSet, B: StructuredSet, h: MeasureFunction
) -> ClosureReport:
    """
    h-Carleson 集對聯集與交集封閉

    聯集的每條餘弧落在 A 的某條餘弧內，同一條餘弧內除兩端外都是 B 的餘弧，
    因此 Σ ≤ S_A + S_B + min(S_A, S_B)；交集的每條 A 或 B 餘弧只屬於一條
    交集餘弧，由次可加性 Σ ≤ S_A + S_B。
    """
    cert_a = certify_closed_set(A, h)
    cert_b = certify_closed_set(B, h)
    if not (cert_a.is_carleson and cert_b.is_carleson):
        raise PreconditionError(
            "輸入必須是 h-Carleson 集",
            {"a": cert_a.verdict, "b": cert_b.verdict},
        )
    s_a, s_b = cert_a.total_upper, cert_b.total_upper
    return ClosureReport(
        certificate_a=cert_a,
        certificate_b=cert_b,
        union=certify_closed_set(union_structured(A, B), h),
        intersection=certify_closed_set(intersect_structured(A, B), h),
        union_bound=s_a + s_b + min(s_a, s_b),
        intersection_bound=s_a + s_b,
    )
