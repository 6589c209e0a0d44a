"""
稠密閉子集與 f_n 函數序列的構造

dense_core_subset：二進極大區間掃描，選出 F 密度不超過 ε 的極大二進區間，
其餘部分即為閉子集 B；每條餘弧的 F 密度精確地不超過 ε。

construct_fn：在第 n 代每個與殘餘部分相交的二進區間 I 上，
    f_n|I = ν_I − (ν_I(I)/|I ∩ res|)·1_{I ∩ res}
其中 ν_I 是 I ∖ H_I 上的平均化 Frostman 測度限制到 I ∖ E 的部分；其質量不到
h(|I ∖ core|)/48 時改用縫隙上的飽和密度，仍不足則報告失敗。
E 以第 n + cantor_extra_depth 代的外層實現代替，所有性質都對實現檢查。
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from tqdm import tqdm

from .circle_sets import (
    Arc,
    ArcUnion,
    MassBracket,
    StructuredSet,
    ZERO_BRACKET,
    canonicalize,
    combine,
    format_rational,
)
from .core_residual import Decomposition, decompose
from .errors import LabValidationError, PreconditionError, ResolutionLimitError
from .frostman import CapAuditReport, StepDensity, cap_audit, frostman_averaged
from .hausdorff_content import DyadicCell
from .measure_functions import MeasureFunction

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
MASS_DIVISOR = 48
LEVEL_TOLERANCE = 1e-12


@dataclass
class DensitySubsetResult:
    """稠密閉子集 B 與其餘弧"""

    B: ArcUnion
    epsilon: Fraction
    defect: MassBracket
    complementary_arcs: ArcUnion
    selected_cells: int = 0
    densities_ok: bool = True
    worst_density: Fraction = Fraction(0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "B": self.B.to_list(),
            "epsilon": format_rational(self.epsilon),
            "defect": self.defect.to_dict(),
            "complementary_arcs": self.complementary_arcs.to_list(),
            "selected_cells": self.selected_cells,
            "densities_ok": self.densities_ok,
            "worst_density": float(self.worst_density),
        }


def _as_arc_union(F: Union[ArcUnion, StructuredSet], depth: int) -> Tuple[ArcUnion, MassBracket]:
    if isinstance(F, ArcUnion):
        return F, ZERO_BRACKET
    return F.realize(depth)


def dense_core_subset(
    F: Union[ArcUnion, StructuredSet],
    I: Arc,
    epsilon: Fraction = HALF,
    depth: int = 12,
) -> DensitySubsetResult:
    """
    I 內的閉子集 B，使每條餘弧 ℓ 滿足 |ℓ ∩ F| ≤ ε|ℓ|

    從整個圓開始向下掃描二進區間 J，J ∩ I 的 F 密度不超過 ε 就整塊選出，
    否則再分；到 depth 仍未選出的區間只把 F 的縫隙選出（密度 0），因此
    B ⊆ F。Cantor 分量以第 depth 代外層實現代替（外層是超集，密度條件只會更嚴）。

    Args:
        F: I 內的集合
        I: 弧
        epsilon: 密度閾值，0 < ε < 1
        depth: 掃描深度（絕對代數）

    Returns:
        DensitySubsetResult；defect 為 |B ∖ F| 的上下界
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon < 1):
        raise LabValidationError(f"epsilon 必須在 (0, 1) 內: {epsilon}")
    F_outer, tail = _as_arc_union(F, depth)
    I_union = canonicalize([I])
    F_outer = combine("intersect", F_outer, I_union)

    selected: List[Tuple[Fraction, Fraction]] = []
    stack = [DyadicCell.root()]
    while stack:
        cell = stack.pop()
        pieces = I_union.clip(cell.start, cell.end)
        if not pieces:
            continue
        size = sum((b - a for a, b in pieces), Fraction(0))
        mass = sum((F_outer.overlap(a, b) for a, b in pieces), Fraction(0))
        if mass <= epsilon * size:
            selected.extend(pieces)
        elif cell.generation < depth:
            left, right = cell.children()
            stack.extend((right, left))
        else:
            holes = combine("difference", ArcUnion.from_intervals(pieces), F_outer)
            selected.extend(holes.intervals)

    complementary = ArcUnion.from_intervals(selected)
    B = combine("difference", I_union, complementary)

    worst = Fraction(0)
    ok = True
    for arc in complementary.arcs:
        density = F_outer.overlap_arc(arc) / arc.length
        worst = max(worst, density)
        if density > epsilon:
            ok = False
    if not ok:
        logger.error(f"餘弧密度超過 ε: {float(worst)} > {float(epsilon)}")

    outside = combine("difference", B, F_outer).measure
    defect = MassBracket(outside, outside + tail.upper)
    return DensitySubsetResult(
        B=B,
        epsilon=epsilon,
        defect=defect,
        complementary_arcs=complementary,
        selected_cells=len(selected),
        densities_ok=ok,
        worst_density=worst,
    )


# ---------------------------------------------------------------------------
# f_n
# ---------------------------------------------------------------------------


@dataclass
class CellRecord:
    """第 n 代二進區間 I 上的構造記錄"""

    cell: DyadicCell
    residual_measure: Fraction
    nu_mass: Fraction = Fraction(0)
    level: Fraction = Fraction(0)
    complementary_arcs: int = 0
    content_lower: float = 0.0
    mass_bound: float = 0.0
    defect_correction: float = 0.0
    level_bound: float = 0.0
    profile: str = "frostman"
    saturation: float = 0.0
    nu_cap: Optional[CapAuditReport] = None

    @property
    def active(self) -> bool:
        return self.residual_measure > 0

    @property
    def mass_ok(self) -> bool:
        return float(self.nu_mass) >= self.mass_bound - LEVEL_TOLERANCE

    @property
    def level_ok(self) -> bool:
        return float(self.level) >= self.level_bound - LEVEL_TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "cell": self.cell.to_list(),
            "residual_measure": format_rational(self.residual_measure),
            "nu_mass": float(self.nu_mass),
            "level": -float(self.level),
            "complementary_arcs": self.complementary_arcs,
            "content_lower": self.content_lower,
            "mass_bound": self.mass_bound,
            "defect_correction": self.defect_correction,
            "mass_ok": self.mass_ok,
            "profile": self.profile,
            "saturation": self.saturation,
            "level_bound": -self.level_bound,
            "level_ok": self.level_ok,
        }
        if self.nu_cap is not None:
            data["nu_cap"] = self.nu_cap.to_dict()
        return data


@dataclass
class FnReport:
    """f_n 的性質 (i)–(v) 檢查結果"""

    integral_zero: bool
    cell_integrals_zero: bool
    core_zero: bool
    residual_nonpositive: bool
    cap: CapAuditReport
    audit_mode: str
    level_ok: bool
    mass_ok: bool
    min_level: float
    level_bound: float

    @property
    def passed(self) -> bool:
        return (
            self.integral_zero
            and self.cell_integrals_zero
            and self.core_zero
            and self.residual_nonpositive
            and self.cap.passed
            and self.mass_ok
            and self.level_ok
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "integral_zero": self.integral_zero,
            "cell_integrals_zero": self.cell_integrals_zero,
            "core_zero": self.core_zero,
            "residual_nonpositive": self.residual_nonpositive,
            "cap": self.cap.to_dict(),
            "audit_mode": self.audit_mode,
            "mass_ok": self.mass_ok,
            "level_ok": self.level_ok,
            "min_level": self.min_level,
            "level_bound": self.level_bound,
            "passed": self.passed,
        }


@dataclass
class FnFunction:
    """有號分段常數函數 f_n"""

    generation: int
    density: StepDensity
    cells: List[CellRecord]
    core_realized: ArcUnion
    residual_realized: ArcUnion
    report: Optional[FnReport] = None
    settings: Dict[str, Any] = field(default_factory=dict)

    def value_at(self, x: Fraction) -> Fraction:
        """點值；第 n 代二進端點上取 0"""
        x = Fraction(x) % 1
        if (x * 2**self.generation).denominator == 1:
            return Fraction(0)
        return self.density.value_at(x)

    def sup_on_residual(self) -> float:
        """殘餘實現上 f_n 的上確界"""
        values = self.density.values_on(self.residual_realized)
        return float(max(values)) if values else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "generation": self.generation,
            "density": self.density.to_dict(),
            "cells": [c.to_dict() for c in self.cells if c.active],
            "settings": dict(self.settings),
        }
        if self.report is not None:
            data["report"] = self.report.to_dict()
        return data


class _CellBuilder:
    """單一二進區間上的構造"""

    def __init__(
        self,
        h: MeasureFunction,
        generation: int,
        depth: int,
        core_D: ArcUnion,
        res_D: ArcUnion,
        epsilon: Fraction,
        strict: bool,
        core_tail: Fraction = Fraction(0),
    ):
        self.h = h
        self.generation = generation
        self.depth = depth
        self.core_D = core_D
        self.res_D = res_D
        self.E_D = combine("union", core_D, res_D)
        self.epsilon = epsilon
        self.strict = strict
        self.core_tail = core_tail

    def _mass_target(self, record: CellRecord) -> None:
        """
        ν_I 質量下界 h(|I ∖ core|)/48

        實現的核心是超集，|I ∖ core_D| ≤ |I ∖ core| ≤ |I ∖ core_D| + 尾質量；
        以 core_D 計算的下界與真下界之差記為 defect_correction。
        """
        cell = record.cell
        length = float(cell.length)
        outside = float(cell.length - self.core_D.overlap(cell.start, cell.end))
        widened = min(length, outside + float(self.core_tail))
        h_outside = float(self.h.values(outside))
        record.mass_bound = h_outside / MASS_DIVISOR
        record.defect_correction = (float(self.h.values(widened)) - h_outside) / MASS_DIVISOR
        record.level_bound = float(self.h.values(length)) / (MASS_DIVISOR * length)

    def _frostman_part(
        self, record: CellRecord, U: ArcUnion, outside_E: ArcUnion
    ) -> Optional[StepDensity]:
        """平均化 Frostman 測度限制到 I ∖ E"""
        try:
            frost = frostman_averaged(U, self.h, self.depth, root=record.cell, audit=False)
        except ResolutionLimitError as e:
            logger.debug(f"區間 {record.cell.to_list()} 內沒有可用的二進子區間: {e}")
            return None
        record.content_lower = frost.content.lower
        return frost.density.restrict(outside_E)

    def _saturated_part(self, record: CellRecord, gaps: ArcUnion) -> StepDensity:
        """
        在每段縫隙 β 上取常數密度 s·h(|β|)/|β|

        s = min(1, 質量下界 / Σ h(|β|))；s ≤ 1 時單段縫隙內的區間 Δ 滿足
        ν(Δ) ≤ h(|Δ|)。
        """
        intervals = gaps.clip(record.cell.start, record.cell.end)
        weights = [float(self.h.values(float(hi - lo))) for lo, hi in intervals]
        total = sum(weights)
        scale = min(1.0, record.mass_bound / total) if total > 0 else 0.0
        record.profile = "saturated"
        record.saturation = scale
        return StepDensity.from_pieces(
            (lo, hi, Fraction(scale * w) / (hi - lo))
            for (lo, hi), w in zip(intervals, weights)
            if w > 0
        )

    def build(self, cell: DyadicCell) -> Tuple[CellRecord, List[Tuple[Fraction, Fraction, Fraction]]]:
        a, b = cell.start, cell.end
        r = self.res_D.overlap(a, b)
        record = CellRecord(cell=cell, residual_measure=r)
        if r == 0:
            return record, []

        arc = Arc(a, cell.length)
        F = ArcUnion.from_intervals(self.E_D.clip(a, b))
        sweep = dense_core_subset(F, arc, self.epsilon, self.depth)
        U = sweep.complementary_arcs
        record.complementary_arcs = len(U.arcs)
        self._mass_target(record)

        nu: Optional[StepDensity] = None
        if not U.is_empty:
            outside_E = combine("difference", canonicalize([arc]), F)
            nu = self._frostman_part(record, U, outside_E)
            if nu is None or float(nu.total) < record.mass_bound:
                # Frostman 階梯在有限深度下看不到殘餘部分的不可見性，改用飽和密度
                nu = self._saturated_part(record, combine("difference", U, F))

        pieces: List[Tuple[Fraction, Fraction, Fraction]] = []
        if nu is not None:
            record.nu_mass = nu.total
            record.nu_cap = cap_audit(nu, self.h)
            pieces.extend(p for p in nu.pieces() if p[2] != 0)
        record.level = record.nu_mass / r
        if record.level != 0:
            pieces.extend((lo, hi, -record.level) for lo, hi in self.res_D.clip(a, b))

        if not (record.mass_ok and record.level_ok):
            details = {
                "cell": cell.to_list(),
                "nu_mass": float(record.nu_mass),
                "mass_bound": record.mass_bound,
                "level": float(record.level),
                "level_bound": record.level_bound,
                "profile": record.profile,
            }
            logger.error(f"ν_I 質量下界失敗，需要更深的 Cantor 實現: {details}")
            if self.strict:
                raise ResolutionLimitError("ν_I 質量下界失敗", details)
        return record, pieces


def _audit(
    fn_density: StepDensity,
    cells: List[CellRecord],
    h: MeasureFunction,
    max_breakpoints: int,
) -> Tuple[CapAuditReport, str]:
    """
    性質 (i)：∫_Δ f_n ≤ 2h(|Δ|)

    斷點不多時窮舉；否則逐區間檢查 ν_I 的上限（factor 1）與 f_n 限制在區間內
    的上限（factor 2）。跨區間的 Δ 拆成前一區間的後綴與後一區間的前綴，
    中間的完整區間積分為 0，兩端各自被 h(|Δ|) 控制。
    """
    if len(fn_density.edges) <= max_breakpoints:
        return cap_audit(fn_density, h, factor=2.0), "exhaustive"

    worst: Optional[CapAuditReport] = None
    pairs = 0
    for record in cells:
        if not record.active:
            continue
        a, b = record.cell.start, record.cell.end
        local = fn_density.restrict(ArcUnion.from_intervals([(a, b)]))
        reports = [cap_audit(local, h, factor=2.0)]
        if record.nu_cap is not None:
            reports.append(record.nu_cap)
        for report in reports:
            pairs += report.pairs_checked
            if worst is None or report.worst_excess > worst.worst_excess:
                worst = report
    if worst is None:
        worst = cap_audit(fn_density, h, factor=2.0)
    worst.pairs_checked = pairs
    return worst, "per_cell"


def construct_fn(
    E: StructuredSet,
    h: MeasureFunction,
    n: int,
    relative_depth: int = 8,
    cantor_extra_depth: int = 4,
    epsilon: Fraction = HALF,
    audit_max_breakpoints: int = 3000,
    decomposition: Optional[Decomposition] = None,
    workers: int = 1,
    strict: bool = True,
    progress: bool = False,
) -> FnFunction:
    """
    構造 f_n

    Args:
        E: 結構化集合
        h: 規範函數
        n: 代數（≥ 1）
        relative_depth: 掃描與 Frostman 階梯比 n 深的代數
        cantor_extra_depth: Cantor 分量實現比 n 深的代數
        epsilon: 稠密子集的密度閾值（固定 1/2）
        audit_max_breakpoints: 超過此斷點數改用逐區間審核
        decomposition: 已計算的分解
        workers: 執行緒數，結果按區間編號合併
        strict: ν_I 質量或負值水平下界失敗時拋出 ResolutionLimitError
        progress: 顯示進度條

    Returns:
        FnFunction（含性質檢查報告）
    """
    if n < 1:
        raise PreconditionError(f"代數 n 必須 ≥ 1: {n}")
    decomposition = decomposition or decompose(E, h)
    cantor_depth = n + cantor_extra_depth
    core_D, core_tail = decomposition.core.realize(cantor_depth)
    res_D, _ = decomposition.residual.realize(cantor_depth)

    builder = _CellBuilder(
        h,
        n,
        n + relative_depth,
        core_D,
        res_D,
        Fraction(epsilon),
        strict,
        core_tail=core_tail.upper,
    )
    cells = [DyadicCell(n, j) for j in range(2**n)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(
            tqdm(
                pool.map(builder.build, cells),
                total=len(cells),
                desc=f"f_{n}",
                disable=not progress,
            )
        )

    records = [record for record, _ in results]
    pieces = [p for _, cell_pieces in results for p in cell_pieces]
    density = StepDensity.from_pieces(pieces)

    fn = FnFunction(
        generation=n,
        density=density,
        cells=records,
        core_realized=core_D,
        residual_realized=res_D,
        settings={
            "relative_depth": relative_depth,
            "cantor_depth": cantor_depth,
            "epsilon": format_rational(Fraction(epsilon)),
            "gauge": h.to_label(),
        },
    )
    fn.report = verify_fn(fn, h, audit_max_breakpoints)
    logger.info(
        f"f_{n}: {sum(r.active for r in records)} 個活躍區間，"
        f"最小負值水平 {fn.report.min_level:.6g}（界 {fn.report.level_bound:.6g}）"
    )
    return fn


def verify_fn(fn: FnFunction, h: MeasureFunction, audit_max_breakpoints: int = 3000) -> FnReport:
    """檢查 f_n 的性質 (i)–(v)"""
    density = fn.density
    active = [r for r in fn.cells if r.active]

    cell_zero = all(
        density.mass(r.cell.start, r.cell.end) == 0 and r.nu_mass == r.level * r.residual_measure
        for r in active
    )
    core_zero = all(v == 0 for v in density.values_on(fn.core_realized))
    residual_nonpositive = all(v <= 0 for v in density.values_on(fn.residual_realized))
    cap, mode = _audit(density, fn.cells, h, audit_max_breakpoints)

    cell_length = 2.0**-fn.generation
    bound = float(h.values(cell_length)) / (MASS_DIVISOR * cell_length)
    levels = [float(r.level) for r in active]
    min_level = min(levels) if levels else math.inf
    return FnReport(
        integral_zero=density.total == 0,
        cell_integrals_zero=cell_zero,
        core_zero=core_zero,
        residual_nonpositive=residual_nonpositive,
        cap=cap,
        audit_mode=mode,
        level_ok=all(r.level_ok for r in active),
        mass_ok=all(r.mass_ok for r in active),
        min_level=min_level,
        level_bound=bound,
    )
