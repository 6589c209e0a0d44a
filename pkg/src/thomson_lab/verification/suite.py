"""
驗證套件

按 VerificationConfig 的順序執行各模組的性質檢查；性質不成立時寫入報告
（附見證），不拋出錯誤。報告不含時間戳，同一種子與配置給出逐字相同的輸出。
"""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from ..circle_sets import Arc, ArcUnion, StructuredSet, almost_contained
from ..config_manager import LabConfig
from ..core_residual import carleson_closure_check, decompose
from ..errors import LabValidationError, ResolutionLimitError, ThomsonLabError
from ..frostman import cap_audit, frostman_averaged
from ..hausdorff_content import content_bracket, dyadic_content
from ..herglotz_poisson import build_gk, herglotz_eval, herglotz_quadrature
from ..khrushchev_construction import construct_fn
from ..measure_functions import ENTROPY, MeasureFunction, check_axioms, cross_check
from ..p2mu_lab.experiments import (
    full_circle_experiment,
    logarithmic_energy,
    splitting_experiment,
)
from ..p2mu_lab.gram import MuSpec, distance, distance_to_polynomials, gram_system
from ..p2mu_lab.identities import bergman_identity_check, dirichlet_bilinear_check
from ..p2mu_lab.moments import embedding_audit, indicator_density
from ..p2mu_lab.oracle import quadrature_distance, quadrature_gram
from .config import CheckConfig, VerificationConfig
from .corpus import VerificationCorpus

logger = logging.getLogger(__name__)

FAULTS = ("frostman-cap",)
BENCHMARK = "benchmark"
ARC_TARGET = "arc_target"
RESIDUAL_TARGET = "residual_target"
FULL_CIRCLE = "full_circle"
HALF_CIRCLE = ArcUnion.from_intervals([(Fraction(0), Fraction(1, 2))])
# 總質量 2 > h(1) = 1，整圈區間必然違反上限
CORRUPTED_TOTAL = Fraction(2)
DIRICHLET_STOPS = [2**e for e in range(6, 15)]
EMBEDDING_EXPONENTS = (0.5, 1.0, 2.0, 5.0)
MONOTONE_SLACK = 1e-9
LEVEL_GENERATIONS = 4


@dataclass
class CheckResult:
    """單項檢查的結果"""

    category: str
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    witness: Optional[Any] = None
    error: Optional[str] = None
    incomplete: bool = False

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        if self.incomplete:
            return "incomplete"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "category": self.category,
            "name": self.name,
            "status": self.status,
            "passed": self.passed,
            "details": self.details,
        }
        if self.witness is not None:
            data["witness"] = self.witness
        if self.error is not None:
            data["error"] = self.error
        return data


@dataclass
class VerificationReport:
    """整個套件的報告"""

    seed: int
    results: List[CheckResult]
    settings: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "summary": {
                "total": len(self.results),
                "passed": sum(r.passed for r in self.results),
                "failed": [r.name for r in self.failures],
                "incomplete": [r.name for r in self.results if r.incomplete],
            },
            "settings": self.settings,
            "checks": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


Runner = Callable[[CheckConfig], CheckResult]


class VerificationSuite:
    """性質檢查的總執行器"""

    def __init__(
        self,
        lab_config: Optional[LabConfig] = None,
        config: Optional[VerificationConfig] = None,
        corpus: Optional[VerificationCorpus] = None,
        inject_fault: Optional[str] = None,
        progress: bool = False,
    ):
        """
        初始化驗證套件

        Args:
            lab_config: 實驗室配置
            config: 檢查清單，默認全部啟用
            corpus: 語料，默認依 [verify] 的種子與大小建立
            inject_fault: 故意破壞的檢查（目前只有 frostman-cap）
            progress: 顯示進度條
        """
        if inject_fault is not None and inject_fault not in FAULTS:
            raise LabValidationError(f"未知的故障注入: {inject_fault}（可用 {', '.join(FAULTS)}）")
        self.lab_config = lab_config or LabConfig()
        self.config = config or VerificationConfig()
        self.settings = self.lab_config.get_verify_config()
        self.corpus = corpus or VerificationCorpus(
            seed=self.settings["seed"], size=self.settings["corpus_size"]
        )
        self.inject_fault = inject_fault
        self.progress = progress
        self.check_runners: Dict[str, Runner] = {}
        self._initialize_checks()

    def _initialize_checks(self) -> None:
        """初始化檢查執行器"""
        self.check_runners = {
            "content_sandwich": self._check_content_sandwich,
            "content_lower_bounds": self._check_content_lower_bounds,
            "gauge_axioms": self._check_gauge_axioms,
            "carleson_closure": self._check_carleson_closure,
            "decomposition": self._check_decomposition,
            "frostman_postconditions": self._check_frostman,
            "fn_suite": self._check_fn_suite,
            "fn_level_bound": self._check_fn_level_bound,
            "herglotz_quadrature": self._check_herglotz,
            "gk_suite": self._check_gk_suite,
            "bergman_identity": self._check_bergman,
            "closed_form_distance": self._check_closed_form_distance,
            "gram_quadrature": self._check_gram_quadrature,
            "embedding_audit": self._check_embedding,
            "splitting_dichotomy": self._check_splitting,
            "dirichlet_growth": self._check_dirichlet,
        }

    # ------------------------------------------------------------------
    # 執行
    # ------------------------------------------------------------------

    def _category_of(self, check: CheckConfig) -> str:
        for name, category in self.config.categories.items():
            if check.name in category.checks:
                return name
        return ""

    def run_check(self, check: CheckConfig) -> CheckResult:
        """執行單項檢查；庫內錯誤記為 error"""
        category = self._category_of(check)
        runner = self.check_runners.get(check.name)
        if runner is None:
            return CheckResult(category, check.name, False, error="沒有對應的執行器")
        try:
            result = runner(check)
        except ThomsonLabError as e:
            logger.error(f"檢查 {check.name} 出錯: {e}")
            return CheckResult(
                category, check.name, False, details=e.details, error=f"{type(e).__name__}: {e}"
            )
        result.category = category
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"檢查 {check.name}: {result.status}")
        return result

    def run(self, include_slow: bool = True) -> VerificationReport:
        """
        執行所有啟用的檢查

        Args:
            include_slow: 是否包含耗時的檢查

        Returns:
            VerificationReport（順序與配置一致）
        """
        checks = self.config.enabled_checks(include_slow)
        workers = max(1, self.settings["workers"])
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                tqdm(
                    pool.map(self.run_check, checks),
                    total=len(checks),
                    desc="verify",
                    disable=not self.progress,
                )
            )
        settings = {
            "corpus_size": self.corpus.size,
            "include_slow": include_slow,
            "inject_fault": self.inject_fault,
            "gk_gauge": self.settings["gk_gauge"],
        }
        report = VerificationReport(seed=self.corpus.seed, results=results, settings=settings)
        logger.info(f"驗證完成: {len(results) - len(report.failures)}/{len(results)} 通過")
        return report

    def _construction_options(self) -> Dict[str, Any]:
        settings = self.lab_config.get_construction_config()
        return {
            "relative_depth": settings["relative_depth"],
            "cantor_extra_depth": settings["cantor_extra_depth"],
            "epsilon": Fraction(str(settings["epsilon"])),
            "audit_max_breakpoints": settings["audit_max_breakpoints"],
        }

    def _gk_gauge(self) -> MeasureFunction:
        return MeasureFunction.parse(self.settings["gk_gauge"])

    def _gauges(self) -> List[MeasureFunction]:
        """entropy 與 [verify] gk_gauge，去重"""
        gk = self._gk_gauge()
        return [ENTROPY] if gk.to_label() == ENTROPY.to_label() else [ENTROPY, gk]

    # ------------------------------------------------------------------
    # 內容與規範函數
    # ------------------------------------------------------------------

    def _check_content_sandwich(self, check: CheckConfig) -> CheckResult:
        h = ENTROPY
        witness = None
        cases = self.corpus.dyadic_unions()
        for U, depth in cases:
            dyadic = dyadic_content(U, h, depth)
            derived = content_bracket(U, h, depth, variant="M_h")
            ok = (
                dyadic.is_exact
                and derived.sandwich_lower is not None
                and 2 * derived.sandwich_lower == dyadic.lower
                and derived.upper == dyadic.upper
                and derived.lower >= dyadic.lower / 2
            )
            if not ok:
                witness = {"set": U.to_list(), "depth": depth, "M_hd": dyadic.to_dict()}
                break
        return CheckResult("", check.name, witness is None, {"cases": len(cases)}, witness)

    def _check_content_lower_bounds(self, check: CheckConfig) -> CheckResult:
        h = ENTROPY
        worst = math.inf
        witness = None
        cases = self.corpus.dyadic_unions()
        for U, depth in cases:
            floor = float(h.values(float(U.measure)))
            for variant in ("M0_hd", "M0_h"):
                slack = content_bracket(U, h, depth, variant=variant).lower - floor
                if slack < worst:
                    worst = slack
                    if slack < -check.tolerance:
                        witness = {"set": U.to_list(), "variant": variant, "slack": slack}
        return CheckResult(
            "", check.name, witness is None, {"cases": len(cases), "worst_slack": worst}, witness
        )

    def _check_gauge_axioms(self, check: CheckConfig) -> CheckResult:
        points = np.linspace(1e-6, 1.0, 64)
        details = {}
        passed = True
        for h in self._gauges():
            axioms = check_axioms(h, 200)
            error = cross_check(h, points)
            details[h.to_label()] = {"axioms": axioms.passed, "cross_check": error}
            passed = passed and axioms.passed and error <= check.tolerance
        return CheckResult("", check.name, passed, details)

    # ------------------------------------------------------------------
    # Carleson 集與分解
    # ------------------------------------------------------------------

    def _check_carleson_closure(self, check: CheckConfig) -> CheckResult:
        witness = None
        pairs = self.corpus.carleson_pairs()
        for A, B in pairs:
            report = carleson_closure_check(A, B, ENTROPY)
            if not report.passed:
                witness = {"a": A.to_spec_dict(), "b": B.to_spec_dict(), "report": report.to_dict()}
                break
        return CheckResult("", check.name, witness is None, {"pairs": len(pairs)}, witness)

    def _check_decomposition(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        details = {}
        passed = True
        for h in self._gauges():
            result = decompose(E, h)
            ok = (
                result.additivity_holds(E)
                and almost_contained(result.core, E)
                and almost_contained(result.residual, E)
                and not result.residual.is_empty
            )
            details[h.to_label()] = {
                "core": result.measure_core.to_dict(),
                "residual": result.measure_residual.to_dict(),
                "passed": ok,
            }
            passed = passed and ok
        return CheckResult("", check.name, passed, details)

    # ------------------------------------------------------------------
    # Frostman
    # ------------------------------------------------------------------

    def _check_frostman(self, check: CheckConfig) -> CheckResult:
        h = ENTROPY
        witness = None
        worst_excess = -math.inf
        worst_ratio = math.inf
        cases = self.corpus.open_sets()
        for index, (U, depth) in enumerate(cases):
            result = frostman_averaged(U, h, depth)
            cap = result.cap
            if index == 0 and self.inject_fault == "frostman-cap" and result.density.total > 0:
                cap = cap_audit(result.density.scale(CORRUPTED_TOTAL / result.density.total), h)
            worst_excess = max(worst_excess, cap.worst_excess)
            worst_ratio = min(worst_ratio, result.achieved_ratio)
            if witness is None and not (cap.passed and result.mass_ok):
                witness = {
                    "set": U.to_list(),
                    "depth": depth,
                    "interval": list(cap.witness) if cap.witness else None,
                    "worst_excess": cap.worst_excess,
                    "mass_ok": result.mass_ok,
                }
        details = {
            "cases": len(cases),
            "worst_excess": worst_excess,
            "min_ratio": worst_ratio,
            "inject_fault": self.inject_fault,
        }
        return CheckResult("", check.name, witness is None, details, witness)

    # ------------------------------------------------------------------
    # f_n、Herglotz、g_k
    # ------------------------------------------------------------------

    def _check_fn_suite(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        h = ENTROPY
        decomposition = decompose(E, h)
        rows = []
        passed = True
        for n in range(1, self.settings["fn_generations"] + 1):
            fn = construct_fn(
                E,
                h,
                n,
                decomposition=decomposition,
                strict=False,
                **self._construction_options(),
            )
            report = fn.report
            ok = fn.density.total == 0 and report.passed
            rows.append(
                {
                    "n": n,
                    "integral": str(fn.density.total),
                    "cap_worst_excess": report.cap.worst_excess,
                    "audit_mode": report.audit_mode,
                    "mass_ok": report.mass_ok,
                    "min_level": report.min_level,
                    "level_bound": report.level_bound,
                    "level_ok": report.level_ok,
                    "passed": ok,
                }
            )
            passed = passed and ok
        witness = next((r for r in rows if not r["passed"]), None)
        return CheckResult("", check.name, passed, {"gauge": h.to_label(), "generations": rows}, witness)

    def _check_fn_level_bound(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        rows = []
        for h in self._gauges():
            decomposition = decompose(E, h)
            for n in range(1, LEVEL_GENERATIONS + 1):
                fn = construct_fn(
                    E,
                    h,
                    n,
                    decomposition=decomposition,
                    strict=False,
                    **self._construction_options(),
                )
                rows.append(
                    {
                        "gauge": h.to_label(),
                        "n": n,
                        "min_level": fn.report.min_level,
                        "residual_sup": fn.sup_on_residual(),
                        "level_bound": fn.report.level_bound,
                        "mass_ok": fn.report.mass_ok,
                        "level_ok": fn.report.level_ok,
                    }
                )
        witness = next((r for r in rows if not (r["level_ok"] and r["mass_ok"])), None)
        return CheckResult("", check.name, witness is None, {"generations": rows}, witness)

    def _check_herglotz(self, check: CheckConfig) -> CheckResult:
        cases = self.corpus.herglotz_cases()
        worst = 0.0
        witness = None
        for d, z in tqdm(cases, desc="herglotz", disable=not self.progress):
            closed = herglotz_eval(d, z)
            reference = herglotz_quadrature(d, z)
            error = abs(closed - reference) / max(1.0, abs(reference))
            worst = max(worst, error)
            if witness is None and error > check.tolerance:
                witness = {"density": d.to_dict(), "z": [z.real, z.imag], "error": error}

        densities = {id(d): d for d, _ in cases}
        worst_origin = 0.0
        for d in densities.values():
            total = float(d.total)
            gap = abs(herglotz_eval(d, 0j) - total) / max(1.0, abs(total))
            worst_origin = max(worst_origin, gap)
        passed = witness is None and worst_origin <= 1e-14
        details = {"cases": len(cases), "worst_error": worst, "worst_origin_error": worst_origin}
        return CheckResult("", check.name, passed, details, witness)

    def _check_gk_suite(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        h = self._gk_gauge()
        herglotz = self.lab_config.get_herglotz_config()
        budget = self.lab_config.get_construction_config()["generation_budget"]
        rows_count, cols_count = herglotz["grid"]
        mu = MuSpec(0.0, E)
        decomposition = decompose(E, h)
        cache: Dict[int, Any] = {}

        rows = []
        limited = []
        for k in range(1, self.settings["gk_k_max"] + 1):
            try:
                gk = build_gk(
                    E,
                    h,
                    k,
                    generation_budget=budget,
                    cache=cache,
                    growth_radii=herglotz["growth_radii"],
                    growth_angles=herglotz["growth_angles"],
                    min_distance=herglotz["min_distance"],
                    decomposition=decomposition,
                    strict=False,
                    **self._construction_options(),
                )
            except ResolutionLimitError as e:
                limited.append(k)
                logger.info(f"k = {k} 超出代數預算: {e}")
                continue
            report = gk.check(rows_count, cols_count, herglotz["compact_radius"])
            norm = gk.norm_squared(mu)
            rows.append(
                {
                    "k": k,
                    "n_k": gk.n_k,
                    "growth_constant": gk.growth_constant,
                    "norm_squared": norm,
                    "passed": report.passed(k, check.tolerance) and math.isfinite(norm),
                    **report.to_dict(),
                }
            )

        deviations = [r["compact_deviation"] for r in rows]
        decreasing = all(b <= a + MONOTONE_SLACK for a, b in zip(deviations, deviations[1:]))
        complete = bool(rows) and not limited
        passed = complete and decreasing and all(r["passed"] for r in rows)
        details = {
            "gauge": h.to_label(),
            "generation_budget": budget,
            "k_max": self.settings["gk_k_max"],
            "built": rows,
            "resolution_limited": limited,
            "complete": complete,
            "deviation_nonincreasing": decreasing,
            "norm_sup": max((r["norm_squared"] for r in rows), default=0.0),
        }
        witness = next((r for r in rows if not r["passed"]), None)
        if witness is None and not decreasing:
            witness = {"compact_deviation": deviations}
        if witness is None and not complete:
            witness = {"resolution_limited": limited}
        if limited:
            logger.warning(f"g_k 只建到 k = {[r['k'] for r in rows]}，其餘超出代數預算 {budget}")
        return CheckResult(
            "", check.name, passed, details, witness, incomplete=not complete
        )

    # ------------------------------------------------------------------
    # P²(μ)
    # ------------------------------------------------------------------

    def _check_bergman(self, check: CheckConfig) -> CheckResult:
        vectors = self.corpus.coefficient_vectors()
        worst = 0.0
        witness = None
        for p in vectors:
            report = bergman_identity_check(p)
            worst = max(worst, report.relative_difference)
            if witness is None and not report.passed:
                witness = {"degree": int(p.size - 1), "report": report.to_dict()}
        return CheckResult(
            "", check.name, witness is None, {"cases": len(vectors), "worst_relative": worst}, witness
        )

    def _check_closed_form_distance(self, check: CheckConfig) -> CheckResult:
        half = StructuredSet.from_arcs(Arc(0, Fraction(1, 2)))
        result = distance(MuSpec(0.0, half), half, 0)
        error = abs(result.distance_squared - 1.0 / 3.0)

        full = StructuredSet.full()
        constant = distance_to_polynomials(
            gram_system(0, MuSpec(0.0, full), full, include_disk=True)
        )
        passed = error <= check.tolerance and constant.distance <= check.tolerance
        details = {
            "half_arc_d_squared": result.distance_squared,
            "error": error,
            "constant_target_distance": constant.distance,
        }
        return CheckResult("", check.name, passed, details)

    def _check_gram_quadrature(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        mu = MuSpec(0.0, E)
        depth = 8
        N = 8
        closed = gram_system(N, mu, E, depth).matrix
        reference = quadrature_gram(mu, N, depth)
        matrix_error = float(np.max(np.abs(closed - reference)))

        target = self.corpus.get(ARC_TARGET)
        by_gram = distance(mu, target, 10, depth).distance
        by_quadrature = quadrature_distance(mu, target, 10, depth)
        distance_error = abs(by_gram - by_quadrature)
        passed = matrix_error <= check.tolerance and distance_error <= check.tolerance
        details = {
            "matrix_error": matrix_error,
            "distance_gram": by_gram,
            "distance_quadrature": by_quadrature,
            "distance_error": distance_error,
        }
        return CheckResult("", check.name, passed, details)

    def _check_embedding(self, check: CheckConfig) -> CheckResult:
        audits = [embedding_audit(c2) for c2 in EMBEDDING_EXPONENTS]
        passed = all(a.passed and a.relative_difference <= check.tolerance for a in audits)
        return CheckResult("", check.name, passed, {"audits": [a.to_dict() for a in audits]})

    def _check_splitting(self, check: CheckConfig) -> CheckResult:
        E = self.corpus.get(BENCHMARK)
        p2mu = self.lab_config.get_p2mu_config()
        thresholds = self.lab_config.get_thresholds_config()
        mu = MuSpec(0.0, E)
        tables = {}
        for name in (RESIDUAL_TARGET, ARC_TARGET):
            tables[name] = splitting_experiment(
                mu,
                self.corpus.get(name),
                p2mu["default_degrees"],
                depth=p2mu["cantor_depth"],
                h=ENTROPY,
                thresholds=thresholds,
                condition_threshold=p2mu["condition_threshold"],
                refinement_steps=p2mu["refinement_steps"],
            )
        full = full_circle_experiment(
            HALF_CIRCLE,
            p2mu["default_degrees"],
            thresholds=thresholds,
            condition_threshold=p2mu["condition_threshold"],
            refinement_steps=p2mu["refinement_steps"],
        )
        passed = (
            all(t.consistent for t in tables.values()) and full.passed and full.table.consistent
        )
        details: Dict[str, Any] = {name: table.to_dict() for name, table in tables.items()}
        details[FULL_CIRCLE] = full.to_dict()
        witness = next(
            ({"target": name, "distances": t.distances} for name, t in tables.items() if not t.consistent),
            None,
        )
        if witness is None and not passed:
            witness = {
                "target": FULL_CIRCLE,
                "distances": full.table.distances,
                "exact": full.exact,
                "plateau": full.plateau,
            }
        return CheckResult("", check.name, passed, details, witness)

    def _check_dirichlet(self, check: CheckConfig) -> CheckResult:
        F = self.corpus.get(RESIDUAL_TARGET)
        depth = self.lab_config.get_p2mu_config()["cantor_depth"]
        threshold = self.lab_config.get_thresholds_config()["dirichlet_ratio"]
        f = indicator_density(F, depth)
        energy = logarithmic_energy(f, 0, DIRICHLET_STOPS, weight="n+1")

        rng = self.corpus.rng("dirichlet")
        p = rng.standard_normal(51) + 1j * rng.standard_normal(51)
        bilinear = dirichlet_bilinear_check(f, p, DIRICHLET_STOPS[-1])

        passed = energy.increasing and energy.growth_ratio > threshold and bilinear.passed
        details = {
            "energy": energy.to_dict(),
            "threshold": threshold,
            "bilinear": {k: v for k, v in bilinear.to_dict().items() if k != "partial_sums"},
        }
        witness = None if passed else {"sums": energy.sums}
        return CheckResult("", check.name, passed, details, witness)


def run_verify_suite(
    lab_config: Optional[LabConfig] = None,
    checks: Optional[List[str]] = None,
    include_slow: bool = True,
    inject_fault: Optional[str] = None,
    progress: bool = False,
) -> VerificationReport:
    """
    執行驗證套件

    Args:
        lab_config: 實驗室配置
        checks: 只執行這些檢查
        include_slow: 是否包含耗時的檢查
        inject_fault: 故障注入
        progress: 顯示進度條

    Returns:
        VerificationReport
    """
    config = VerificationConfig()
    if checks:
        config.select(checks)
    suite = VerificationSuite(lab_config, config, inject_fault=inject_fault, progress=progress)
    return suite.run(include_slow)
