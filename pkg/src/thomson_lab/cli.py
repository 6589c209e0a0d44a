#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
thomson-lab 命令行界面

子命令依構造流程排列：content、decompose、frostman、construct-fn、gk、distance，
另有 verify（性質檢查套件）、measure（集合測度）與 oracle（釘定實驗閾值）。
"""

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from .circle_sets import StructuredSet, format_rational, measure
from .config_manager import LabConfig, parse_degrees, setup_logging
from .core_residual import decompose
from .errors import LabValidationError, ThomsonLabError
from .frostman import frostman_averaged
from .hausdorff_content import content_bracket, normalize_variant
from .herglotz_poisson import build_gk
from .khrushchev_construction import construct_fn
from .measure_functions import MeasureFunction
from .p2mu_lab.experiments import splitting_experiment
from .p2mu_lab.gram import MuSpec
from .p2mu_lab.oracle import DEFAULT_SMALL_DEGREES, pin_thresholds
from .set_spec import describe, load_set_spec
from .verification.corpus import VerificationCorpus
from .verification.suite import FAULTS, run_verify_suite

logger = logging.getLogger(__name__)

VERIFY_FAILED_EXIT = 1
INTERRUPTED_EXIT = 130

DISTANCE_COLUMNS = ("N", "d", "cond")
GK_COLUMNS = ("z_re", "z_im", "re", "im", "abs")

EPILOG = """\
輸出格式:
  content / decompose / frostman / construct-fn / measure / verify / oracle 輸出 JSON
  （sort_keys，有理數寫成 "num/den"）。
  gk 輸出 CSV，欄位 z_re,z_im,re,im,abs（取樣點與 g_k 的實部、虛部、模）。
  distance 輸出 CSV，欄位 N,d,cond（次數、距離、Gram 條件數）。

結束碼:
  0 成功；1 verify 有檢查失敗；2 輸入驗證錯誤；3 數值錯誤；4 解析度限制；130 中斷。

環境變數:
  THOMSON_LAB_PRECISION=extended  以 mpmath 重算所有距離
"""


# ---------------------------------------------------------------------------
# 輸出
# ---------------------------------------------------------------------------


def to_json(data: Any) -> str:
    """固定鍵順序的 JSON，Fraction 寫成 "num/den" """
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default)


def _json_default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"無法序列化 {type(value).__name__}")


def to_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def emit(text: str, output: Optional[str]) -> None:
    """寫到 --output 指定的檔案，否則寫到標準輸出"""
    if not text.endswith("\n"):
        text += "\n"
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"結果已寫入 {path}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# 共用參數解析
# ---------------------------------------------------------------------------


def _gauge(args: argparse.Namespace, fallback: str = "entropy") -> MeasureFunction:
    return MeasureFunction.parse(args.gauge or fallback)


def _load(path: str) -> StructuredSet:
    return load_set_spec(path)


def _positive(value: int, name: str) -> int:
    if value < 1:
        raise LabValidationError(f"{name} 必須 ≥ 1: {value}")
    return value


def _grid(text: str) -> List[int]:
    try:
        rows, cols = (int(p) for p in text.lower().split("x"))
    except ValueError as e:
        raise LabValidationError(f"網格格式應為 ROWSxCOLS: {text}") from e
    return [_positive(rows, "rows"), _positive(cols, "cols")]


def _construction_options(config: LabConfig) -> Dict[str, Any]:
    settings = config.get_construction_config()
    return {
        "relative_depth": settings["relative_depth"],
        "cantor_extra_depth": settings["cantor_extra_depth"],
        "epsilon": Fraction(str(settings["epsilon"])),
        "audit_max_breakpoints": settings["audit_max_breakpoints"],
    }


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------


def cmd_content(args: argparse.Namespace, config: LabConfig) -> int:
    settings = config.get_content_config()
    S = _load(args.set)
    h = _gauge(args)
    depth = _positive(args.depth or settings["default_depth"], "depth")
    variant = normalize_variant(args.variant or settings["default_variant"])
    U, tail = S.realize(depth)
    bracket = content_bracket(U, h, depth, variant=variant)
    data = bracket.to_dict()
    if not S.is_plain:
        # 帶 Cantor 分量時計算的是外層實現，上界對 S 本身成立
        data["realized"] = True
        data["realization_tail"] = tail.to_dict()
    emit(to_json(data), args.output)
    return 0


def cmd_decompose(args: argparse.Namespace, config: LabConfig) -> int:
    result = decompose(_load(args.set), _gauge(args))
    emit(to_json(result.to_dict()), args.output)
    return 0


def cmd_frostman(args: argparse.Namespace, config: LabConfig) -> int:
    settings = config.get_frostman_config()
    S = _load(args.set)
    depth = _positive(args.depth or settings["default_depth"], "depth")
    U, _ = S.realize(depth)
    result = frostman_averaged(U, _gauge(args), depth, audit=not args.no_audit)
    emit(to_json(result.to_dict()), args.output)
    return 0


def cmd_construct_fn(args: argparse.Namespace, config: LabConfig) -> int:
    S = _load(args.set)
    n = _positive(args.n, "n")
    options = _construction_options(config)
    if args.depth is not None:
        if args.depth <= n:
            raise LabValidationError(f"depth 必須大於 n: depth={args.depth}, n={n}")
        options["relative_depth"] = args.depth - n
    fn = construct_fn(
        S,
        _gauge(args),
        n,
        workers=args.workers,
        strict=not args.lenient,
        progress=not args.quiet,
        **options,
    )
    emit(to_json(fn.to_dict()), args.output)
    return 0


def cmd_gk(args: argparse.Namespace, config: LabConfig) -> int:
    S = _load(args.set)
    h = _gauge(args, config.get_verify_config()["gk_gauge"])
    herglotz = config.get_herglotz_config()
    rows, cols = _grid(args.grid) if args.grid else herglotz["grid"]
    budget = config.get_construction_config()["generation_budget"]
    gk = build_gk(
        S,
        h,
        _positive(args.k, "k"),
        generation_budget=budget,
        growth_radii=herglotz["growth_radii"],
        growth_angles=herglotz["growth_angles"],
        min_distance=herglotz["min_distance"],
        workers=args.workers,
        strict=False,
        **_construction_options(config),
    )
    report = gk.check(rows, cols, herglotz["compact_radius"])
    logger.info(f"g_{gk.k}: n_k = {gk.n_k}，C = {gk.growth_constant:.6g}，{report.to_dict()}")
    samples = gk.samples(rows, cols, herglotz["compact_radius"])
    emit(to_csv(GK_COLUMNS, [[repr(v) for v in row] for row in samples]), args.output)
    return 0


def cmd_distance(args: argparse.Namespace, config: LabConfig) -> int:
    p2mu = config.get_p2mu_config()
    numerics = config.get_numerics_config()
    E = _load(args.set)
    F = _load(args.target)
    degrees = parse_degrees(args.degrees) if args.degrees else p2mu["default_degrees"]
    if degrees[-1] > p2mu["degree_cap"]:
        raise LabValidationError(f"次數 {degrees[-1]} 超過上限 {p2mu['degree_cap']}")
    depth = _positive(args.depth or p2mu["cantor_depth"], "depth")
    table = splitting_experiment(
        MuSpec(args.alpha, E),
        F,
        degrees,
        depth=depth,
        h=_gauge(args),
        thresholds=config.get_thresholds_config(),
        progress=not args.quiet,
        precision=numerics["precision"],
        condition_threshold=p2mu["condition_threshold"],
        refinement_steps=p2mu["refinement_steps"],
        dps=numerics["mp_dps"],
    )
    rows = [
        [row.degree, repr(d), repr(row.condition)]
        for row, d in zip(table.rows, table.distances)
    ]
    emit(to_csv(DISTANCE_COLUMNS, rows), args.output)
    return 0


def cmd_verify(args: argparse.Namespace, config: LabConfig) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()] if args.checks else None
    report = run_verify_suite(
        config,
        checks=checks,
        include_slow=not args.skip_slow,
        inject_fault=args.inject_fault,
        progress=not args.quiet,
    )
    emit(report.to_json(), args.output)
    if not report.passed:
        logger.warning(f"驗證失敗: {[r.name for r in report.failures]}")
        return VERIFY_FAILED_EXIT
    return 0


def cmd_measure(args: argparse.Namespace, config: LabConfig) -> int:
    S = _load(args.set)
    tolerance = Fraction(str(config.get_numerics_config()["measure_tolerance"]))
    value = measure(S, tolerance)
    data: Dict[str, Any] = {"components": describe(S)}
    if isinstance(value, Fraction):
        data["exact"] = format_rational(value)
        data["bracket"] = {"lower": format_rational(value), "upper": format_rational(value)}
    else:
        data["exact"] = None
        data["bracket"] = value.to_dict()
    emit(to_json(data), args.output)
    return 0


def cmd_oracle(args: argparse.Namespace, config: LabConfig) -> int:
    corpus = VerificationCorpus(corpus_file=args.corpus)
    E = corpus.get("benchmark")
    mu = MuSpec(args.alpha, E)
    degrees = parse_degrees(args.degrees) if args.degrees else list(DEFAULT_SMALL_DEGREES)
    depth = config.get_p2mu_config()["cantor_depth"]
    pinned = pin_thresholds(
        (mu, corpus.get("residual_target")),
        (mu, corpus.get("arc_target")),
        degrees,
        depth=depth,
        dps=config.get_numerics_config()["mp_dps"],
        config=config if args.write else None,
    )
    emit(to_json(pinned.to_dict()), args.output)
    return 0


# ---------------------------------------------------------------------------
# 參數解析器
# ---------------------------------------------------------------------------


def _add_set(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--set", "-s", required=True, help="集合描述 JSON 檔案")


def _add_gauge(parser: argparse.ArgumentParser, default_text: str = "entropy") -> None:
    parser.add_argument(
        "--gauge", "-g", default=None, help=f"規範函數 entropy 或 power:β (默認: {default_text})"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thomson-lab",
        description="圓周集合的 Hausdorff 內容、核心/殘餘分解與 P²(μ) 分裂實驗",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    # 全域選項
    parser.add_argument("--config", "-c", default=None, help="配置文件路徑 (默認: config/lab_config.ini)")
    parser.add_argument("--seed", type=int, default=None, help="驗證語料的隨機種子 (默認: 0)")
    parser.add_argument("--output", "-o", default=None, help="輸出文件路徑 (默認: 標準輸出)")
    parser.add_argument("--workers", "-w", type=int, default=None, help="執行緒數 (默認: 讀配置)")
    parser.add_argument("--verbose", "-v", action="store_true", help="詳細輸出（DEBUG 日誌）")
    parser.add_argument("--quiet", "-q", action="store_true", help="不顯示進度條")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("content", help="Hausdorff 內容的上下界")
    _add_set(p)
    _add_gauge(p)
    p.add_argument("--depth", "-d", type=int, default=None, help="最大二進代數 (默認: 讀配置)")
    p.add_argument("--variant", default=None, help="mhd | mh | m0hd | m0h (默認: 讀配置)")
    p.set_defaults(handler=cmd_content)

    p = sub.add_parser("decompose", help="核心/殘餘分解與 Carleson 證書")
    _add_set(p)
    _add_gauge(p)
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("frostman", help="平均化 Frostman 測度")
    _add_set(p)
    _add_gauge(p)
    p.add_argument("--depth", "-d", type=int, default=None, help="二進深度 (默認: 讀配置)")
    p.add_argument("--no-audit", action="store_true", help="跳過區間上限審核")
    p.set_defaults(handler=cmd_frostman)

    p = sub.add_parser("construct-fn", help="構造分段常數函數 f_n")
    _add_set(p)
    _add_gauge(p)
    p.add_argument("-n", type=int, required=True, help="代數 n")
    p.add_argument("--depth", "-d", type=int, default=None, help="掃描的絕對二進代數 (默認: n + relative_depth)")
    p.add_argument("--lenient", action="store_true", help="ν_I 質量下界失敗時只寫入報告")
    p.set_defaults(handler=cmd_construct_fn)

    p = sub.add_parser("gk", help="取樣 g_k = exp(H_{f_{n_k}}/k)")
    _add_set(p)
    _add_gauge(p, "讀配置 [verify] gk_gauge")
    p.add_argument("-k", type=int, required=True, help="正整數 k")
    p.add_argument("--grid", default=None, help="取樣網格 ROWSxCOLS (默認: 讀配置)")
    p.set_defaults(handler=cmd_gk)

    p = sub.add_parser("distance", help="d_N = dist(1_F, 次數 ≤ N 的多項式)")
    _add_set(p)
    _add_gauge(p)
    p.add_argument("--target", "-t", required=True, help="目標集合 F 的 JSON 檔案")
    p.add_argument("--alpha", "-a", type=float, default=0.0, help="面積權重指數 α > −1 (默認: 0)")
    p.add_argument("--degrees", default=None, help="次數列表，如 10:150:10 或 0,5,10 (默認: 讀配置)")
    p.add_argument("--depth", "-d", type=int, default=None, help="Cantor 實現代數 (默認: 讀配置)")
    p.set_defaults(handler=cmd_distance)

    p = sub.add_parser("verify", help="執行性質檢查套件")
    p.add_argument("--checks", default=None, help="只執行這些檢查（逗號分隔）")
    p.add_argument("--skip-slow", action="store_true", help="跳過耗時的檢查")
    p.add_argument("--inject-fault", choices=FAULTS, default=None, help="故意破壞一項檢查")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("measure", help="結構化集合的測度")
    _add_set(p)
    p.set_defaults(handler=cmd_measure)

    p = sub.add_parser("oracle", help="以任意精度外推釘定實驗閾值")
    p.add_argument("--corpus", default=None, help="固定集合 JSON (默認: config/verify_corpus.json)")
    p.add_argument("--alpha", "-a", type=float, default=0.0, help="面積權重指數 (默認: 0)")
    p.add_argument("--degrees", default=None, help="小次數列表 (默認: 10:40:5)")
    p.add_argument("--write", action="store_true", help="把閾值寫回配置文件，依據寫到同目錄的 pinned_thresholds.json")
    p.set_defaults(handler=cmd_oracle)

    return parser


def _apply_overrides(args: argparse.Namespace, config: LabConfig) -> None:
    if args.seed is not None:
        config.update_config("verify", "seed", args.seed)
    if args.workers is not None:
        config.update_config("verify", "workers", _positive(args.workers, "workers"))
    args.workers = config.get_verify_config()["workers"]


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    Args:
        argv: 參數列表，默認讀 sys.argv

    Returns:
        結束碼
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace, LabConfig], int] = args.handler

    try:
        config = LabConfig(args.config)
        setup_logging(config, verbose=args.verbose)
        _apply_overrides(args, config)
        return handler(args, config)
    except KeyboardInterrupt:
        print("\n處理被用戶中斷", file=sys.stderr)
        return INTERRUPTED_EXIT
    except ThomsonLabError as e:
        logger.debug(f"錯誤詳情: {e.to_dict()}")
        print(f"錯誤 ({type(e).__name__}): {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        # parse_degrees 與配置讀取的格式錯誤
        print(f"錯誤: {e}", file=sys.stderr)
        return LabValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
