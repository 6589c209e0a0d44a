"""
JSON 集合描述的讀寫

格式：
    {"plain": [[start, length], ...],
     "cantor": [{"host": [start, length],
                 "rule": {"kind": "geometric", "a": ..., "q": ...}
                       | {"kind": "harmonic", "a": ..., "p": ...},
                 "depth": d,
                 "clip": [start, length]}]}
有理數可寫成十進位字串、"p/q" 字串或 [num, den]。
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from .circle_sets import Arc, CantorComponent, StructuredSet, canonicalize, rule_from_dict
from .errors import LabValidationError

logger = logging.getLogger(__name__)

PLAIN_KEY = "plain"
CANTOR_KEY = "cantor"
DEFAULT_CANTOR_DEPTH = 12


def _arc(value: Any, where: str) -> Arc:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise LabValidationError(f"{where} 必須是 [start, length]: {value!r}")
    start, length = value
    return Arc(start, length)


def _cantor(entry: Any, index: int) -> CantorComponent:
    where = f"cantor[{index}]"
    if not isinstance(entry, dict):
        raise LabValidationError(f"{where} 必須是物件: {entry!r}")
    unknown = set(entry) - {"host", "rule", "depth", "clip"}
    if unknown:
        raise LabValidationError(f"{where} 含未知欄位: {sorted(unknown)}")
    if "host" not in entry or "rule" not in entry:
        raise LabValidationError(f"{where} 缺少 host 或 rule")
    if not isinstance(entry["rule"], dict):
        raise LabValidationError(f"{where}.rule 必須是物件")
    depth = entry.get("depth", DEFAULT_CANTOR_DEPTH)
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
        raise LabValidationError(f"{where}.depth 必須是非負整數: {depth!r}")
    clip = entry.get("clip")
    return CantorComponent(
        host=_arc(entry["host"], f"{where}.host"),
        rule=rule_from_dict(entry["rule"]),
        max_depth_hint=depth,
        clip=None if clip is None else _arc(clip, f"{where}.clip"),
    )


def set_from_dict(data: Any) -> StructuredSet:
    """
    由已解析的 JSON 物件建立 StructuredSet

    Args:
        data: 含 plain、cantor 欄位的字典

    Returns:
        通過 circle_sets 全部檢查的 StructuredSet
    """
    if not isinstance(data, dict):
        raise LabValidationError(f"集合描述必須是 JSON 物件: {type(data).__name__}")
    unknown = set(data) - {PLAIN_KEY, CANTOR_KEY}
    if unknown:
        raise LabValidationError(f"集合描述含未知欄位: {sorted(unknown)}")
    plain = data.get(PLAIN_KEY, [])
    cantor = data.get(CANTOR_KEY, [])
    if not isinstance(plain, list) or not isinstance(cantor, list):
        raise LabValidationError("plain 與 cantor 必須是列表")

    arcs = [_arc(item, f"plain[{i}]") for i, item in enumerate(plain)]
    parts = [_cantor(entry, i) for i, entry in enumerate(cantor)]
    S = StructuredSet(canonicalize(arcs), tuple(parts))
    logger.debug(f"讀入集合: {len(arcs)} 段弧，{len(parts)} 個 Cantor 分量")
    return S


def parse_set_spec(json_text: str) -> StructuredSet:
    """
    解析 JSON 集合描述

    Args:
        json_text: JSON 文字

    Returns:
        StructuredSet
    """
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as e:
        raise LabValidationError(f"集合描述不是合法 JSON: {e}") from e
    return set_from_dict(data)


def load_set_spec(path: Union[str, Path]) -> StructuredSet:
    """從檔案讀入集合描述"""
    path = Path(path)
    if not path.exists():
        raise LabValidationError(f"集合描述檔案不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_set_spec(f.read())


def dump_set_spec(S: StructuredSet) -> str:
    """StructuredSet 的 JSON 描述（可由 parse_set_spec 讀回）"""
    return json.dumps(S.to_spec_dict(), sort_keys=True)


def load_named_sets(path: Union[str, Path]) -> Dict[str, StructuredSet]:
    """
    讀入 {名稱: 集合描述} 形式的集合庫

    Args:
        path: JSON 檔案路徑

    Returns:
        名稱到 StructuredSet 的字典（保持檔案順序）
    """
    path = Path(path)
    if not path.exists():
        raise LabValidationError(f"集合庫檔案不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise LabValidationError(f"集合庫不是合法 JSON: {e}") from e
    if not isinstance(data, dict):
        raise LabValidationError("集合庫必須是 JSON 物件")
    return {name: set_from_dict(spec) for name, spec in data.items()}


def describe(S: StructuredSet) -> List[str]:
    """人類可讀的分量清單"""
    lines = [f"arc {arc.to_list()}" for arc in S.plain.arcs]
    lines.extend(f"cantor {c.rule.label} on {c.host.to_list()}" for c in S.cantor_parts)
    return lines
