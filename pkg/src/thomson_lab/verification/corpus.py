"""
驗證套件的種子語料

所有隨機性都經過 numpy.random.Generator；同一種子給出同一語料。
"""
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..circle_sets import (
    Arc,
    ArcUnion,
    CantorComponent,
    GeometricRule,
    StructuredSet,
    canonicalize,
    combine,
)
from ..frostman import StepDensity
from ..set_spec import load_named_sets

logger = logging.getLogger(__name__)

DEFAULT_CORPUS_FILE = Path(__file__).resolve().parents[3] / "config" / "verify_corpus.json"

GEOMETRIC_RATIOS = (Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(1, 8))


def random_dyadic_union(
    rng: np.random.Generator, depth: int, max_arcs: int = 6
) -> ArcUnion:
    """
    端點為 depth 代二進有理數的隨機弧聯集（非空）

    Args:
        rng: 隨機數產生器
        depth: 端點的二進代數
        max_arcs: 端點對數上限

    Returns:
        ArcUnion
    """
    scale = 2**depth
    count = int(rng.integers(1, max_arcs + 1))
    ends = np.sort(rng.choice(scale + 1, size=2 * count, replace=False))
    intervals = [
        (Fraction(int(a), scale), Fraction(int(b), scale))
        for a, b in zip(ends[0::2], ends[1::2])
    ]
    return ArcUnion.from_intervals(intervals)


def random_geometric_component(
    rng: np.random.Generator, host: Arc, depth_hint: int = 12
) -> CantorComponent:
    """宿主上的隨機 geometric Cantor 分量，移除總量為宿主長度的 1/4 到 3/4"""
    q = GEOMETRIC_RATIOS[int(rng.integers(len(GEOMETRIC_RATIOS)))]
    share = Fraction(int(rng.integers(1, 4)), 4)
    # 總移除量 a·q/(1 − 2q) = share·|host|
    a = share * host.length * (1 - 2 * q) / q
    return CantorComponent(host, GeometricRule(a, q), max_depth_hint=depth_hint)


def random_carleson_pair(
    rng: np.random.Generator, depth: int = 8
) -> Tuple[StructuredSet, StructuredSet]:
    """
    一對 entropy 規範下的 h-Carleson 集

    A 的 Cantor 宿主為 [1/2, 3/4)，B 的為 [3/4, 1)；各自的弧避開自己的宿主，
    可以覆蓋對方宿主的一部分。
    """
    sets = []
    for host in (Arc(Fraction(1, 2), Fraction(1, 4)), Arc(Fraction(3, 4), Fraction(1, 4))):
        arcs = combine("difference", random_dyadic_union(rng, depth), canonicalize([host]))
        parts: Tuple[CantorComponent, ...] = ()
        if rng.random() < 0.75:
            parts = (random_geometric_component(rng, host),)
        sets.append(StructuredSet(arcs, parts))
    return sets[0], sets[1]


def random_step_density(
    rng: np.random.Generator, pieces: int = 8, depth: int = 10, signed: bool = True
) -> StepDensity:
    """隨機分段常數密度，斷點為二進有理數，值為小分母有理數"""
    union = random_dyadic_union(rng, depth, max_arcs=pieces)
    low = -8 if signed else 0
    values = [Fraction(int(v), 4) for v in rng.integers(low, 9, size=len(union.intervals))]
    return StepDensity.from_pieces(
        (a, b, v) for (a, b), v in zip(union.intervals, values)
    )


def random_disk_points(
    rng: np.random.Generator, count: int, max_radius: float = 0.9
) -> np.ndarray:
    """|z| ≤ max_radius 內的隨機點"""
    r = max_radius * np.sqrt(rng.random(count))
    theta = rng.random(count)
    return r * np.exp(2j * np.pi * theta)


def random_coefficients(
    rng: np.random.Generator, max_degree: int = 50
) -> np.ndarray:
    """次數不超過 max_degree 的隨機複係數"""
    degree = int(rng.integers(0, max_degree + 1))
    return rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)


class VerificationCorpus:
    """套件使用的固定集合與種子隨機語料"""

    def __init__(self, seed: int = 0, size: int = 100, corpus_file: Optional[str] = None):
        """
        初始化語料

        Args:
            seed: 隨機種子
            size: 每類隨機樣本的數目
            corpus_file: 固定集合的 JSON 檔，默認 config/verify_corpus.json
        """
        self.seed = seed
        self.size = size
        self.corpus_file = Path(corpus_file) if corpus_file else DEFAULT_CORPUS_FILE
        self._named: Optional[Dict[str, StructuredSet]] = None

    def rng(self, stream: str) -> np.random.Generator:
        """每個檢查一條獨立的隨機流，互不影響"""
        offset = sum(stream.encode("utf-8"))
        return np.random.default_rng([self.seed, offset])

    @property
    def named(self) -> Dict[str, StructuredSet]:
        if self._named is None:
            self._named = load_named_sets(self.corpus_file)
            logger.debug(f"載入固定集合: {sorted(self._named)}")
        return self._named

    def get(self, name: str) -> StructuredSet:
        return self.named[name]

    def dyadic_unions(self, depth_range: Tuple[int, int] = (4, 10)) -> List[Tuple[ArcUnion, int]]:
        """(弧聯集, 端點代數) 列表"""
        rng = self.rng("dyadic_unions")
        out = []
        for _ in range(self.size):
            depth = int(rng.integers(depth_range[0], depth_range[1] + 1))
            out.append((random_dyadic_union(rng, depth), depth))
        return out

    def open_sets(self) -> List[Tuple[ArcUnion, int]]:
        """Frostman 檢查用的開集，深度 8–12"""
        rng = self.rng("open_sets")
        out = []
        for _ in range(self.size):
            depth = int(rng.integers(8, 13))
            out.append((random_dyadic_union(rng, depth - 2), depth))
        return out

    def carleson_pairs(self) -> List[Tuple[StructuredSet, StructuredSet]]:
        rng = self.rng("carleson_pairs")
        return [random_carleson_pair(rng) for _ in range(self.size)]

    def herglotz_cases(self, count: int = 1000) -> List[Tuple[StepDensity, complex]]:
        rng = self.rng("herglotz_cases")
        densities = [random_step_density(rng) for _ in range(max(1, count // 10))]
        points = random_disk_points(rng, count)
        return [(densities[i % len(densities)], complex(z)) for i, z in enumerate(points)]

    def coefficient_vectors(self) -> List[np.ndarray]:
        rng = self.rng("coefficient_vectors")
        return [random_coefficients(rng) for _ in range(self.size)]
