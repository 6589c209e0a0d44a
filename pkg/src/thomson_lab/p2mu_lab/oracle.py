"""
蠻力參照與閾值釘定

quadrature_distance：在圓盤（Jacobi–Gauss 節點 × 均勻角度）與圓周（每段 Gauss–Legendre）
的密集取樣上做加權最小平方，不經過閉式 Gram 矩陣。
pin_thresholds：以任意精度 Gram 求解 N ≤ 40 的距離，外推到 N = 150，寫入 [thresholds]。
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from ..circle_sets import combine
from ..config_manager import LabConfig
from ..errors import LabValidationError
from .experiments import logarithmic_energy
from .gram import MuSpec, as_structured, distance_to_polynomials, gram_system
from .moments import CircleSet, area_moments, indicator_density, realize_circle_set, weighted_pieces

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CIRCLE_NODES = 8
DEFAULT_SMALL_DEGREES = (10, 15, 20, 25, 30, 35, 40)
TARGET_DEGREE = 150
PIN_MARGIN = 0.5
EVIDENCE_FILE = "pinned_thresholds.json"


def _disk_nodes(N: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """(1 − r)^α·2r dr 的 Gauss–Jacobi 節點與權重"""
    n = N + 2
    x, w = special.roots_jacobi(n, alpha, 1.0)
    r = 0.5 * (x + 1.0)
    weights = w / 2.0 ** (alpha + 1.0)
    theta = np.arange(2 * N + 3) / (2 * N + 3)
    points = (r[:, None] * np.exp(1j * TWO_PI * theta)[None, :]).ravel()
    point_weights = np.repeat(weights / theta.size, theta.size)
    return points, point_weights


def _circle_nodes(
    pieces: Sequence[Tuple[float, float, float]], N: int
) -> Tuple[np.ndarray, np.ndarray]:
    """每段（過長時再細分）取 Gauss–Legendre 節點"""
    x, w = np.polynomial.legendre.leggauss(CIRCLE_NODES)
    longest = 1.0 / (4.0 * (N + 1))
    thetas: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    for a, b, v in pieces:
        parts = max(1, math.ceil((b - a) / longest))
        edges = np.linspace(a, b, parts + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        thetas.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel() * v)
    if not thetas:
        return np.zeros(0, dtype=complex), np.zeros(0)
    theta = np.concatenate(thetas)
    return np.exp(1j * TWO_PI * theta), np.concatenate(weights)


def quadrature_distance(
    mu: MuSpec, F: CircleSet, N: int, depth: int = 12, include_disk: bool = False
) -> float:
    """
    加權最小平方的 dist(1_F, span{1, …, z^N})

    Args:
        mu: 測度描述
        F: 目標集合
        N: 多項式次數
        depth: Cantor 實現代數
        include_disk: 目標在圓盤上也取值 1

    Returns:
        距離
    """
    E_D, _ = mu.E.realize(depth)
    F_D, _ = realize_circle_set(as_structured(F), depth)
    F_E = combine("intersect", F_D, E_D)
    rest = combine("difference", E_D, F_E)

    disk_z, disk_w = _disk_nodes(N, mu.alpha)
    in_z, in_w = _circle_nodes(weighted_pieces(F_E, mu.circle_weight), N)
    out_z, out_w = _circle_nodes(weighted_pieces(rest, mu.circle_weight), N)

    z = np.concatenate([disk_z, in_z, out_z])
    w = np.concatenate([disk_w, in_w, out_w])
    target = np.concatenate(
        [
            np.full(disk_z.size, 1.0 if include_disk else 0.0),
            np.ones(in_z.size),
            np.zeros(out_z.size),
        ]
    )
    root = np.sqrt(w)
    A = root[:, None] * np.power(z[:, None], np.arange(N + 1)[None, :])
    b = root * target
    x, _, _, _ = np.linalg.lstsq(A, b.astype(complex), rcond=None)
    residual = A @ x - b
    return float(np.sqrt(np.real(np.vdot(residual, residual))))


def quadrature_gram(mu: MuSpec, N: int, depth: int = 12) -> np.ndarray:
    """以 scipy 自適應積分重算 Gram 矩陣（小規模交叉檢驗）"""
    E_D, _ = mu.E.realize(depth)
    pieces = weighted_pieces(E_D, mu.circle_weight)
    w_hat = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        total = 0j
        for a, b, v in pieces:
            re, _ = integrate.quad(lambda t: math.cos(TWO_PI * m * t), a, b, epsabs=1e-14)
            im, _ = integrate.quad(lambda t: -math.sin(TWO_PI * m * t), a, b, epsabs=1e-14)
            total += v * complex(re, im)
        w_hat[m] = total
    G = np.diag(area_moments(N, mu.alpha)).astype(complex)
    for j in range(N + 1):
        for k in range(N + 1):
            G[j, k] += w_hat[j - k] if j >= k else np.conj(w_hat[k - j])
    return G


def _log_slope(Ns: Sequence[int], ds: Sequence[float]) -> float:
    """log d 對 log(N + 1) 的最小平方斜率"""
    x = np.log(np.asarray(Ns, dtype=float) + 1.0)
    y = np.log(np.maximum(np.asarray(ds, dtype=float), 1e-300))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass
class PinnedThresholds:
    """釘定的閾值與其依據"""

    residual_ratio: float
    arc_floor: float
    dirichlet_ratio: float
    evidence: Dict[str, Any] = field(default_factory=dict)

    def as_config(self) -> Dict[str, float]:
        return {
            "residual_ratio": self.residual_ratio,
            "arc_floor": self.arc_floor,
            "dirichlet_ratio": self.dirichlet_ratio,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {**self.as_config(), "evidence": self.evidence}

    def save(self, path: str) -> None:
        """寫出閾值與依據 JSON"""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        logger.info(f"閾值依據已寫入 {target}")

    @classmethod
    def load(cls, path: str) -> "PinnedThresholds":
        """讀回 save 寫出的 JSON"""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(
                residual_ratio=float(data["residual_ratio"]),
                arc_floor=float(data["arc_floor"]),
                dirichlet_ratio=float(data["dirichlet_ratio"]),
                evidence=dict(data.get("evidence", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LabValidationError(f"閾值依據格式錯誤: {path}: {exc}") from exc


def evidence_path(config: LabConfig) -> str:
    """配置文件旁的閾值依據路徑"""
    return str(Path(config.config_file).with_name(EVIDENCE_FILE))


def _extended_distances(
    mu: MuSpec, F: CircleSet, Ns: Sequence[int], depth: int, dps: int
) -> List[float]:
    system = gram_system(Ns[-1], mu, F, depth)
    distances = []
    for N in Ns:
        result = distance_to_polynomials(
            system.leading(N), precision="extended", alpha=mu.alpha, dps=dps
        )
        distances.append(result.extended_distance or result.distance)
    return distances


def pin_thresholds(
    residual_case: Tuple[MuSpec, CircleSet],
    arc_case: Tuple[MuSpec, CircleSet],
    Ns: Sequence[int] = DEFAULT_SMALL_DEGREES,
    depth: int = 12,
    dps: int = 50,
    target_degree: int = TARGET_DEGREE,
    config: Optional[LabConfig] = None,
    cross_check_degree: int = 10,
) -> PinnedThresholds:
    """
    由小次數的任意精度距離外推，釘定分裂實驗的閾值

    殘餘目標：擬合 d_N ≈ C·(N + 1)^s，外推比值 d_target/d_first，閾值取
    外推比值與 1 之間的中點。弧目標：外推 d_target 的一半作為下界。
    Dirichlet：殘餘目標指示函數在 M = 2⁶..2¹⁴ 的增長比，閾值取 1 與其中點。

    Args:
        residual_case: (μ, F)，F 在殘餘部分內
        arc_case: (μ, F)，F 為弧
        Ns: 小次數列表（嚴格遞增）
        depth: Cantor 實現代數
        dps: mpmath 位數
        target_degree: 外推的次數
        config: 給出時寫入 [thresholds] 並存檔，依據寫到配置文件旁的 JSON
        cross_check_degree: 以密集求積交叉檢驗的次數

    Returns:
        PinnedThresholds
    """
    Ns = list(Ns)
    if len(Ns) < 2 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise LabValidationError(f"次數列表必須嚴格遞增且至少兩項: {Ns}")

    residual = _extended_distances(*residual_case, Ns, depth, dps)
    arc = _extended_distances(*arc_case, Ns, depth, dps)
    slope_residual = min(0.0, _log_slope(Ns, residual))
    slope_arc = min(0.0, _log_slope(Ns, arc))

    predicted_ratio = ((target_degree + 1.0) / (Ns[0] + 1.0)) ** slope_residual
    residual_ratio = min(0.999, predicted_ratio + PIN_MARGIN * (1.0 - predicted_ratio))
    predicted_arc = arc[-1] * ((target_degree + 1.0) / (Ns[-1] + 1.0)) ** slope_arc
    arc_floor = PIN_MARGIN * predicted_arc

    _, F_res = residual_case
    energy = logarithmic_energy(
        indicator_density(F_res, depth), 0, [2**e for e in range(6, 15)], weight="n+1"
    )
    dirichlet_ratio = 1.0 + PIN_MARGIN * (energy.growth_ratio - 1.0)

    checks = {}
    for name, (mu, F) in (("residual", residual_case), ("arc", arc_case)):
        quad = quadrature_distance(mu, F, cross_check_degree, depth)
        closed = distance_to_polynomials(
            gram_system(cross_check_degree, mu, F, depth), alpha=mu.alpha
        ).distance
        checks[name] = {"quadrature": quad, "gram": closed, "difference": abs(quad - closed)}

    pinned = PinnedThresholds(
        residual_ratio=residual_ratio,
        arc_floor=arc_floor,
        dirichlet_ratio=dirichlet_ratio,
        evidence={
            "degrees": Ns,
            "target_degree": target_degree,
            "depth": depth,
            "dps": dps,
            "pin_margin": PIN_MARGIN,
            "residual_distances": residual,
            "arc_distances": arc,
            "residual_slope": slope_residual,
            "arc_slope": slope_arc,
            "predicted_ratio": predicted_ratio,
            "predicted_arc_distance": predicted_arc,
            "dirichlet_growth": energy.growth_ratio,
            "cross_checks": checks,
        },
    )
    logger.info(f"釘定閾值: {pinned.as_config()}")
    if config is not None:
        for key, value in pinned.as_config().items():
            config.update_config("thresholds", key, repr(float(value)))
        config.save_config()
        pinned.save(evidence_path(config))
    return pinned
