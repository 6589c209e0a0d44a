"""
驗證套件配置模組

定義各項檢查及其分類、容差與開關
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..errors import LabValidationError


@dataclass
class CheckConfig:
    """單項檢查的配置"""

    name: str
    enabled: bool = True
    tolerance: float = 1e-12
    description: str = ""
    slow: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "enabled": self.enabled,
            "tolerance": self.tolerance,
            "description": self.description,
            "slow": self.slow,
        }


@dataclass
class CheckCategory:
    """檢查類別配置"""

    name: str
    checks: Dict[str, CheckConfig] = field(default_factory=dict)
    enabled: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "enabled": self.enabled,
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
        }

    def add_check(self, check: CheckConfig) -> None:
        self.checks[check.name] = check


class VerificationConfig:
    """驗證套件配置"""

    def __init__(self) -> None:
        self.categories: Dict[str, CheckCategory] = {}
        self._initialize_default_config()

    def _initialize_default_config(self) -> None:
        """初始化默認配置"""
        # 1. 內容
        content = CheckCategory("content")
        content.add_check(CheckConfig(
            name="content_sandwich",
            description="M_{h,d} 與 M_h 區間的 2 倍關係",
        ))
        content.add_check(CheckConfig(
            name="content_lower_bounds",
            description="M⁰ 變體 ≥ h(|U|)",
        ))
        content.add_check(CheckConfig(
            name="gauge_axioms",
            description="規範函數公理與任意精度交叉檢驗",
        ))
        self.add_category(content)

        # 2. Carleson 集與分解
        carleson = CheckCategory("carleson")
        carleson.add_check(CheckConfig(
            name="carleson_closure",
            description="h-Carleson 集的聯集與交集證書",
        ))
        carleson.add_check(CheckConfig(
            name="decomposition",
            description="核心/殘餘分解與測度相加",
        ))
        self.add_category(carleson)

        # 3. Frostman 測度
        frostman = CheckCategory("frostman")
        frostman.add_check(CheckConfig(
            name="frostman_postconditions",
            description="區間上限審核與總質量下界",
        ))
        self.add_category(frostman)

        # 4. 構造
        construction = CheckCategory("construction")
        construction.add_check(CheckConfig(
            name="fn_suite",
            description="f_n 的積分為零、區間上限與質量下界",
            slow=True,
        ))
        construction.add_check(CheckConfig(
            name="fn_level_bound",
            description="殘餘上的負值水平 ≥ h(|I|)/(48|I|)（entropy 與 gk_gauge）",
        ))
        construction.add_check(CheckConfig(
            name="herglotz_quadrature",
            tolerance=1e-10,
            description="Herglotz 閉式與自適應積分",
        ))
        construction.add_check(CheckConfig(
            name="gk_suite",
            description="g_k(0) = 1、邊界模與緊集收斂",
            slow=True,
        ))
        self.add_category(construction)

        # 5. P²(μ)
        p2mu = CheckCategory("p2mu")
        p2mu.add_check(CheckConfig(
            name="bergman_identity",
            description="Σ|p_n|²·面積矩 = Σ|p_n|²/(n+1)",
        ))
        p2mu.add_check(CheckConfig(
            name="closed_form_distance",
            description="N = 0、E = F = [0,1/2) 時 d² = 1/3",
        ))
        p2mu.add_check(CheckConfig(
            name="gram_quadrature",
            tolerance=1e-8,
            description="閉式 Gram 矩陣與自適應積分",
        ))
        p2mu.add_check(CheckConfig(
            name="embedding_audit",
            tolerance=1e-9,
            description="∫(1 − |z|)^{c₂} dA 的閉式",
        ))
        p2mu.add_check(CheckConfig(
            name="splitting_dichotomy",
            description="殘餘目標距離衰減、弧目標有正下界；整個圓周上遞減到閉式 d_∞",
            slow=True,
        ))
        p2mu.add_check(CheckConfig(
            name="dirichlet_growth",
            description="殘餘指示函數的 Dirichlet 部分和持續增長",
        ))
        self.add_category(p2mu)

    def add_category(self, category: CheckCategory) -> None:
        """添加檢查類別"""
        self.categories[category.name] = category

    def get_check(self, category_name: str, check_name: str) -> Optional[CheckConfig]:
        """獲取指定檢查配置"""
        if category_name in self.categories:
            return self.categories[category_name].checks.get(check_name)
        return None

    def enabled_checks(self, include_slow: bool = True) -> List[CheckConfig]:
        """按類別順序列出啟用的檢查"""
        return [
            check
            for category in self.categories.values()
            if category.enabled
            for check in category.checks.values()
            if check.enabled and (include_slow or not check.slow)
        ]

    def select(self, names: List[str]) -> None:
        """只保留指定名稱的檢查"""
        known = {c for cat in self.categories.values() for c in cat.checks}
        unknown = set(names) - known
        if unknown:
            raise LabValidationError(f"未知的檢查: {sorted(unknown)}")
        for category in self.categories.values():
            for check in category.checks.values():
                check.enabled = check.name in names

    def to_dict(self) -> Dict[str, Any]:
        """轉換為字典格式"""
        return {
            "categories": {
                name: category.to_dict() for name, category in self.categories.items()
            }
        }

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "VerificationConfig":
        """從字典加載配置"""
        config = cls()
        for cat_name, cat_data in config_dict.get("categories", {}).items():
            category = CheckCategory(
                name=cat_data.get("name", cat_name),
                enabled=cat_data.get("enabled", True),
            )
            for check_name, check_data in cat_data.get("checks", {}).items():
                category.add_check(CheckConfig(
                    name=check_data.get("name", check_name),
                    enabled=check_data.get("enabled", True),
                    tolerance=check_data.get("tolerance", 1e-12),
                    description=check_data.get("description", ""),
                    slow=check_data.get("slow", False),
                ))
            config.categories[cat_name] = category
        return config
