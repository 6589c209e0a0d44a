"""
錯誤類型定義

所有錯誤都帶有 exit_code，CLI 依此決定結束碼：
- 2：輸入驗證錯誤（含前置條件、不支援的規則）
- 3：數值錯誤（分解失敗、條件數過大）
- 4：解析度限制（位元預算、深度預算耗盡）
"""
from typing import Any, Dict, Optional


class ThomsonLabError(Exception):
    """所有實驗室錯誤的基底類別"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details: Dict[str, Any] = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
            "details": self.details,
        }


class LabValidationError(ThomsonLabError, ValueError):
    """輸入不合法（弧長、有理數格式、參數範圍）"""

    exit_code = 2


class PreconditionError(LabValidationError):
    """前置條件不成立"""


class UnsupportedRuleError(LabValidationError):
    """無閉式級數檢驗的間隙規則"""


class NotApplicableError(LabValidationError):
    """操作對此輸入不適用（例如殘餘部分為空）"""


class NumericalError(ThomsonLabError, ArithmeticError):
    """數值計算失敗"""

    exit_code = 3


class ResolutionLimitError(ThomsonLabError):
    """超出位元或深度預算"""

    exit_code = 4


class InvalidArcError(LabValidationError):
    """弧長不在 (0, 1] 內"""


class RationalParseError(LabValidationError):
    """有理數格式錯誤"""


class DomainError(LabValidationError):
    """參數超出定義域（t 不在 [0,1]、|z| 太接近 1、α ≤ −1）"""
