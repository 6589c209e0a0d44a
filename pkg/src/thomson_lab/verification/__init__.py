"""
驗證套件：各模組性質檢查的登記、種子語料與執行器
"""

from .config import CheckCategory, CheckConfig, VerificationConfig
from .corpus import VerificationCorpus
from .suite import CheckResult, VerificationReport, VerificationSuite, run_verify_suite

__all__ = [
    "CheckConfig",
    "CheckCategory",
    "VerificationConfig",
    "VerificationCorpus",
    "CheckResult",
    "VerificationReport",
    "VerificationSuite",
    "run_verify_suite",
]
