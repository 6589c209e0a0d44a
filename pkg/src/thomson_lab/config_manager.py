#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
實驗室配置管理模組

讀取 config/lab_config.ini；找不到文件時使用內建默認值。
環境變數 THOMSON_LAB_PRECISION=extended 會覆蓋 [numerics] precision。
"""

import configparser
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

PRECISION_ENV = "THOMSON_LAB_PRECISION"
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def parse_degrees(text: str) -> List[int]:
    """
    解析次數列表

    Args:
        text: "10:150:10"（起:止:步長，含止點）或 "0,5,10"

    Returns:
        嚴格遞增的整數列表
    """
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"無效的次數範圍: {text}")
        start, stop, step = parts
        degrees = list(range(start, stop + 1, step))
    else:
        degrees = [int(p) for p in text.split(",") if p.strip()]
    if not degrees or any(d < 0 for d in degrees):
        raise ValueError(f"無效的次數列表: {text}")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ValueError(f"次數列表必須嚴格遞增: {text}")
    return degrees


class LabConfig:
    """實驗室配置管理器"""

    def __init__(self, config_file: Optional[str] = None):
        """
        初始化配置管理器

        Args:
            config_file: 配置文件路徑，如果為None則使用默認路徑
        """
        if config_file is None:
            project_dir = Path(__file__).resolve().parent.parent.parent
            self.config_file = str(project_dir / "config" / "lab_config.ini")
        else:
            self.config_file = config_file

        self.config = configparser.ConfigParser(interpolation=None)
        self._load_config()

    def _load_config(self) -> None:
        """載入配置文件"""
        self._create_default_config()
        if os.path.exists(self.config_file):
            self.config.read(self.config_file, encoding="utf-8")

        override = os.environ.get(PRECISION_ENV)
        if override:
            self.config.set("numerics", "precision", override.strip().lower())

    def _create_default_config(self) -> None:
        """創建默認配置"""
        self.config["numerics"] = {
            "precision": "double",
            "bit_budget": "65536",
            "measure_tolerance": "1e-12",
            "mp_dps": "50",
        }

        self.config["content"] = {
            "default_depth": "20",
            "default_variant": "mhd",
        }

        self.config["frostman"] = {
            "default_depth": "10",
            "cap_tolerance": "1e-12",
        }

        self.config["construction"] = {
            "epsilon": "0.5",
            "relative_depth": "8",
            "cantor_extra_depth": "4",
            "audit_max_breakpoints": "3000",
            "generation_budget": "11",
        }

        self.config["herglotz"] = {
            "boundary_margin": "1e-12",
            "growth_radii": "40",
            "growth_angles": "256",
            "min_distance": "1e-6",
            "quadrature_tolerance": "1e-10",
            "grid": "64x64",
            "compact_radius": "0.9",
        }

        self.config["p2mu"] = {
            "default_degrees": "10:150:10",
            "degree_cap": "200",
            "condition_threshold": "1e12",
            "refinement_steps": "3",
            "cantor_depth": "12",
        }

        self.config["thresholds"] = {
            "residual_ratio": "0.9419",
            "arc_floor": "0.1814",
            "dirichlet_ratio": "19.56",
        }

        self.config["verify"] = {
            "seed": "0",
            "corpus_size": "100",
            "workers": "1",
            "gk_k_max": "20",
            "gk_gauge": "entropy",
            "fn_generations": "8",
        }

        self.config["output"] = {
            "default_output_dir": "output",
            "float_digits": "17",
        }

        self.config["logging"] = {
            "log_level": "WARNING",
            "log_format": DEFAULT_LOG_FORMAT,
            "log_file": "",
        }

    def get(self, section: str, key: str, fallback: Any = None) -> Any:
        """
        獲取配置值

        Args:
            section: 配置節名
            key: 配置鍵名
            fallback: 默認值

        Returns:
            配置值
        """
        return self.config.get(section, key, fallback=fallback)

    def getint(self, section: str, key: str, fallback: int = 0) -> int:
        """獲取整數配置值"""
        return self.config.getint(section, key, fallback=fallback)

    def getfloat(self, section: str, key: str, fallback: float = 0.0) -> float:
        """獲取浮點數配置值"""
        return self.config.getfloat(section, key, fallback=fallback)

    def getboolean(self, section: str, key: str, fallback: bool = False) -> bool:
        """獲取布爾配置值"""
        return self.config.getboolean(section, key, fallback=fallback)

    def get_numerics_config(self) -> Dict[str, Any]:
        """獲取數值精度配置"""
        precision = self.get("numerics", "precision", "double")
        if precision not in ("double", "extended"):
            raise ValueError(f"未知的精度設定: {precision}")
        return {
            "precision": precision,
            "bit_budget": self.getint("numerics", "bit_budget", 65536),
            "measure_tolerance": self.getfloat("numerics", "measure_tolerance", 1e-12),
            "mp_dps": self.getint("numerics", "mp_dps", 50),
        }

    def get_content_config(self) -> Dict[str, Any]:
        """獲取內容計算配置"""
        return {
            "default_depth": self.getint("content", "default_depth", 20),
            "default_variant": self.get("content", "default_variant", "mhd"),
        }

    def get_frostman_config(self) -> Dict[str, Any]:
        """獲取 Frostman 構造配置"""
        return {
            "default_depth": self.getint("frostman", "default_depth", 10),
            "cap_tolerance": self.getfloat("frostman", "cap_tolerance", 1e-12),
        }

    def get_construction_config(self) -> Dict[str, Any]:
        """獲取 f_n 構造配置"""
        return {
            "epsilon": self.getfloat("construction", "epsilon", 0.5),
            "relative_depth": self.getint("construction", "relative_depth", 8),
            "cantor_extra_depth": self.getint("construction", "cantor_extra_depth", 4),
            "audit_max_breakpoints": self.getint(
                "construction", "audit_max_breakpoints", 3000
            ),
            "generation_budget": self.getint("construction", "generation_budget", 11),
        }

    def get_herglotz_config(self) -> Dict[str, Any]:
        """獲取 Herglotz 積分配置"""
        grid = self.get("herglotz", "grid", "64x64")
        rows, cols = (int(p) for p in grid.lower().split("x"))
        return {
            "boundary_margin": self.getfloat("herglotz", "boundary_margin", 1e-12),
            "growth_radii": self.getint("herglotz", "growth_radii", 40),
            "growth_angles": self.getint("herglotz", "growth_angles", 256),
            "min_distance": self.getfloat("herglotz", "min_distance", 1e-6),
            "quadrature_tolerance": self.getfloat(
                "herglotz", "quadrature_tolerance", 1e-10
            ),
            "grid": (rows, cols),
            "compact_radius": self.getfloat("herglotz", "compact_radius", 0.9),
        }

    def get_p2mu_config(self) -> Dict[str, Any]:
        """獲取多項式距離實驗配置"""
        return {
            "default_degrees": parse_degrees(
                self.get("p2mu", "default_degrees", "10:150:10")
            ),
            "degree_cap": self.getint("p2mu", "degree_cap", 200),
            "condition_threshold": self.getfloat("p2mu", "condition_threshold", 1e12),
            "refinement_steps": self.getint("p2mu", "refinement_steps", 3),
            "cantor_depth": self.getint("p2mu", "cantor_depth", 12),
        }

    def get_thresholds_config(self) -> Dict[str, float]:
        """獲取實驗閾值（由 oracle 子命令寫入）"""
        return {
            "residual_ratio": self.getfloat("thresholds", "residual_ratio", 0.9419),
            "arc_floor": self.getfloat("thresholds", "arc_floor", 0.1814),
            "dirichlet_ratio": self.getfloat("thresholds", "dirichlet_ratio", 19.56),
        }

    def get_verify_config(self) -> Dict[str, Any]:
        """獲取驗證套件配置"""
        return {
            "seed": self.getint("verify", "seed", 0),
            "corpus_size": self.getint("verify", "corpus_size", 100),
            "workers": self.getint("verify", "workers", 1),
            "gk_k_max": self.getint("verify", "gk_k_max", 20),
            "gk_gauge": self.get("verify", "gk_gauge", "entropy"),
            "fn_generations": self.getint("verify", "fn_generations", 8),
        }

    def get_output_config(self) -> Dict[str, Any]:
        """獲取輸出配置"""
        return {
            "default_output_dir": self.get("output", "default_output_dir", "output"),
            "float_digits": self.getint("output", "float_digits", 17),
        }

    def get_logging_config(self) -> Dict[str, str]:
        """獲取日誌配置"""
        return {
            "log_level": self.get("logging", "log_level", "WARNING"),
            "log_format": self.get("logging", "log_format", DEFAULT_LOG_FORMAT),
            "log_file": self.get("logging", "log_file", ""),
        }

    def save_config(self, config_file: Optional[str] = None) -> None:
        """
        保存配置到文件

        Args:
            config_file: 配置文件路徑，如果為None則保存到當前配置文件
        """
        if config_file is None:
            config_file = self.config_file

        directory = os.path.dirname(config_file)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(config_file, "w", encoding="utf-8") as f:
            self.config.write(f)

    def update_config(self, section: str, key: str, value: Any) -> None:
        """
        更新配置值

        Args:
            section: 配置節名
            key: 配置鍵名
            value: 新值
        """
        if section not in self.config:
            self.config.add_section(section)

        self.config.set(section, key, str(value))

    def get_all_config(self) -> Dict[str, Dict[str, str]]:
        """獲取所有配置（原始字串）"""
        return {
            section: dict(self.config[section]) for section in self.config.sections()
        }


def setup_logging(config: LabConfig, verbose: bool = False) -> logging.Logger:
    """
    設置套件日誌

    Args:
        config: 配置管理器
        verbose: 為True時強制DEBUG級別

    Returns:
        套件根日誌器
    """
    settings = config.get_logging_config()
    logger = logging.getLogger("thomson_lab")
    logger.handlers.clear()
    level = "DEBUG" if verbose else settings["log_level"].upper()
    logger.setLevel(getattr(logging, level, logging.WARNING))

    formatter = logging.Formatter(settings["log_format"])
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    if settings["log_file"]:
        file_handler = logging.FileHandler(settings["log_file"], encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger
