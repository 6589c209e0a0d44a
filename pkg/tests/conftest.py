"""
測試共用的 fixture
"""
from fractions import Fraction
from pathlib import Path

import pytest

from thomson_lab.circle_sets import (
    Arc,
    ArcUnion,
    CantorComponent,
    GeometricRule,
    HarmonicRule,
    StructuredSet,
)
from thomson_lab.config_manager import LabConfig
from thomson_lab.measure_functions import ENTROPY, MeasureFunction
from thomson_lab.set_spec import load_named_sets

PROJECT_ROOT = Path(__file__).resolve().parents[1]
CORPUS_FILE = PROJECT_ROOT / "config" / "verify_corpus.json"
REPO_CONFIG_FILE = PROJECT_ROOT / "config" / "lab_config.ini"

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


@pytest.fixture
def entropy() -> MeasureFunction:
    return ENTROPY


@pytest.fixture
def power_gauge() -> MeasureFunction:
    return MeasureFunction.power(0.1)


@pytest.fixture(scope="session")
def named_sets():
    return load_named_sets(CORPUS_FILE)


@pytest.fixture
def benchmark(named_sets) -> StructuredSet:
    """[0, 1/4) 加上 [1/2, 1) 上的 harmonic(a=3/10, p=2) Cantor 集"""
    return named_sets["benchmark"]


@pytest.fixture
def residual_target(named_sets) -> StructuredSet:
    return named_sets["residual_target"]


@pytest.fixture
def arc_target(named_sets) -> StructuredSet:
    return named_sets["arc_target"]


@pytest.fixture
def geometric_set() -> StructuredSet:
    """[0, 1/4) 加上 [1/2, 1) 上的 geometric(a=1/8, q=1/3) Cantor 集"""
    part = CantorComponent(Arc(HALF, HALF), GeometricRule(Fraction(1, 8), Fraction(1, 3)))
    return StructuredSet(ArcUnion(((Fraction(0), QUARTER),)), (part,))


@pytest.fixture
def harmonic_component() -> CantorComponent:
    return CantorComponent(Arc(HALF, HALF), HarmonicRule(Fraction(3, 10), 2))


@pytest.fixture
def lab_config(tmp_path) -> LabConfig:
    """寫入臨時目錄的默認配置"""
    return LabConfig(str(tmp_path / "lab_config.ini"))


@pytest.fixture
def repo_config() -> LabConfig:
    """倉庫內 config/lab_config.ini（只讀使用）"""
    return LabConfig(str(REPO_CONFIG_FILE))
