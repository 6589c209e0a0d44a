"""
規範函數 h：求值、公理檢查與任意精度交叉檢驗
"""
from fractions import Fraction

import numpy as np
import pytest

from thomson_lab.errors import DomainError, LabValidationError
from thomson_lab.measure_functions import (
    ENTROPY,
    MeasureFunction,
    check_axioms,
    cross_check,
    eval_h,
    eval_h_extended,
)


class TestEvaluation:
    def test_entropy_reference_values(self):
        assert ENTROPY(0.25) == pytest.approx(0.5965735902799727, abs=1e-12)
        assert ENTROPY(0.5) == pytest.approx(0.8465735902799727, abs=1e-12)
        assert ENTROPY(1.0) == 1.0
        assert ENTROPY(0.0) == 0.0

    def test_fraction_argument(self):
        assert ENTROPY(Fraction(1, 4)) == pytest.approx(ENTROPY(0.25))

    def test_power(self):
        h = MeasureFunction.power(0.5)
        assert h(0.25) == pytest.approx(0.5)
        assert h.ratio(0.25) == pytest.approx(2.0)

    def test_vectorised(self):
        values = eval_h(ENTROPY, np.array([0.0, 0.25, 1.0]))
        assert values.shape == (3,)
        assert values[0] == 0.0

    @pytest.mark.parametrize("t", [-0.1, 1.5, float("nan")])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            ENTROPY(t)

    def test_extended_precision(self):
        value = eval_h_extended(ENTROPY, Fraction(1, 2))
        assert float(value) == pytest.approx(0.8465735902799727, rel=1e-15)
        assert eval_h_extended(ENTROPY, 0) == 0
        with pytest.raises(DomainError):
            eval_h_extended(ENTROPY, 2.0)

    def test_cross_check(self):
        points = np.linspace(1e-6, 1.0, 50)
        assert cross_check(ENTROPY, points) < 1e-12
        assert cross_check(MeasureFunction.power(0.1), points) < 1e-12


class TestParse:
    def test_labels(self):
        assert MeasureFunction.parse("entropy") == ENTROPY
        h = MeasureFunction.parse("power:0.1")
        assert h == MeasureFunction.power(0.1)
        assert h.to_label() == "power:0.1"
        assert MeasureFunction.parse(h.to_label()) == h

    @pytest.mark.parametrize("text", ["power:1.5", "power:0", "power:x", "log", "power"])
    def test_rejected(self, text):
        with pytest.raises(LabValidationError):
            MeasureFunction.parse(text)

    def test_entropy_takes_no_beta(self):
        with pytest.raises(LabValidationError):
            MeasureFunction("entropy", 0.5)


class TestAxioms:
    @pytest.mark.parametrize("h", [ENTROPY, MeasureFunction.power(0.1), MeasureFunction.power(0.9)])
    def test_gauges_pass(self, h):
        report = check_axioms(h, 200)
        assert report.passed, report.violations
        assert set(report.checks) == {
            "zero_at_origin",
            "increasing",
            "ratio_decreasing",
            "subadditive",
        }

    def test_grid_size(self):
        with pytest.raises(LabValidationError):
            check_axioms(ENTROPY, 1)

    def test_report_dict(self):
        data = check_axioms(ENTROPY, 10).to_dict()
        assert data["gauge"] == "entropy"
        assert data["passed"] is True
        assert data["violations"] == []
