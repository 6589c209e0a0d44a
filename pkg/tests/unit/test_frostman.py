"""
分段常數密度、區間上限審核與兩種 Frostman 構造
"""
import math
from fractions import Fraction

import pytest

from thomson_lab.circle_sets import Arc, ArcUnion, canonicalize
from thomson_lab.errors import LabValidationError, PreconditionError
from thomson_lab.frostman import (
    StepDensity,
    cap_audit,
    dyadic_cap_audit,
    frostman_averaged,
    frostman_dyadic,
)
from thomson_lab.hausdorff_content import DyadicCell, dyadic_content
from thomson_lab.measure_functions import ENTROPY, MeasureFunction

F = Fraction


def union(*intervals):
    return ArcUnion.from_intervals([(F(a), F(b)) for a, b in intervals])


class TestStepDensity:
    def test_from_pieces(self):
        d = StepDensity.from_pieces([(F(0), F(1, 2), F(2))])
        assert d.total == 1
        assert d.mass(F(1, 4), F(3, 4)) == F(1, 2)
        assert d.value_at(F(1, 4)) == 2
        assert d.value_at(F(3, 4)) == 0
        assert d.edges == (F(0), F(1, 2), F(1))

    def test_equal_neighbours_merge(self):
        d = StepDensity.from_pieces([(F(0), F(1, 4), F(1)), (F(1, 4), F(1, 2), F(1))])
        assert d.edges == (F(0), F(1, 2), F(1))

    def test_overlapping_pieces_rejected(self):
        with pytest.raises(LabValidationError):
            StepDensity.from_pieces([(F(0), F(1, 2), F(1)), (F(1, 4), F(3, 4), F(1))])

    @pytest.mark.parametrize(
        "edges, values",
        [
            ((F(0), F(1, 2)), (F(1),)),
            ((F(0), F(1, 2), F(1, 2), F(1)), (F(1), F(2), F(3))),
            ((F(0), F(1)), (F(1), F(2))),
        ],
    )
    def test_invalid_edges(self, edges, values):
        with pytest.raises(LabValidationError):
            StepDensity(edges, values)

    def test_arithmetic(self):
        a = StepDensity.from_pieces([(F(0), F(1, 2), F(2))])
        b = StepDensity.constant(F(1))
        assert (a + b).value_at(F(1, 4)) == 3
        assert (a - b).value_at(F(3, 4)) == -1
        assert (a - b).total == 0
        assert a.scale(F(1, 2)).total == F(1, 2)

    def test_masses_on_sets(self):
        d = StepDensity.constant(F(1))
        assert d.mass_arc(Arc(F(7, 8), F(1, 4))) == F(1, 4)
        assert d.mass_on(union(("0", "1/8"), ("1/2", "3/4"))) == F(3, 8)
        restricted = d.restrict(union(("1/4", "1/2")))
        assert restricted.total == F(1, 4)
        assert restricted.values_on(union(("0", "1/4"))) == [0]

    def test_to_dict(self):
        data = StepDensity.from_pieces([(F(1, 4), F(1, 2), F(4))]).to_dict()
        assert data["breakpoints"] == ["0", "1/4", "1/2", "1"]
        assert data["values"] == [0.0, 4.0, 0.0]
        assert data["total"] == 1.0


class TestCapAudit:
    def test_lebesgue_measure_is_under_entropy(self):
        report = cap_audit(StepDensity.constant(F(1)), ENTROPY)
        assert report.passed
        assert report.worst_excess <= 1e-12

    def test_doubled_lebesgue_fails_with_witness(self):
        report = cap_audit(StepDensity.constant(F(2)), ENTROPY)
        assert not report.passed
        assert report.worst_excess == pytest.approx(1.0)
        assert report.witness == (0.0, 1.0)

    def test_wrapping_interval_found(self):
        d = StepDensity.from_pieces([(F(0), F(1, 16), F(6)), (F(15, 16), F(1), F(6))])
        report = cap_audit(d, ENTROPY)
        assert not report.passed
        start, length = report.witness
        assert start == 0.9375 and length == pytest.approx(0.125)

    def test_factor(self):
        d = StepDensity.constant(F(2))
        assert cap_audit(d, ENTROPY, factor=2.0).passed

    def test_dyadic_audit_only_sees_cells(self):
        d = StepDensity.from_pieces([(F(1, 4), F(3, 4), F(2))])
        assert dyadic_cap_audit(d, ENTROPY, 4).passed
        assert not cap_audit(d, ENTROPY).passed

    def test_dyadic_audit_failure_report(self):
        d = StepDensity.from_pieces([(F(0), F(1, 2), F(10))])
        report = dyadic_cap_audit(d, ENTROPY, 3)
        assert not report.passed
        # 最大超出在 [0, 1/2)：5 − h(1/2)
        assert report.worst_excess == pytest.approx(5.0 - 0.5 * (1.0 + math.log(2.0)))
        assert report.witness == (0.0, 0.5)
        assert report.pairs_checked == 15


class TestDyadicLadder:
    def test_single_cell(self):
        result = frostman_dyadic(union(("1/8", "1/4")), ENTROPY, 3)
        assert float(result.density.value_at(F(3, 16))) == pytest.approx(8 * ENTROPY(0.125))
        assert result.passed
        assert result.achieved_ratio == pytest.approx(1.0)

    def test_full_circle_is_uniform(self):
        result = frostman_dyadic(ArcUnion.full(), ENTROPY, 5)
        assert float(result.total) == pytest.approx(1.0)
        assert float(result.density.value_at(F(1, 3))) == pytest.approx(1.0)
        assert cap_audit(result.density, ENTROPY).passed

    def test_two_quarters(self):
        D = union(("0", "1/4"), ("1/2", "3/4"))
        result = frostman_dyadic(D, ENTROPY, 6)
        assert result.passed
        assert float(result.total) >= 0.5
        assert result.required_ratio == 0.5

    def test_caps_hold_on_cells_not_intervals(self):
        result = frostman_dyadic(union(("1/4", "3/4")), ENTROPY, 2)
        assert result.cap.passed
        assert float(result.density.mass(F(1, 4), F(3, 4))) == pytest.approx(1.0)
        assert not cap_audit(result.density, ENTROPY).passed

    def test_rooted(self):
        root = DyadicCell(1, 1)
        result = frostman_dyadic(union(("1/2", "5/8")), ENTROPY, 3, root=root)
        assert result.density.mass(F(0), F(1, 2)) == 0
        assert result.passed

    def test_non_dyadic_endpoint(self):
        with pytest.raises(PreconditionError):
            frostman_dyadic(union(("0", "1/3")), ENTROPY, 4)

    def test_skip_audit(self):
        result = frostman_dyadic(union(("0", "1/4")), ENTROPY, 4, audit=False)
        assert result.cap is None
        assert "cap_audit" not in result.to_dict()


class TestAveraged:
    def test_two_arcs(self):
        U = union(("0", "1/4"), ("1/2", "3/4"))
        result = frostman_averaged(U, ENTROPY, 8)
        assert result.passed
        assert result.required_ratio == pytest.approx(1 / 24)
        assert float(result.total) * 24 >= dyadic_content(U, ENTROPY, 8).lower - 1e-12
        for a, b in U.intervals:
            assert len(set(result.density.values_on(ArcUnion(((a, b),))))) == 1
        assert len(result.arc_masses) == 2

    def test_constant_on_wrapping_arc(self):
        U = canonicalize([Arc(F(7, 8), F(1, 4))])
        result = frostman_averaged(U, ENTROPY, 6)
        assert result.passed
        assert result.density.value_at(F(1, 16)) == result.density.value_at(F(15, 16)) > 0

    def test_non_dyadic_open_set(self):
        U = union(("1/3", "1/2"), ("2/3", "5/7"))
        result = frostman_averaged(U, MeasureFunction.power(0.5), 10)
        assert result.passed
        assert result.density.mass_on(U) == result.total

    def test_empty(self):
        with pytest.raises(PreconditionError):
            frostman_averaged(ArcUnion.empty(), ENTROPY, 6)

    def test_to_dict(self):
        data = frostman_averaged(union(("0", "1/4")), ENTROPY, 6).to_dict()
        assert data["passed"] is True
        assert data["arc_masses"][0]["arc"] == ["0", "1/4"]
