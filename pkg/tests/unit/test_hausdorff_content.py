"""
二進 Hausdorff 內容的動態規劃與各變體
"""
from fractions import Fraction

import pytest

from thomson_lab.circle_sets import ArcUnion
from thomson_lab.errors import LabValidationError, NumericalError, PreconditionError
from thomson_lab.hausdorff_content import (
    ContentBracket,
    DyadicCell,
    content_bracket,
    continuity_probe,
    dyadic_content,
    normalize_variant,
)
from thomson_lab.measure_functions import ENTROPY, MeasureFunction

F = Fraction
H_QUARTER = 0.5965735902799727
H_HALF = 0.8465735902799727


def union(*intervals):
    return ArcUnion.from_intervals([(F(a), F(b)) for a, b in intervals])


class TestDyadicCell:
    def test_geometry(self):
        cell = DyadicCell(3, 5)
        assert (cell.start, cell.end, cell.length) == (F(5, 8), F(3, 4), F(1, 8))
        left, right = cell.children()
        assert left == DyadicCell(4, 10) and right == DyadicCell(4, 11)
        assert cell.contains(right)
        assert not cell.contains(DyadicCell(4, 12))
        assert DyadicCell.root().contains(cell)

    @pytest.mark.parametrize("generation, index", [(2, 4), (-1, 0), (1, -1)])
    def test_invalid(self, generation, index):
        with pytest.raises(LabValidationError):
            DyadicCell(generation, index)


class TestDyadicContent:
    def test_adjacent_quarters_cost_one_cell(self):
        U = union(("0", "1/4"), ("1/4", "1/2"))
        bracket = dyadic_content(U, ENTROPY, 3)
        assert bracket.lower == pytest.approx(H_HALF, abs=1e-12)
        assert bracket.upper == pytest.approx(H_HALF, abs=1e-12)

    def test_separated_quarters_use_root(self):
        U = union(("0", "1/4"), ("1/2", "3/4"))
        bracket = dyadic_content(U, ENTROPY, 4, with_cover=True)
        assert bracket.lower == 1.0
        assert bracket.upper == 1.0
        assert bracket.cover == [DyadicCell.root()]

    def test_full_circle(self):
        bracket = dyadic_content(ArcUnion.full(), ENTROPY, 5)
        assert bracket.lower == bracket.upper == 1.0

    def test_empty(self):
        bracket = dyadic_content(ArcUnion.empty(), ENTROPY, 5)
        assert bracket.lower == bracket.upper == 0.0

    def test_single_cell_exact_at_its_generation(self):
        U = union(("1/8", "1/4"))
        exact = dyadic_content(U, ENTROPY, 3)
        assert exact.is_exact
        assert exact.lower == pytest.approx(ENTROPY(0.125))
        coarse = dyadic_content(U, ENTROPY, 2)
        assert coarse.lower <= exact.lower <= coarse.upper
        assert coarse.upper == pytest.approx(H_QUARTER)

    def test_cover_attains_upper(self):
        U = union(("1/16", "3/8"), ("5/8", "11/16"))
        bracket = dyadic_content(U, ENTROPY, 6, with_cover=True)
        cost = sum(ENTROPY(float(cell.length)) for cell in bracket.cover)
        assert cost == pytest.approx(bracket.upper, rel=1e-12)
        covered = ArcUnion.from_intervals([(c.start, c.end) for c in bracket.cover])
        assert covered.overlap(F(0), F(1)) >= U.measure
        for a, b in U.intervals:
            assert covered.overlap(a, b) == b - a

    def test_monotone_in_depth(self):
        U = union(("1/3", "2/3"))
        lowers = [dyadic_content(U, ENTROPY, d).lower for d in range(1, 12)]
        uppers = [dyadic_content(U, ENTROPY, d).upper for d in range(1, 12)]
        assert all(b >= a - 1e-12 for a, b in zip(lowers, lowers[1:]))
        assert all(b <= a + 1e-12 for a, b in zip(uppers, uppers[1:]))
        assert uppers[-1] - lowers[-1] < uppers[0] - lowers[0]

    def test_rooted_subtree(self):
        U = union(("0", "1/4"), ("1/2", "3/4"))
        bracket = dyadic_content(U, ENTROPY, 4, root=DyadicCell(1, 1))
        assert bracket.upper == pytest.approx(H_QUARTER)

    def test_depth_validation(self):
        with pytest.raises(LabValidationError):
            dyadic_content(ArcUnion.full(), ENTROPY, 0)
        with pytest.raises(LabValidationError):
            dyadic_content(ArcUnion.full(), ENTROPY, 2, root=DyadicCell(3, 0))


class TestVariants:
    def test_normalize(self):
        assert normalize_variant("mhd") == "M_hd"
        assert normalize_variant("M0-h") == "M0_h"
        assert normalize_variant("M_h") == "M_h"
        with pytest.raises(LabValidationError):
            normalize_variant("capacity")

    def test_mh_sandwich(self):
        U = union(("0", "1/4"), ("1/2", "3/4"))
        bracket = content_bracket(U, ENTROPY, 4, "mh")
        assert bracket.sandwich_lower == 0.5
        assert bracket.upper == 1.0
        assert 0.5 <= bracket.lower <= 1.0
        assert bracket.lower == pytest.approx(H_HALF)

    @pytest.mark.parametrize("variant", ["mhd", "mh", "m0hd", "m0h"])
    def test_full_circle_is_one(self, variant):
        bracket = content_bracket(ArcUnion.full(), ENTROPY, 6, variant)
        assert bracket.lower == bracket.upper == 1.0

    def test_null_parts_removed(self):
        U = union(("0", "1/2"))
        null = union(("0", "1/4"))
        bracket = content_bracket(U, ENTROPY, 4, "m0hd", null_parts=null)
        assert bracket.lower == pytest.approx(H_QUARTER)
        assert bracket.upper == pytest.approx(H_QUARTER)
        plain = content_bracket(U, ENTROPY, 4, "mhd", null_parts=null)
        assert plain.upper == pytest.approx(H_HALF)

    def test_power_gauge(self):
        h = MeasureFunction.power(0.5)
        bracket = content_bracket(union(("0", "1/4")), h, 4, "mhd")
        assert bracket.upper == pytest.approx(0.5)

    def test_inverted_bracket_rejected(self):
        with pytest.raises(NumericalError):
            ContentBracket(lower=1.0, upper=0.5, depth=1)

    def test_to_dict(self):
        data = content_bracket(union(("0", "1/4")), ENTROPY, 4, "mh").to_dict()
        assert data["variant"] == "M_h"
        assert "sandwich_lower" in data


class TestContinuity:
    def test_increasing_sequence(self):
        sets = [union(("0", F(1, 2) - F(1, 2**n))) for n in range(2, 7)]
        report = continuity_probe(sets, ENTROPY, 8)
        assert report.nondecreasing
        assert report.limit.lower == report.brackets[-1].lower

    def test_not_increasing(self):
        with pytest.raises(PreconditionError):
            continuity_probe([union(("0", "1/2")), union(("0", "1/4"))], ENTROPY, 4)

    def test_empty_sequence(self):
        with pytest.raises(PreconditionError):
            continuity_probe([], ENTROPY, 4)
