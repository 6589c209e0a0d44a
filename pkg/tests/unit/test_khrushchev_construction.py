"""
稠密閉子集與 f_n 構造
"""
import math
from fractions import Fraction

import pytest

from thomson_lab.circle_sets import Arc, ArcUnion
from thomson_lab.errors import LabValidationError, PreconditionError, ResolutionLimitError
from thomson_lab.khrushchev_construction import construct_fn, dense_core_subset
from thomson_lab.measure_functions import ENTROPY, MeasureFunction

F = Fraction

# n ≥ 5 的構造較慢
ENTROPY_GENERATIONS = [1, 2, 3, 4] + [
    pytest.param(n, marks=pytest.mark.slow) for n in (5, 6, 7, 8)
]


class TestDenseCoreSubset:
    def test_sparse_set_selects_whole_arc(self):
        result = dense_core_subset(ArcUnion(((F(0), F(1, 8)),)), Arc(0, F(1, 2)), depth=6)
        assert result.B.is_empty
        assert result.complementary_arcs.intervals == ((F(0), F(1, 2)),)
        assert result.worst_density == F(1, 4)

    def test_dense_part_kept(self):
        result = dense_core_subset(ArcUnion(((F(0), F(3, 8)),)), Arc(0, F(1, 2)), depth=6)
        assert result.B.intervals == ((F(0), F(1, 4)),)
        assert result.complementary_arcs.intervals == ((F(1, 4), F(1, 2)),)
        assert result.worst_density == F(1, 2)
        assert result.densities_ok
        assert result.defect.upper == 0

    def test_structured_set(self, residual_target):
        result = dense_core_subset(residual_target, Arc(F(1, 2), F(1, 2)), depth=8)
        assert result.densities_ok
        assert result.worst_density <= F(1, 2)
        assert not result.complementary_arcs.is_empty
        assert result.defect.lower >= 0

    def test_dense_cells_at_depth_keep_only_gaps(self):
        F_set = ArcUnion(((F(0), F(1, 8)), (F(5, 32), F(1, 2))))
        result = dense_core_subset(F_set, Arc(0, F(1, 2)), depth=2)
        assert result.complementary_arcs.intervals == ((F(1, 8), F(5, 32)),)
        assert result.B.intervals == F_set.intervals
        assert result.defect.upper == 0
        assert result.worst_density == 0

    @pytest.mark.parametrize("epsilon", [F(0), F(1), F(3, 2)])
    def test_epsilon_range(self, epsilon):
        with pytest.raises(LabValidationError):
            dense_core_subset(ArcUnion.empty(), Arc(0, F(1, 2)), epsilon)


class TestConstructFn:
    def test_generation_must_be_positive(self, benchmark, entropy):
        with pytest.raises(PreconditionError):
            construct_fn(benchmark, entropy, 0)

    def test_first_generation_properties(self, benchmark, entropy):
        fn = construct_fn(benchmark, entropy, 1)
        report = fn.report
        assert report.passed, report.to_dict()
        assert report.integral_zero and report.cell_integrals_zero
        assert report.core_zero and report.residual_nonpositive
        assert report.audit_mode == "exhaustive"
        assert fn.density.total == 0
        assert fn.settings["cantor_depth"] == 5

    def test_only_residual_cells_are_active(self, benchmark, entropy):
        fn = construct_fn(benchmark, entropy, 2)
        active = [record.cell.index for record in fn.cells if record.active]
        assert active == [2, 3]
        assert fn.density.mass(F(0), F(1, 2)) == 0
        for record in fn.cells:
            if record.active:
                assert record.nu_mass == record.level * record.residual_measure
                assert record.mass_ok
        assert len(fn.to_dict()["cells"]) == 2

    def test_values(self, benchmark, entropy):
        fn = construct_fn(benchmark, entropy, 1)
        assert fn.value_at(F(1, 2)) == 0
        assert fn.value_at(F(1, 8)) == 0
        assert fn.sup_on_residual() < 0

    def test_level_bound_for_power_gauge(self, benchmark):
        fn = construct_fn(benchmark, MeasureFunction.power(0.1), 1)
        assert fn.report.passed
        assert fn.report.level_ok
        assert fn.report.min_level >= fn.report.level_bound

    def test_carleson_set_gives_zero(self, geometric_set, entropy):
        fn = construct_fn(geometric_set, entropy, 2)
        assert fn.density.values == (F(0),)
        assert not any(record.active for record in fn.cells)
        assert fn.report.min_level == math.inf

    def test_workers_do_not_change_result(self, benchmark, entropy):
        serial = construct_fn(benchmark, entropy, 2)
        parallel = construct_fn(benchmark, entropy, 2, workers=2)
        assert serial.density == parallel.density

    def test_per_cell_audit(self, benchmark, entropy):
        fn = construct_fn(benchmark, entropy, 1, audit_max_breakpoints=2)
        assert fn.report.audit_mode == "per_cell"
        assert fn.report.cap.passed

    def test_records_carry_mass_target(self, benchmark, entropy):
        fn = construct_fn(benchmark, entropy, 2)
        for record in fn.cells:
            if not record.active:
                continue
            assert record.mass_ok and record.level_ok
            assert record.mass_bound > 0
            assert record.defect_correction >= 0
            assert record.profile in ("frostman", "saturated")
            if record.profile == "saturated":
                assert 0 < record.saturation <= 1

    def test_mass_shortfall_raises_in_strict_mode(self, benchmark, entropy, mocker):
        mocker.patch("thomson_lab.khrushchev_construction.MASS_DIVISOR", 1e-3)
        with pytest.raises(ResolutionLimitError) as info:
            construct_fn(benchmark, entropy, 1)
        assert info.value.details["nu_mass"] < info.value.details["mass_bound"]

    def test_mass_shortfall_fails_report(self, benchmark, entropy, mocker):
        mocker.patch("thomson_lab.khrushchev_construction.MASS_DIVISOR", 1e-3)
        fn = construct_fn(benchmark, entropy, 1, strict=False)
        assert not fn.report.mass_ok
        assert not fn.report.level_ok
        assert not fn.report.passed
        assert not fn.report.to_dict()["passed"]


@pytest.mark.parametrize("n", ENTROPY_GENERATIONS)
def test_entropy_level_bound(benchmark, n):
    fn = construct_fn(benchmark, ENTROPY, n)
    report = fn.report
    bound = (1.0 + n * math.log(2.0)) / 48.0
    assert report.passed, report.to_dict()
    assert report.level_bound == pytest.approx(bound, rel=1e-12)
    assert report.min_level >= bound - 1e-12
    assert -fn.sup_on_residual() >= bound - 1e-12
