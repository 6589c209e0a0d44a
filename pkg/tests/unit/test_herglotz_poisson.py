"""
Herglotz 閉式、Poisson 增長常數與 g_k
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from thomson_lab.errors import (
    DomainError,
    NotApplicableError,
    PreconditionError,
    ResolutionLimitError,
)
from thomson_lab.frostman import StepDensity
from thomson_lab.herglotz_poisson import (
    build_gk,
    growth_grid,
    herglotz_eval,
    herglotz_quadrature,
    poisson_eval,
    poisson_growth_ratio,
    sample_grid,
    select_generation,
)
from thomson_lab.measure_functions import MeasureFunction
from thomson_lab.p2mu_lab import MuSpec

F = Fraction

HALF_STEP = StepDensity.from_pieces([(F(0), F(1, 2), F(2))])
SIGNED = StepDensity.from_pieces([(F(1, 8), F(3, 8), F(3)), (F(5, 8), F(7, 8), F(-1))])


class TestHerglotzEval:
    def test_constant_density(self):
        d = StepDensity.from_pieces([(F(0), F(1), F(1))])
        points = np.array([0j, 0.3 + 0.4j, -0.9j])
        assert np.allclose(herglotz_eval(d, points), 1.0, atol=1e-12)

    def test_value_at_origin_is_total(self):
        assert herglotz_eval(SIGNED, 0j) == pytest.approx(float(SIGNED.total), abs=1e-14)

    def test_scalar_returns_complex(self):
        assert isinstance(herglotz_eval(HALF_STEP, 0.2j), complex)
        assert isinstance(poisson_eval(HALF_STEP, 0.2j), float)

    def test_array_shape_preserved(self):
        points = sample_grid(4, 8, 0.5).reshape(4, 8)
        assert herglotz_eval(HALF_STEP, points).shape == (4, 8)

    @pytest.mark.parametrize("z", [0.5 + 0j, -0.2 + 0.7j, 0.95 * np.exp(2j)])
    def test_matches_quadrature(self, z):
        closed = herglotz_eval(SIGNED, z)
        assert abs(closed - herglotz_quadrature(SIGNED, z)) < 1e-9

    def test_poisson_is_real_part(self):
        points = sample_grid(5, 16, 0.8)
        assert np.allclose(poisson_eval(SIGNED, points), herglotz_eval(SIGNED, points).real)

    def test_poisson_positive_for_positive_density(self):
        points = sample_grid(5, 16, 0.95)
        assert np.all(poisson_eval(HALF_STEP, points) > 0)

    def test_boundary_rejected(self):
        with pytest.raises(DomainError):
            herglotz_eval(HALF_STEP, 1.0 + 0j)
        with pytest.raises(DomainError):
            herglotz_eval(HALF_STEP, np.array([0j, 1j]))
        with pytest.raises(DomainError):
            herglotz_quadrature(HALF_STEP, -1.0 + 0j)

    def test_zero_density(self):
        d = StepDensity.from_pieces([])
        assert herglotz_eval(d, 0.5j) == 0


class TestGrowth:
    def test_grid_distances(self):
        points = growth_grid(10, 16, 1e-4)
        distance = 1.0 - np.abs(points)
        assert points.size == 160
        assert distance.max() == pytest.approx(0.5)
        assert distance.min() == pytest.approx(1e-4)

    def test_constant_is_nonnegative(self, entropy):
        d = StepDensity.from_pieces([(F(0), F(1, 2), F(-1, 4))])
        assert poisson_growth_ratio(d, entropy, radii=8, angles=32) == 0.0

    def test_constant_bounds_samples(self, entropy):
        d = StepDensity.from_pieces([(F(0), F(1, 8), F(1))])
        constant = poisson_growth_ratio(d, entropy, radii=12, angles=64)
        points = growth_grid(12, 64, 1e-6)
        t = 1.0 - np.abs(points)
        assert np.all(poisson_eval(d, points) <= constant * entropy.values(t) / t + 1e-12)
        assert constant > 0

    def test_cap_precondition(self, entropy):
        with pytest.raises(PreconditionError):
            poisson_growth_ratio(StepDensity.from_pieces([(F(0), F(1), F(2))]), entropy)


class TestGk:
    def test_k_must_be_positive(self, benchmark, power_gauge):
        with pytest.raises(PreconditionError):
            select_generation(benchmark, power_gauge, 0)

    def test_carleson_set_not_applicable(self, geometric_set, entropy):
        with pytest.raises(NotApplicableError):
            select_generation(geometric_set, entropy, 1)

    def test_budget_exhausted(self, benchmark, power_gauge):
        with pytest.raises(ResolutionLimitError) as info:
            select_generation(benchmark, power_gauge, 10 ** 6, generation_budget=1)
        assert info.value.details["budget"] == 1

    def test_cache_is_filled(self, benchmark, power_gauge):
        cache = {}
        fn = select_generation(benchmark, power_gauge, 1, cache=cache)
        assert cache[fn.generation] is fn

    def test_first_function_checks(self, benchmark, power_gauge):
        gk = build_gk(benchmark, power_gauge, 1, growth_radii=12, growth_angles=64)
        report = gk.check(rows=8, cols=16)
        assert gk.report is report
        assert report.value_at_zero == pytest.approx(1.0, abs=1e-12)
        assert report.core_modulus == 1.0
        assert report.residual_modulus <= 1.0
        assert report.interior_bound_ok
        assert report.compact_max_modulus <= report.compact_bound + 1e-9
        assert report.passed(1)

    def test_boundary_modulus_and_samples(self, benchmark, power_gauge):
        gk = build_gk(benchmark, power_gauge, 1, growth_radii=8, growth_angles=32)
        assert gk.boundary_modulus(F(1, 8)) == 1.0
        rows = gk.samples(2, 4)
        assert len(rows) == 8
        z_re, z_im, re, im, modulus = rows[0]
        assert (z_re, z_im) == (0.0, 0.0)
        assert modulus == pytest.approx(math.hypot(re, im))
        data = gk.to_dict()
        assert data["k"] == 1 and data["gauge"] == power_gauge.to_label()

    def test_interior_bound_grows_towards_circle(self, benchmark, power_gauge):
        gk = build_gk(benchmark, power_gauge, 1, growth_radii=8, growth_angles=32)
        gk.growth_constant = 1.0
        inner, outer = gk.interior_bound(np.array([0.5 + 0j, 0.99 + 0j]))
        assert 1.0 < inner < outer

    def test_norm_squared(self, benchmark, power_gauge):
        gk = build_gk(benchmark, power_gauge, 1, growth_radii=8, growth_angles=32)
        value = gk.norm_squared(MuSpec(0.0, benchmark), radial_nodes=16, angular_nodes=64)
        assert math.isfinite(value)
        # 核心上 |g| = 1，邊界部分至少是核心的測度
        assert value > 0.25

    def test_report_fails_on_large_residual_modulus(self, benchmark, power_gauge):
        gk = build_gk(benchmark, power_gauge, 1, growth_radii=8, growth_angles=32)
        report = gk.check(rows=4, cols=8)
        report.residual_modulus = 2.0
        assert not report.passed(1)


def test_power_gauge_label_round_trip():
    assert MeasureFunction.parse(MeasureFunction.power(0.1).to_label()).to_label() == "power:0.1"
