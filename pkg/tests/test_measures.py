from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar import constants as C
from fracvar import measures as M
from fracvar import oracles as O
from fracvar.fields import AnalyticFn, GridSpec, ResolutionError, ScalarField, VectorField, rasterize
from fracvar.geometry import BoundedRegion, ShapeSet


def _interval_field(h=1 / 1024, a=0.0, b=1.0, half_width=2.0):
    g = GridSpec.centered(1, half_width, h, center=[(a + b) / 2])
    return rasterize(ShapeSet.interval(a, b), g)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_interval_perimeter_exact_and_grid(alpha):
    E = ShapeSet.interval(0, 1)
    expected = 4 / (alpha * (1 - alpha))
    assert M.frac_perimeter(E, alpha, method="exact") == pytest.approx(expected, rel=1e-12)
    assert M.frac_perimeter(E, alpha, method="grid", h=1 / 512) == pytest.approx(expected, rel=0.01)


def test_relative_perimeter_counts_outside_interactions_once():
    E = ShapeSet.interval(0, 1)
    Omega = BoundedRegion.interval(-0.5, 0.5)
    inside = M.frac_perimeter(E, 0.5, Omega, method="exact")
    grid_value = M.frac_perimeter(E, 0.5, Omega, method="grid", h=1 / 512)
    assert 0 < inside < 16
    assert grid_value == pytest.approx(inside, rel=0.02)


def test_two_dimensional_perimeters_frozen():
    assert M.ball_perimeter_2d(0.5).value == pytest.approx(124.26127755565818, rel=1e-6)
    assert M.box_perimeter_2d(0.5, [0, 0], [1, 1]).value == pytest.approx(54.42381671, rel=1e-6)
    # dilation scales the perimeter by lambda^(n - alpha)
    assert M.ball_perimeter_2d(0.5, 2.0).value == pytest.approx(2**1.5 * 124.26127755565818, rel=1e-6)


def test_interval_variation_adjoint_and_oracle():
    f = _interval_field()
    adj = M.frac_variation(f, 0.5)
    assert adj.value == pytest.approx(2.2567583418, rel=1e-8)
    assert adj.value == pytest.approx(O.interval_gradient_l1(0, 1, 0.5), rel=0.05)
    orc = M.frac_variation(f, 0.5, method="oracle")
    assert orc.value == pytest.approx(2.25675833419, rel=1e-9)


def test_pairing_supremum_equals_adjoint_norm():
    f = _interval_field(h=1 / 256)
    a = M.frac_variation(f, 0.5, Omega=BoundedRegion.interval(-0.5, 1.5))
    b = M.frac_variation(f, 0.5, Omega=BoundedRegion.interval(-0.5, 1.5), method="pairing_sup", return_witness=True)
    assert b.value == pytest.approx(a.value, rel=1e-12)
    assert np.max(np.abs(b.witness.values)) <= 1.0


def test_strict_inequality_for_interval():
    f = _interval_field()
    v = M.frac_variation(f, 0.5).value
    bound = C.mu(1, 0.5) * 16
    assert v < bound
    assert 1 - v / bound >= 0.9 * O.strict_margin(0.5)


def test_variation_scales_with_dilation():
    g1 = GridSpec.centered(1, 2.0, 1 / 512)
    g2 = GridSpec.centered(1, 4.0, 1 / 256)
    v1 = M.frac_variation(rasterize(ShapeSet.interval(-0.5, 0.5), g1), 0.5).value
    v2 = M.frac_variation(rasterize(ShapeSet.interval(-1.0, 1.0), g2), 0.5).value
    assert v2 / v1 == pytest.approx(2**0.5, rel=0.01)


def test_disk_variation_frozen():
    g = GridSpec.centered(2, 2.0, 1 / 16)
    v = M.frac_variation(rasterize(ShapeSet.ball([0, 0], 1.0), g), 0.5)
    assert v.value == pytest.approx(8.8533, rel=2e-3)
    assert v.value < C.mu(2, 0.5) * 124.26127755565818


def test_gagliardo_seminorm_of_indicator_is_perimeter():
    f = _interval_field(h=1 / 512)
    val, budget = M.gagliardo_seminorm(f, 0.5, 1, with_budget=True)
    assert val == pytest.approx(16.0, rel=0.01)
    assert budget.quadrature_term >= 0


def test_gagliardo_rejects_bad_exponent():
    f = _interval_field(h=1 / 64)
    with pytest.raises(ValueError):
        M.gagliardo_seminorm(f, 0.5, 0.5)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.3, 1.2), st.floats(-0.5, 0.5))
def test_sobolev_bound_on_bumps(radius, centre):
    g = GridSpec.centered(1, 3.0, 1 / 128)
    f = rasterize(AnalyticFn.bump(1, centre, radius), g)
    assert M.frac_variation(f, 0.5).value <= C.mu(1, 0.5) * M.gagliardo_seminorm(f, 0.5) * (1 + 1e-9)


def test_variation_on_region_direction_and_clipping():
    f = _interval_field(h=1 / 512)
    sample = M.variation_on_region(f, 0.5, BoundedRegion.ball([0.0], 0.2))
    assert sample.direction[0] == pytest.approx(1.0)
    with pytest.raises(ResolutionError):
        M.variation_on_region(f, 0.5, BoundedRegion.ball([0.0], 5.0))


def test_vector_measure_sample_invariant():
    with pytest.raises(ValueError):
        M.VectorMeasureSample(BoundedRegion.ball([0.0], 1.0), (2.0,), 1.0)


def test_coarea_of_unimodal_bump_is_equality():
    g = GridSpec.centered(1, 3.0, 1 / 256)
    f = rasterize(AnalyticFn.bump(1, 0.0, 1.0), g)
    res = M.coarea_integral(f, 0.5, 128)
    assert res.variation <= res.level_total * (1 + 1e-9)
    grad = M._gradient_density(f, 0.5)
    rel = np.sum(np.abs(res.accumulated.values - grad)) / np.sum(np.abs(grad))
    assert rel < 0.05


def test_boundary_measure_formula_matches_interval_oracle():
    xs = np.array([-0.4, 0.25, 0.8, 1.7])
    got = M.bv_measure_gradient(ShapeSet.interval(0, 1), 0.5, xs)[0]
    np.testing.assert_allclose(got, O.interval_gradient(0, 1, 0.5, xs), rtol=1e-10)


def test_pair_with_field_requires_shared_grid():
    f = _interval_field(h=1 / 64)
    other = GridSpec.centered(1, 1.0, 1 / 64)
    with pytest.raises(ValueError):
        M.pair_with_field(f, VectorField(other, np.zeros((1,) + other.extents)), 0.5)


def test_outside_mass_one_dimension_is_exact_for_single_sign():
    g = GridSpec.centered(1, 1.0, 1 / 64)
    f = ScalarField(g, np.ones(g.extents))
    value, unc = M._outside_variation_1d(f, 0.5)
    # what the grid cannot see is the full norm minus the part on (-1, 1)
    assert unc == 0.0
    assert value == pytest.approx(O.interval_gradient_l1(-1, 1, 0.5) - _inside_l1(0.5), rel=1e-6)


def _inside_l1(alpha):
    from scipy import integrate

    pref = C.mu(1, alpha) / alpha
    val, _ = integrate.quad(lambda x: pref * abs((x + 1) ** -alpha - (1 - x) ** -alpha), -1, 1, points=[0], limit=200)
    return val


def test_far_field_mass_two_dimensions_positive():
    g = GridSpec.centered(2, 2.0, 1 / 8)
    f = rasterize(AnalyticFn.bump(2, [0, 0], 1.0), g)
    value, unc = M._outside_variation_2d(f, 0.5)
    assert value > 0 and unc < 0.05 * value
    assert math.isfinite(value)
