from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar import oracles as O
from fracvar.fields import AnalyticFn, GridSpec, ResolutionError, ScalarField, VectorField, rasterize
from fracvar.geometry import ShapeSet
from fracvar.operators import (
    Backend,
    adjoint_divergence,
    check_support,
    frac_divergence,
    frac_divergence_neg,
    frac_gradient,
    frac_laplacian,
    nl_gradient_remainder,
    riesz_potential,
)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.25, 0.5, 0.75]))
def test_adjoint_pairing_is_exact(seed, alpha):
    rng = np.random.default_rng(seed)
    g = GridSpec.centered(1, 2.0, 1 / 32)
    f = ScalarField(g, rng.standard_normal(g.extents))
    phi = VectorField(g, rng.standard_normal((1,) + g.extents))
    lhs = np.sum(f.values * frac_divergence(phi, alpha, allow_tail=True).values)
    rhs = -np.sum(adjoint_divergence(f, alpha).values * phi.values)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_adjoint_pairing_two_dimensions():
    rng = np.random.default_rng(3)
    g = GridSpec.centered(2, 1.0, 1 / 8)
    f = ScalarField(g, rng.standard_normal(g.extents))
    phi = VectorField(g, rng.standard_normal((2,) + g.extents))
    lhs = np.sum(f.values * frac_divergence(phi, 0.5, allow_tail=True).values)
    rhs = -np.sum(adjoint_divergence(f, 0.5).values * phi.values)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@pytest.mark.parametrize("kind", ["direct", "riesz", "fft"])
def test_gaussian_gradient_within_budget(kind):
    g = GridSpec.centered(1, 16.0, 1 / 64)
    f = rasterize(AnalyticFn.gaussian(1), g)
    out = frac_gradient(f, 0.5, Backend(kind), allow_tail=True)
    exact = O.gaussian_frac_gradient(1, 0.5, g.points())
    inner = np.abs(g.points()) < 8
    assert np.max(np.abs(out.values - exact)[:, inner]) <= out.budget.total
    assert out.provenance["backend"] == kind


def test_gaussian_gradient_two_dimensions_within_budget():
    g = GridSpec.centered(2, 6.0, 1 / 8)
    f = rasterize(AnalyticFn.gaussian(2, [0.0, 0.0]), g)
    out = frac_gradient(f, 0.5, allow_tail=True)
    exact = O.gaussian_frac_gradient(2, 0.5, g.points())
    inner = np.linalg.norm(g.points(), axis=-1) < 3
    assert np.max(np.abs(out.values - exact)[:, inner]) <= out.budget.total


def test_untruncated_input_is_rejected_without_tail_flag():
    g = GridSpec.centered(1, 2.0, 1 / 32)
    f = ScalarField(g, np.ones(g.extents))
    with pytest.raises(ResolutionError):
        frac_gradient(f, 0.5)
    assert check_support(np.array([0.0, 1.0, 0.0])) == 0.0


def test_unknown_backend_and_bad_order():
    with pytest.raises(ValueError):
        Backend("spectral")
    g = GridSpec.centered(1, 2.0, 1 / 32)
    with pytest.raises(ValueError, match="admissible"):
        frac_gradient(rasterize(AnalyticFn.bump(1), g), 1.2)


def test_interval_gradient_pointwise_against_closed_form():
    g = GridSpec.centered(1, 2.0, 1 / 1024, center=[0.5])
    f = rasterize(ShapeSet.interval(0, 1), g)
    out = frac_gradient(f, 0.5).values[0]
    xs = g.points()
    probes = [i for i in range(0, g.extents[0], 97) if min(abs(xs[i]), abs(xs[i] - 0.5), abs(xs[i] - 1)) >= 0.05]
    exact = O.interval_gradient(0, 1, 0.5, xs[probes])
    np.testing.assert_allclose(out[probes], exact, rtol=0.02)


def test_laplacian_and_riesz_against_gaussian_closed_forms():
    g = GridSpec.centered(1, 16.0, 1 / 64)
    f = rasterize(AnalyticFn.gaussian(1), g)
    inner = np.abs(g.points()) < 4
    lap = frac_laplacian(f, 1.0)
    exact = O.gaussian_frac_laplacian(1, 1.0, g.points())
    assert np.max(np.abs(lap.values - exact)[inner]) <= lap.budget.total
    pot = riesz_potential(f, 0.5)
    exact = O.gaussian_frac_laplacian(1, -0.5, g.points())
    assert np.max(np.abs(pot.values - exact)[inner]) <= max(pot.budget.total, 1e-3)


def test_laplacian_rejects_out_of_range_order():
    g = GridSpec.centered(1, 16.0, 1 / 16)
    with pytest.raises(ValueError):
        frac_laplacian(rasterize(AnalyticFn.gaussian(1), g), 2.0)


def test_inversion_recovers_gaussian():
    g = GridSpec.centered(1, 16.0, 1 / 64)
    f = rasterize(AnalyticFn.gaussian(1), g)
    back = frac_divergence_neg(frac_gradient(f, 0.5, allow_tail=True), 0.5)
    err = np.sum(np.abs(-back.values - f.values)) / np.sum(np.abs(f.values))
    assert err < 0.01


def test_inversion_two_dimensions_uses_far_field_model():
    g = GridSpec.centered(2, 8.0, 1 / 8)
    f = rasterize(AnalyticFn.gaussian(2, [0.0, 0.0]), g)
    back = frac_divergence_neg(frac_gradient(f, 0.5, allow_tail=True), 0.5)
    err = np.sum(np.abs(-back.values - f.values)) / np.sum(np.abs(f.values))
    assert err < 0.02
    assert "monopole_far_field" in back.budget.flags


def test_nonlocal_remainder_symmetry_and_bilinearity():
    g = GridSpec.centered(1, 3.0, 1 / 64)
    f = rasterize(AnalyticFn.bump(1, -0.2, 1.0), g)
    h = rasterize(AnalyticFn.bump(1, 0.3, 0.8), g)
    a = nl_gradient_remainder(f, h, 0.5).values
    b = nl_gradient_remainder(h, f, 0.5).values
    np.testing.assert_allclose(a, b, atol=1e-14)
    doubled = nl_gradient_remainder(f, ScalarField(g, 2 * h.values), 0.5).values
    np.testing.assert_allclose(doubled, 2 * a, atol=1e-14)


@pytest.mark.parametrize("alpha", [0.25, 0.75])
def test_homogeneity_on_nested_grids(alpha):
    lam = 2.0
    coarse = GridSpec.centered(1, 8.0, 1 / 32)
    fine = GridSpec.centered(1, 4.0, 1 / 64)
    g1 = frac_gradient(rasterize(AnalyticFn.gaussian(1), coarse), alpha).values
    g2 = frac_gradient(rasterize(AnalyticFn.gaussian(1, 0.0, 0.5), fine), alpha).values
    assert np.max(np.abs(g2 - lam**alpha * g1)) <= 1e-10 * np.max(np.abs(g1))
