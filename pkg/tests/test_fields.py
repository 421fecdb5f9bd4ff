from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar.fields import (
    AnalyticFn,
    ErrorBudget,
    GridSpec,
    ResolutionError,
    ScalarField,
    VectorField,
    cutoff_approximate,
    cutoff_profile,
    field_to_csv,
    field_to_json,
    l1_distance,
    load_field,
    lp_norm,
    mollifier_weights,
    mollify,
    rasterize,
    save_field,
    vector_field,
)
from fracvar.geometry import BoundedRegion, ShapeSet


def test_grid_covering_and_points():
    g = GridSpec.centered(1, 1.0, 0.25)
    assert g.extents == (8,)
    np.testing.assert_allclose(g.points(), -1 + 0.125 + 0.25 * np.arange(8))
    g2 = GridSpec.centered(2, 1.0, 0.5, center=[1.0, 2.0])
    assert g2.points().shape == (4, 4, 2)
    assert g2.index_of([1.1, 2.1]) == (2, 2)
    with pytest.raises(ValueError):
        g2.index_of([5.0, 0.0])


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        GridSpec(3, (0, 0, 0), 1.0, (2, 2, 2))
    with pytest.raises(ValueError):
        GridSpec(1, (0.0,), -1.0, (4,))
    with pytest.raises(ValueError, match="cap"):
        GridSpec.centered(2, 10.0, 1e-3)


def test_grid_dict_round_trip_and_subsample():
    g = GridSpec.centered(2, 1.0, 0.125)
    assert GridSpec.from_dict(g.to_dict()) == g
    s = g.subsampled()
    assert s.h == 0.25
    np.testing.assert_allclose(s.points()[0, 0], g.points()[0, 0] + 0.0625 - 0.0625 + 0.0)


def test_error_budget_algebra():
    a = ErrorBudget(1.0, 2.0, 3.0, ("x",))
    b = ErrorBudget(0.5, 0.0, 0.25, ("y", "x"))
    c = a + b
    assert c.total == pytest.approx(6.75)
    assert c.flags == ("x", "y")
    assert a.scaled(-2).total == pytest.approx(12.0)
    with pytest.raises(ValueError):
        ErrorBudget(-1.0)


def test_rasterize_shapes_and_resolution_guard():
    g = GridSpec.centered(1, 2.0, 1 / 64)
    f = rasterize(ShapeSet.interval(0, 1), g)
    assert f.is_indicator
    assert lp_norm(f) == pytest.approx(1.0, abs=1 / 64)
    with pytest.raises(ResolutionError):
        rasterize(ShapeSet.interval(0, 0.03), g)


def test_fields_are_immutable_and_validated():
    g = GridSpec.centered(1, 1.0, 0.25)
    f = ScalarField(g, np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0
    with pytest.raises(ValueError):
        ScalarField(g, np.ones(7))
    with pytest.raises(ValueError):
        ScalarField(g, np.full(8, np.nan))
    with pytest.raises(ValueError):
        VectorField(g, np.ones(8))


def test_vector_field_one_dimension_receives_flat_points():
    g = GridSpec.centered(1, 1.0, 0.25)
    v = vector_field(g, [lambda x: x**2])
    np.testing.assert_allclose(v.values[0], g.points() ** 2)


def test_analytic_gradient_matches_finite_differences():
    fn = AnalyticFn.bump(2, [0.1, -0.2], 1.0)
    p = np.array([[0.3, 0.1], [-0.4, -0.5]])
    step = 1e-6
    fd = np.stack(
        [(fn(p + step * e) - fn(p - step * e)) / (2 * step) for e in np.eye(2)],
        axis=-1,
    )
    np.testing.assert_allclose(fn.gradient(p), fd, rtol=1e-6, atol=1e-8)


def test_parse_function_spec():
    fn = AnalyticFn.parse("gaussian:sigma=0.5,amplitude=2", 1)
    assert fn.p["sigma"] == 0.5 and fn.p["amplitude"] == 2.0
    with pytest.raises(ValueError):
        AnalyticFn.parse("sinc", 1)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.5), st.sampled_from([1, 2]))
def test_mollifier_has_unit_mass(eps, n):
    h = eps / 4
    assert mollifier_weights(n, eps, h).sum() == pytest.approx(1.0)


def test_mollify_requires_two_cells():
    g = GridSpec.centered(1, 1.0, 0.1)
    f = ScalarField(g, np.ones(20))
    with pytest.raises(ResolutionError):
        mollify(f, 0.15)


def test_mollify_preserves_mass_of_interior_bump():
    g = GridSpec.centered(1, 3.0, 1 / 64)
    f = rasterize(AnalyticFn.bump(1, 0.0, 1.0), g)
    assert lp_norm(mollify(f, 0.25)) == pytest.approx(lp_norm(f), rel=1e-12)


def test_cutoff_profile_shape():
    r = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
    np.testing.assert_allclose(cutoff_profile(r, 1.0), [1.0, 1.0, 0.5, 0.0, 0.0])
    g = GridSpec.centered(1, 4.0, 1 / 32)
    f = cutoff_approximate(ScalarField(g, np.ones(g.extents)), 1.0)
    assert f.values[g.index_of(0.0)] == 1.0
    assert f.values[g.index_of(3.0)] == 0.0


def test_norms_and_region_restriction():
    g = GridSpec.centered(1, 2.0, 1 / 128)
    f = ScalarField(g, np.ones(g.extents))
    assert lp_norm(f) == pytest.approx(4.0)
    assert lp_norm(f, region=BoundedRegion.interval(0.0, 1.0)) == pytest.approx(1.0, abs=1 / 64)
    assert lp_norm(f, 2) == pytest.approx(2.0)
    assert l1_distance(f, ScalarField(g, np.zeros(g.extents))) == pytest.approx(4.0)


def test_field_container_round_trip(tmp_path):
    g = GridSpec.centered(2, 1.0, 0.25)
    v = VectorField(g, np.arange(2 * 64, dtype=float).reshape(2, 8, 8), budget=ErrorBudget(1e-3, 0, 0, ("t",)), provenance={"k": 1})
    path = tmp_path / "v.npz"
    save_field(str(path), v)
    back = load_field(str(path))
    np.testing.assert_array_equal(back.values, v.values)
    assert back.budget == v.budget
    assert back.grid == g
    doc = json.loads(field_to_json(v))
    assert doc["type"] == "vector" and doc["budget"]["flags"] == ["t"]


def test_field_csv_has_metadata_header():
    g = GridSpec.centered(1, 1.0, 0.5)
    text = field_to_csv(ScalarField(g, np.array([1.0, 2.0, 3.0, 4.0])))
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "x,value"
    assert len(lines) == 6
