from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracvar.geometry import BoundedRegion, ShapeSet


def test_parse_round_trip_kinds():
    assert ShapeSet.parse("interval:0,1") == ShapeSet.interval(0, 1)
    assert ShapeSet.parse("ball:0,0,1") == ShapeSet.ball([0, 0], 1)
    assert ShapeSet.parse("box:0,0,1,2").measure() == pytest.approx(2.0)
    assert ShapeSet.parse("half_space:1,0,0.5").offset == 0.5
    with pytest.raises(ValueError):
        ShapeSet.parse("triangle:0,0,1")


def test_constructor_validation():
    with pytest.raises(ValueError):
        ShapeSet.interval(1, 0)
    with pytest.raises(ValueError):
        ShapeSet.ball([0, 0], -1)
    with pytest.raises(ValueError):
        ShapeSet.interval_union([(0, 2), (1, 3)])


def test_measures_and_perimeters():
    assert ShapeSet.interval_union([(0, 1), (2, 4)]).measure() == pytest.approx(3.0)
    disk = ShapeSet.ball([0, 0], 2.0)
    assert disk.measure() == pytest.approx(4 * math.pi)
    assert disk.classical_perimeter() == pytest.approx(4 * math.pi)


@given(st.floats(-3, 3), st.floats(0.05, 5))
def test_rescale_inverts(x, r):
    E = ShapeSet.interval(-1.0, 2.0)
    F = E.rescale(x, r)
    a, b = F.intervals[0]
    assert a * r + x == pytest.approx(-1.0, abs=1e-9)
    assert b * r + x == pytest.approx(2.0, abs=1e-9)


def test_half_space_is_blowup_invariant():
    H = ShapeSet.half_space([0.6, 0.8], 0.0)
    for r in (1.0, 0.1, 0.01):
        assert H.rescale([0.0, 0.0], r) == H


def test_disk_blowup_approaches_half_plane():
    r = 0.01
    F = ShapeSet.ball([0, 0], 1.0).rescale([1.0, 0.0], r)
    centre, radius = np.asarray(F.center), F.radius
    # distance from points of the tangent line x1 = 0 inside the window to the rescaled circle
    x2 = np.linspace(-1, 1, 41)
    line = np.stack([np.zeros_like(x2), x2], axis=-1)
    gap = np.abs(np.linalg.norm(line - centre, axis=-1) - radius)
    assert gap.max() <= r / 2


def test_contains_and_ray_segment():
    D = ShapeSet.ball([0, 0], 1.0)
    pts = np.array([[0.0, 0.0], [0.9, 0.0], [1.1, 0.0]])
    np.testing.assert_array_equal(D.contains(pts), [True, True, False])
    t1, t2 = D.ray_segment(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    assert float(t2) == pytest.approx(1.0)


def test_bounded_region_properties():
    B = BoundedRegion.ball([0, 0], 1.0)
    assert B.volume == pytest.approx(math.pi)
    assert B.diam == pytest.approx(2.0)
    Q = BoundedRegion.box([0, 0], [1, 2])
    assert Q.diam == pytest.approx(math.sqrt(5))
    lo, hi = Q.bounds()
    np.testing.assert_allclose(hi - lo, [1, 2])
