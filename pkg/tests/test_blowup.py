from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from fracvar import blowup as B
from fracvar import constants as C
from fracvar.geometry import ShapeSet

DISK = ShapeSet.ball([0, 0], 1.0)


def test_rescale_keeps_half_space_and_maps_interval_to_half_line():
    H = ShapeSet.half_space([0.0, 1.0], 0.0)
    assert B.rescale(H, [0.0, 0.0], 0.05) == H
    a, b = B.rescale(ShapeSet.interval(0, 1), 0.0, 1e-3).intervals[0]
    assert a == 0.0 and b == pytest.approx(1000.0)


def test_half_space_normal_is_constant():
    H = ShapeSet.half_space([0.6, 0.8], 0.0)
    trace = B.frac_normal_trace(H, [0.0, 0.0], 0.5, [0.4, 0.2, 0.1])
    assert max(trace.angular_deviation([0.6, 0.8])) <= 2.0
    first = np.asarray(trace.normals[0])
    for nu in trace.normals[1:]:
        np.testing.assert_allclose(nu, first, atol=1e-12)


def test_disk_normals_point_inward_and_settle():
    trace = B.frac_normal_trace(DISK, [1.0, 0.0], 0.5, [0.4, 0.2, 0.1])
    dev = trace.angular_deviation([-1.0, 0.0])
    assert max(dev) <= 2.0
    assert trace.totals == pytest.approx([0.518176, 0.202049, 0.076199], rel=1e-4)


def test_interval_trace_off_midpoint_points_right():
    trace = B.frac_normal_trace(ShapeSet.interval(0, 1), 0.25, 0.5, [0.2, 0.1, 0.05, 0.01])
    assert all(nu is not None and nu[0] == pytest.approx(1.0) for nu in trace.normals)


def test_decay_profile_interval_and_exponent():
    radii = [0.05, 0.025, 0.0125, 0.00625, 0.003125]
    prof = B.decay_profile(ShapeSet.interval(0, 1), 0.0, 0.5, radii)
    A, Bc = C.decay_constants(1, 0.5)
    for row in prof.rows:
        assert row["total"] <= A * row["radius"] ** 0.5
        assert row["intersection_total"] <= Bc * row["radius"] ** 0.5
    assert prof.all_pass
    assert abs(prof.exponent - 0.5) <= 0.15


def test_decay_profile_far_from_set_is_small():
    prof = B.decay_profile(ShapeSet.interval(5, 6), 0.0, 0.5, [0.2, 0.1])
    assert prof.all_pass
    assert all(row["total"] < 1e-2 * row["total_bound"] for row in prof.rows)


def test_scaling_covariance_of_totals():
    big = B.frac_normal_trace(DISK, [1.0, 0.0], 0.5, [0.2])
    small = B.frac_normal_trace(ShapeSet.ball([0, 0], 0.5), [0.5, 0.0], 0.5, [0.1])
    assert big.totals[0] == pytest.approx(2**1.5 * small.totals[0], rel=0.01)
    np.testing.assert_allclose(big.normals[0], small.normals[0], atol=1e-6)


def test_tangent_convergence_disk():
    trace = B.tangent_convergence(DISK, [1.0, 0.0], 0.5, [0.4, 0.2, 0.1, 0.05])
    for key, expected in {"0.5": 0.01668, "1.0": 0.1339, "2.0": 1.0847}.items():
        d = trace.l1_distances[key]
        assert all(b < a for a, b in zip(d, d[1:]))
        assert d[0] == pytest.approx(expected, rel=1e-3)
    assert trace.extras["characterized"] is True
    np.testing.assert_allclose(trace.extras["candidate_normal"], [-1.0, 0.0], atol=1e-9)


def test_half_space_distance_is_exact_zero_for_half_space():
    H = ShapeSet.half_space([1.0, 0.0], 0.0)
    assert B.half_space_distance(H, [1.0, 0.0], 1.0) == pytest.approx(0.0, abs=1e-12)
    assert B.half_space_distance(ShapeSet.interval_union([(0.0, 5.0)]), [1.0], 2.0) == pytest.approx(0.0)


def test_trace_validation_and_serialization():
    with pytest.raises(ValueError):
        B.BlowupTrace((0.0,), 0.5, [0.1, 0.2], [(0.0,), (0.0,)], [1.0, 1.0], [None, None])
    with pytest.raises(ValueError):
        B.BlowupTrace((0.0,), 0.5, [0.2, 0.1], [(0.0,), (0.0,)], [1.0, 1.0], [(0.5,), None])
    trace = B.frac_normal_trace(ShapeSet.interval(0, 1), 0.0, 0.5, [0.2, 0.1])
    doc = json.loads(trace.to_json())
    assert doc["radii"] == [0.2, 0.1]
    rows = list(csv.reader(io.StringIO(trace.to_csv())))
    assert rows[0] == ["radius", "window", "quantity", "value"]


def test_grid_policy_rejects_unresolved_unit_ball():
    with pytest.raises(ValueError):
        B.GridPolicy(h=0.5).grid(1)
    with pytest.raises(ValueError):
        B.GridPolicy(half_width=0.5).grid(2)


def test_parallel_radii_give_identical_trace():
    radii = [0.2, 0.1, 0.05]
    one = B.frac_normal_trace(DISK, [1.0, 0.0], 0.5, radii, B.GridPolicy(threads=1))
    four = B.frac_normal_trace(DISK, [1.0, 0.0], 0.5, radii, B.GridPolicy(threads=4))
    assert one.to_json() == four.to_json()
