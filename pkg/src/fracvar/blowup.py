"""Blow-up experiments at boundary points of library shapes.

Every radius is handled by rescaling the set analytically, E_r = (E - x)/r,
and rasterizing E_r on one fixed window grid around the origin.  Measures
on B_r(x) then follow from measures on B_1(0) by the scaling law
D^alpha chi_E(B_r(x)) = r^(n - alpha) D^alpha chi_{E_r}(B_1(0)), so pixel
data is never zoomed and rasterization error does not compound along the
radius sequence.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import constants as C
from .fields import GridSpec, ScalarField, rasterize
from .geometry import BoundedRegion, ShapeSet, slice_intersection
from .measures import frac_variation, variation_on_region

__all__ = [
    "GridPolicy",
    "BlowupTrace",
    "DecayProfile",
    "rescale",
    "frac_normal_trace",
    "decay_profile",
    "tangent_convergence",
    "half_space_distance",
]


@dataclass(frozen=True)
class GridPolicy:
    """Fixed window grid on which every rescaled set is rasterized.

    ``half_width`` is measured in rescaled units, where the ball of interest
    is the unit ball.  ``h=None`` picks 1/512 in 1-D and 1/48 in 2-D.
    """

    half_width: float = 1.25
    h: float | None = None
    threads: int = 1

    def grid(self, n: int) -> GridSpec:
        h = self.h if self.h is not None else (1 / 512 if n == 1 else 1 / 48)
        if not 1.0 / h >= 8:
            raise ValueError(f"unit ball spans {1.0 / h:g} cells; at least 8 are needed")
        if self.half_width < 1.0:
            raise ValueError("the window must contain the unit ball")
        return GridSpec.centered(n, self.half_width, h)

    def to_dict(self) -> dict:
        return {"half_width": self.half_width, "h": self.h}


def rescale(E: ShapeSet, x, r: float) -> ShapeSet:
    """E_r = (E - x) / r, computed on the shape parameters."""
    return E.rescale(x, r)


def _check_radii(radii) -> list[float]:
    rs = [float(r) for r in radii]
    if not rs:
        raise ValueError("at least one radius is required")
    if any(not r > 0 for r in rs):
        raise ValueError("radii must be positive")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise ValueError("radii must be strictly decreasing")
    return rs


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _unit_ball(n: int) -> BoundedRegion:
    return BoundedRegion.ball(np.zeros(n), 1.0)


# --------------------------------------------------------------------------
# traces


@dataclass
class BlowupTrace:
    base_point: tuple[float, ...]
    alpha: float
    radii: list[float]
    vectors: list[tuple[float, ...]]
    totals: list[float]
    normals: list[tuple[float, ...] | None]
    l1_distances: dict[str, list[float]] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        for nu in self.normals:
            if nu is not None and abs(math.hypot(*nu) - 1.0) > 1e-9:
                raise ValueError("normals must have unit length")
        if any(t < 0 for t in self.totals):
            raise ValueError("totals must be non-negative")

    def angular_deviation(self, reference) -> list[float | None]:
        """Angle in degrees between each recorded normal and ``reference``."""
        ref = np.asarray(reference, dtype=float)
        ref = ref / np.linalg.norm(ref)
        out: list[float | None] = []
        for nu in self.normals:
            if nu is None:
                out.append(None)
            else:
                c = float(np.clip(np.dot(nu, ref), -1.0, 1.0))
                out.append(math.degrees(math.acos(c)))
        return out

    def to_dict(self) -> dict:
        return {
            "base_point": list(self.base_point),
            "alpha": self.alpha,
            "radii": list(self.radii),
            "vectors": [list(v) for v in self.vectors],
            "totals": list(self.totals),
            "normals": [None if v is None else list(v) for v in self.normals],
            "l1_distances": {k: list(v) for k, v in self.l1_distances.items()},
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Long format: radius, window, quantity, value."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "window", "quantity", "value"])
        for i, r in enumerate(self.radii):
            w.writerow([repr(r), "", "total", repr(self.totals[i])])
            for c, v in enumerate(self.vectors[i]):
                w.writerow([repr(r), "", f"vector_{c}", repr(v)])
            nu = self.normals[i]
            for c in range(len(self.base_point)):
                w.writerow([repr(r), "", f"normal_{c}", "" if nu is None else repr(nu[c])])
            for win, vals in self.l1_distances.items():
                w.writerow([repr(r), win, "l1_distance", repr(vals[i])])
        return buf.getvalue()


def _region_sample(E: ShapeSet, x, alpha: float, r: float, grid: GridSpec) -> tuple[tuple[float, ...], float]:
    Er = rescale(E, x, r)
    chi = rasterize(Er, grid, warn_truncated=False)
    sample = variation_on_region(chi, alpha, _unit_ball(E.n))
    scale = r ** (E.n - alpha)
    return tuple(scale * v for v in sample.vector), scale * sample.total


def frac_normal_trace(E: ShapeSet, x, alpha: float, radii, grid_policy: GridPolicy | None = None) -> BlowupTrace:
    """D^alpha chi_E(B_r(x)) and |D^alpha chi_E|(B_r(x)) along a decreasing radius sequence.

    The normal at a radius is the vector divided by the total; it is
    recorded as None where the total vanishes.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    policy = grid_policy or GridPolicy()
    rs = _check_radii(radii)
    grid = policy.grid(E.n)
    xs = tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))
    if len(xs) != E.n:
        raise ValueError(f"base point has {len(xs)} coordinates, the shape lives in {E.n} dimensions")
    samples = _map_ordered(lambda r: _region_sample(E, xs, alpha, r, grid), rs, policy.threads)
    vectors = [s[0] for s in samples]
    totals = [s[1] for s in samples]
    normals: list[tuple[float, ...] | None] = []
    for vec, tot in samples:
        norm = math.hypot(*vec)
        if tot > 0 and norm > 0:
            normals.append(tuple(v / norm for v in vec))
        else:
            normals.append(None)
    extras = {"grid_policy": policy.to_dict(), "shape": E.to_dict()}
    return BlowupTrace(xs, alpha, rs, vectors, totals, normals, {}, extras)


# --------------------------------------------------------------------------
# decay


@dataclass
class DecayProfile:
    base_point: tuple[float, ...]
    alpha: float
    rows: list[dict]
    exponent: float | None
    constants: dict

    @property
    def all_pass(self) -> bool:
        return all(row["total_pass"] and row["intersection_pass"] for row in self.rows)

    def to_dict(self) -> dict:
        return {
            "base_point": list(self.base_point),
            "alpha": self.alpha,
            "rows": self.rows,
            "exponent": self.exponent,
            "constants": self.constants,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "window", "quantity", "value"])
        for row in self.rows:
            for key in ("total", "total_bound", "intersection_total", "intersection_bound"):
                w.writerow([repr(row["radius"]), "", key, repr(row[key])])
        return buf.getvalue()


def _intersection_variation(E: ShapeSet, x, alpha: float, r: float, grid: GridSpec) -> float:
    Er = rescale(E, x, r)
    chi = rasterize(Er, grid, warn_truncated=False).values
    ball = grid.region_mask(_unit_ball(E.n))
    f = ScalarField(grid, chi * ball)
    return r ** (E.n - alpha) * frac_variation(f, alpha).value


def fit_exponent(radii, totals) -> float | None:
    """Least-squares slope of log(total) against log(r) over positive totals."""
    pairs = [(math.log(r), math.log(t)) for r, t in zip(radii, totals) if t > 0]
    if len(pairs) < 2:
        return None
    lr, lt = np.array(pairs).T
    return float(np.polyfit(lr, lt, 1)[0])


def decay_profile(E: ShapeSet, x, alpha: float, radii, grid_policy: GridPolicy | None = None) -> DecayProfile:
    """Per radius: |D^alpha chi_E|(B_r) against A r^(n-alpha), |D^alpha chi_{E cap B_r}| against B r^(n-alpha).

    Violations are flagged per row rather than raised: the decay bounds only
    hold below a radius that cannot be computed.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    policy = grid_policy or GridPolicy()
    trace = frac_normal_trace(E, x, alpha, radii, policy)
    grid = policy.grid(E.n)
    A, B = C.decay_constants(E.n, alpha)
    inter = _map_ordered(lambda r: _intersection_variation(E, trace.base_point, alpha, r, grid), trace.radii, policy.threads)
    rows = []
    for r, tot, it in zip(trace.radii, trace.totals, inter):
        scale = r ** (E.n - alpha)
        rows.append(
            {
                "radius": r,
                "total": tot,
                "total_bound": A * scale,
                "total_pass": tot <= A * scale,
                "density_ratio": tot / (C.omega(E.n - alpha) * scale),
                "intersection_total": it,
                "intersection_bound": B * scale,
                "intersection_pass": it <= B * scale,
            }
        )
    consts = {"A": A, "B": B, "omega_n_minus_alpha": C.omega(E.n - alpha), "density_bound": C.density_bound(E.n, alpha)}
    return DecayProfile(trace.base_point, alpha, rows, fit_exponent(trace.radii, trace.totals), consts)


# --------------------------------------------------------------------------
# tangent sets


def half_space_distance(F: ShapeSet, normal, window: float) -> float:
    """L^1 distance between chi_F and chi_{y . normal >= 0} on the ball B_window(0).

    Computed from slices: exact in 1-D, adaptive quadrature over x1 in 2-D.
    """
    nrm = np.asarray(normal, dtype=float)
    nrm = nrm / np.linalg.norm(nrm)
    L = float(window)
    if F.n == 1:
        H = (0.0, math.inf) if nrm[0] > 0 else (-math.inf, 0.0)
        W = (-L, L)

        def length(ivs):
            return sum(max(0.0, min(b, W[1]) - max(a, W[0])) for a, b in ivs)

        inter = [slice_intersection(iv, H) for iv in F.intervals1d()]
        inter = [iv for iv in inter if iv is not None]
        return length(F.intervals1d()) + length([H]) - 2 * length(inter)
    H = ShapeSet.half_space(nrm, 0.0)

    def seg(iv):
        return 0.0 if iv is None else iv[1] - iv[0]

    def integrand(x1: float) -> float:
        w = math.sqrt(max(L * L - x1 * x1, 0.0))
        disk = (-w, w)
        a = slice_intersection(F.slice_x1(x1), disk)
        b = slice_intersection(H.slice_x1(x1), disk)
        both = slice_intersection(a, b)
        return seg(a) + seg(b) - 2 * seg(both)

    breaks = [-L, L]
    for shape in (F, H):
        lo, hi = shape.bbox()
        breaks += [float(v) for v in (lo[0], hi[0]) if math.isfinite(v) and -L < v < L]
    if F.kind == "ball":
        breaks += [F.center[0] - F.radius, F.center[0] + F.radius]
    pts = sorted({b for b in breaks if -L < b < L})
    val, _ = integrate.quad(integrand, -L, L, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-10)
    return float(val)


def tangent_convergence(
    E: ShapeSet, x, alpha: float, radii, windows=(0.5, 1.0, 2.0), grid_policy: GridPolicy | None = None, angle_tol: float = 2.0
) -> BlowupTrace:
    """Distances of E_r to the candidate tangent half-space, plus the characterization check.

    The candidate is the half-space whose inner normal is the normal found at
    the finest radius.  Its own trace must be constant and agree with that
    normal within ``angle_tol`` degrees.
    """
    trace = frac_normal_trace(E, x, alpha, radii, grid_policy)
    nu = trace.normals[-1]
    if nu is None:
        raise ValueError("no resolvable normal at the finest radius")
    for L in windows:
        trace.l1_distances[repr(float(L))] = [half_space_distance(rescale(E, trace.base_point, r), nu, L) for r in trace.radii]
    # the candidate H through the origin, blown up at the origin
    H = ShapeSet.half_space(nu, 0.0) if E.n == 2 else ShapeSet.interval_union([(0.0, math.inf)] if nu[0] > 0 else [(-math.inf, 0.0)])
    h_trace = frac_normal_trace(H, np.zeros(E.n), alpha, trace.radii, grid_policy)
    dev = [d for d in h_trace.angular_deviation(nu) if d is not None]
    trace.extras["candidate_normal"] = list(nu)
    trace.extras["tangent_normal_deviation_deg"] = max(dev) if dev else None
    trace.extras["characterized"] = bool(dev) and max(dev) <= angle_tol and len(dev) == len(trace.radii)
    return trace
