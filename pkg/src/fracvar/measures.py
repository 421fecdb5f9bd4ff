"""Gagliardo seminorms, fractional perimeters and fractional variation.

The variation of a grid field is the L^1 norm of the exact discrete
adjoint of the divergence (the dual problem separates per sample, with
maximiser -sgn of the adjoint).  Perimeters have an analytic path for
library shapes and a grid path whose contribution from outside the grid is
integrated analytically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _backend
from . import constants as C
from . import kernels as K
from . import oracles
from .fields import ErrorBudget, GridSpec, ResolutionError, ScalarField, VectorField, rasterize
from .geometry import BoundedRegion, ShapeSet, box_exit_distance
from .operators import (
    Backend,
    _ray_rule,
    adjoint_divergence,
    exterior_correction,
    frac_divergence,
)

METHODS = ("adjoint_l1", "pairing_sup", "oracle")


@dataclass(frozen=True)
class VariationReport:
    value: float
    region: BoundedRegion | None
    method: str
    budget: ErrorBudget
    witness: VectorField | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown variation method {self.method!r}")
        if self.value < 0:
            raise ValueError("a variation is non-negative")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "region": "all" if self.region is None else self.region.to_dict(),
            "method": self.method,
            "budget": self.budget.to_dict(),
        }


@dataclass(frozen=True)
class VectorMeasureSample:
    region: BoundedRegion
    vector: tuple[float, ...]
    total: float

    def __post_init__(self):
        if math.hypot(*self.vector) > self.total * (1 + 1e-12) + 1e-300:
            raise ValueError("|vector| exceeds total: not the sample of a vector measure")

    @property
    def direction(self) -> np.ndarray | None:
        """vector/total; None when the total vanishes."""
        if self.total <= 0:
            return None
        return np.asarray(self.vector) / self.total

    def to_dict(self) -> dict:
        return {"region": self.region.to_dict(), "vector": list(self.vector), "total": self.total}


# --------------------------------------------------------------------------
# integrals over the exterior of the grid box


def _outside_power_1d(grid: GridSpec, s: float) -> np.ndarray:
    """Per cell: int_{cell} int_{y outside grid} |x - y|^(-1-s) dy dx, exact."""
    L, R = grid.lo[0], grid.hi[0]
    e = grid.origin[0] + np.arange(grid.extents[0] + 1) * grid.h - 0.5 * grid.h
    e[0], e[-1] = L, R

    def F(t):
        # int (t)^(-s)/s dx antiderivative along the cell: t^(1-s)/(s(1-s))
        return np.abs(t) ** (1 - s) / (s * (1 - s))

    right = F(R - e[:-1]) - F(R - e[1:])
    left = F(e[1:] - L) - F(e[:-1] - L)
    return right + left


def _outside_power_2d(grid: GridSpec, s: float) -> np.ndarray:
    """Per cell (centre rule in x): h^2 int_{y outside grid} |x - y|^(-2-s) dy by rays."""
    th, w = _ray_rule()
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    pts = grid.points().reshape(-1, 2)
    d = box_exit_distance(pts[:, None, :], e[None, :, :], grid.lo, grid.hi)
    vals = np.sum(w[None, :] * d ** (-s), axis=1) / s
    return grid.cell_volume * vals.reshape(grid.extents)


def _outside_power(grid: GridSpec, s: float) -> np.ndarray:
    return _outside_power_1d(grid, s) if grid.n == 1 else _outside_power_2d(grid, s)


# --------------------------------------------------------------------------
# Gagliardo seminorm


def _is_binary(v: np.ndarray) -> bool:
    return bool(np.all((v == 0.0) | (v == 1.0)))


def _pair_sum(values: np.ndarray, P: np.ndarray, p: float) -> float:
    """sum_{i != j} P_{j-i} |f_i - f_j|^p over grid pairs."""
    v = np.ascontiguousarray(values, dtype=float)
    if p == 2.0 or (p >= 1 and _is_binary(v)):
        # |f_i - f_j|^2 = f_i^2 + f_j^2 - 2 f_i f_j, one FFT correlation each
        sq = v * v
        ones = np.ones_like(v)
        Pones = K.convolve_kernel(ones, P)
        Pv = K.convolve_kernel(v, P)
        return float(2 * np.sum(sq * Pones) - 2 * np.sum(v * Pv))
    if v.ndim == 1:
        half = np.ascontiguousarray(P[v.shape[0] - 1 :])
        return float(_backend.gagliardo_1d(v, half, p))
    Nx, Ny = v.shape
    quarter = np.ascontiguousarray(P[Nx - 1 :, Ny - 1 :])
    return float(_backend.gagliardo_2d(v, quarter, p))


def _gagliardo_p(values: np.ndarray, grid: GridSpec, s: float, p: float, rule: str) -> float:
    P = K.pair_weights(grid.n, s, grid.h, grid.extents, rule)
    inside = _pair_sum(values, P, p)
    outside = 2 * float(np.sum(np.abs(values) ** p * _outside_power(grid, s)))
    return inside + outside


def gagliardo_seminorm(f: ScalarField, alpha: float, p: float = 1.0, rule: str | None = None, with_budget: bool = False):
    """[f]_{W^{alpha,p}} as a double sum over cell pairs.

    The default ``cell`` rule integrates the kernel exactly over each pair of
    cells (exact for piecewise-constant data, needs alpha p < 1); pairs with
    one point outside the grid, where f is taken to vanish, are integrated
    analytically.  ``midpoint`` samples the kernel at cell centres.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    if not p >= 1 or math.isinf(p):
        raise ValueError(f"p must lie in [1, inf), got {p}")
    s = alpha * p
    rule = rule or ("cell" if s < 1 else "midpoint")
    grid = f.grid
    val = _gagliardo_p(f.values, grid, s, p, rule) ** (1 / p)
    if not with_budget:
        return val
    quad = 0.0
    flags: list[str] = [f"rule_{rule}"]
    if min(grid.extents) >= 8:
        sub = grid.subsampled()
        if f.is_indicator:
            coarse_vals = rasterize(f.shape, sub).values
        else:
            coarse_vals = f.values[tuple(slice(0, None, 2) for _ in range(grid.n))]
        coarse = _gagliardo_p(coarse_vals, sub, s, p, rule) ** (1 / p)
        order = max(1.0 - s, 0.25)
        quad = abs(val - coarse) / (2**order - 1)
    return val, ErrorBudget(0.0, 0.0, quad, tuple(flags))


# --------------------------------------------------------------------------
# perimeters


def _interval_pair(a, b, c, d, alpha: float):
    """int_a^b int_c^d |x - y|^(-1-alpha) dy dx for intervals with b <= c (arrays allowed).

    Second differences of G(t) = -t^(1-alpha)/(alpha(1-alpha)); the two
    terms that grow with an infinite endpoint cancel in pairs.
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))

    def G(t):
        return -np.abs(t) ** (1 - alpha) / (alpha * (1 - alpha))

    with np.errstate(invalid="ignore"):
        left_inf = np.isinf(a)
        right_inf = np.isinf(d)
        out = np.where(
            left_inf & right_inf,
            np.inf,
            np.where(
                right_inf,
                G(c - b) - G(c - a),
                np.where(left_inf, G(c - b) - G(d - b), G(d - a) - G(d - b) - G(c - a) + G(c - b)),
            ),
        )
    return float(out) if out.ndim == 0 else out


def _perimeter_1d_exact(E: ShapeSet, alpha: float, Omega: BoundedRegion | None) -> float:
    ivs = E.intervals1d()
    cuts = sorted({v for iv in ivs for v in iv if math.isfinite(v)})
    if Omega is not None:
        lo, hi = Omega.bounds()
        cuts = sorted(set(cuts) | {float(lo[0]), float(hi[0])})
    if not cuts:
        return 0.0
    edges = [-math.inf] + cuts + [math.inf]
    pieces = [(p, q) for p, q in zip(edges[:-1], edges[1:]) if q > p]

    def label(piece):
        mid = piece[0] + 1.0 if math.isinf(piece[1]) else (piece[1] - 1.0 if math.isinf(piece[0]) else 0.5 * sum(piece))
        inE = bool(E.contains(np.array([mid]))[0])
        inO = True if Omega is None else bool(Omega.contains(np.array([[mid]]))[0])
        return inE, inO

    labels = [label(pc) for pc in pieces]
    total = 0.0
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            (ei, oi), (ej, oj) = labels[i], labels[j]
            if ei != ej and (oi or oj):
                total += 2 * _interval_pair(*pieces[i], *pieces[j], alpha)
    return total


def ball_perimeter_2d(alpha: float, radius: float = 1.0) -> C.Estimate:
    """P_alpha of a disk by quadrature of (2/alpha) int_E int_theta d(x,theta)^(-alpha).

    d(x, theta) is the distance from x to the circle along direction theta;
    by rotation invariance x = (r, 0).
    """
    alpha = C.check_order(alpha, 0.0, 1.0)

    def ring(r):
        def dist(t):
            c = math.cos(t)
            return -r * c + math.sqrt(max(1 - r * r * (1 - c * c), 0.0))

        v, _ = integrate.quad(lambda t: dist(t) ** (-alpha), 0, math.pi, limit=200, epsabs=1e-13, epsrel=1e-12)
        return 2 * v * 2 * math.pi * r

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # the radial integrand behaves like (1 - r)^(1/2 - alpha) near r = 1
        a1, e1 = integrate.quad(ring, 0, 0.5, limit=200, epsabs=1e-12, epsrel=1e-11)
        a2, e2 = integrate.quad(ring, 0.5, 1.0, limit=400, epsabs=1e-12, epsrel=1e-11)
    scale = 2 / alpha * radius ** (2 - alpha)
    return C.Estimate(scale * (a1 + a2), scale * (e1 + e2))


def _graded_rule(lo: float, hi: float, alpha: float, order: int = 48) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [lo, hi] graded toward both ends for integrands ~ dist^(-alpha)."""
    k = 1.0 / (1.0 - alpha)
    t, w = np.polynomial.legendre.leggauss(order)
    u, wu = 0.5 * (t + 1), 0.5 * w
    half = 0.5 * (hi - lo)
    d = half * u**k
    wd = half * k * u ** (k - 1) * wu
    return np.concatenate([lo + d, hi - d]), np.concatenate([wd, wd])


def box_perimeter_2d(alpha: float, lo, hi, order: int = 48) -> C.Estimate:
    """P_alpha of an axis-aligned rectangle from (2/alpha) int_E int_theta d(x, theta)^(-alpha).

    The angular integral is exact edge by edge (d theta = a dt/(a^2+t^2) on
    an edge at distance a); the area integral uses a tensor rule graded
    toward the edges.  The error is estimated from the rule at half order.
    """
    from .operators import _segment_power

    alpha = C.check_order(alpha, 0.0, 1.0)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def value(m: int) -> float:
        x, wx = _graded_rule(lo[0], hi[0], alpha, m)
        y, wy = _graded_rule(lo[1], hi[1], alpha, m)
        X, Y = np.meshgrid(x, y, indexing="ij")
        ang = np.zeros(X.shape)
        for a, t0, t1 in (
            (X - lo[0], lo[1] - Y, hi[1] - Y),
            (hi[0] - X, lo[1] - Y, hi[1] - Y),
            (Y - lo[1], lo[0] - X, hi[0] - X),
            (hi[1] - Y, lo[0] - X, hi[0] - X),
        ):
            ang += a * _segment_power(a, t0, t1, 2 + alpha)
        return 2 / alpha * float(wx @ ang @ wy)

    fine = value(order)
    return C.Estimate(fine, abs(fine - value(order // 2)))


def _perimeter_grid(E: ShapeSet, alpha: float, grid: GridSpec, Omega: BoundedRegion | None) -> float:
    chi = rasterize(E, grid).values
    P = K.pair_weights(grid.n, alpha, grid.h, grid.extents, "cell")
    inO = grid.region_mask(Omega).astype(float) if Omega is not None else np.ones(grid.extents)

    def half(weights_j: np.ndarray) -> float:
        # sum_{i in Omega} sum_j weights_j P_{j-i} |chi_i - chi_j|
        Pw = K.convolve_kernel(weights_j, P)
        Pwc = K.convolve_kernel(weights_j * chi, P)
        return float(np.sum(inO * (chi * Pw + Pwc - 2 * chi * Pwc)))

    ones = np.ones(grid.extents)
    # weight 2 for partners outside Omega, 1 inside
    inside = 2 * half(ones) - half(inO)
    if not E.bounded or np.any(E.bbox()[0] < grid.lo - 1e-12) or np.any(E.bbox()[1] > grid.hi + 1e-12):
        outside = _outside_shape_term(E, grid, alpha)
    else:
        outside = chi * _outside_power(grid, alpha)
    return inside + 2 * float(np.sum(inO * outside))


def _outside_shape_term(E: ShapeSet, grid: GridSpec, alpha: float) -> np.ndarray:
    """Per cell: h^n int_{y outside grid} |chi_E(x) - chi_E(y)| |x - y|^(-n-alpha) dy."""
    if grid.n == 1:
        # exact per cell: cell x (part of the exterior where chi differs)
        x = grid.points()
        e0, e1 = x - 0.5 * grid.h, x + 0.5 * grid.h
        L, R = grid.lo[0], grid.hi[0]
        inside = E.contains(x)
        ivs = E.intervals1d()
        acc = np.zeros_like(x)
        for side_lo, side_hi in ((-math.inf, L), (R, math.inf)):
            pieces_in = [(max(a, side_lo), min(b, side_hi)) for a, b in ivs if min(b, side_hi) > max(a, side_lo)]
            # complement of E within this exterior side
            pieces_out = []
            cur = side_lo
            for a, b in pieces_in:
                if a > cur:
                    pieces_out.append((cur, a))
                cur = b
            if cur < side_hi:
                pieces_out.append((cur, side_hi))
            right = side_lo >= R
            for pcs, use in ((pieces_in, ~inside), (pieces_out, inside)):
                for lo, hi in pcs:
                    val = _interval_pair(e0, e1, lo, hi, alpha) if right else _interval_pair(lo, hi, e0, e1, alpha)
                    acc += np.where(use, val, 0.0)
        return acc
    th, w = _ray_rule()
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    pts = grid.points().reshape(-1, 2)
    s = box_exit_distance(pts[:, None, :], e[None, :, :], grid.lo, grid.hi)
    t1, t2 = E.ray_segment(pts[:, None, :], e[None, :, :])
    start = np.maximum(s, t1)
    with np.errstate(divide="ignore"):
        seg = np.where(t2 > start, (start ** (-alpha) - np.where(np.isinf(t2), 0.0, t2 ** (-alpha))) / alpha, 0.0)
    full = s ** (-alpha) / alpha
    inside = E.contains(pts)[:, None]
    vals = np.sum(w[None, :] * np.where(inside, full - seg, seg), axis=1)
    return grid.cell_volume * vals.reshape(grid.extents)


def default_perimeter_grid(E: ShapeSet, h: float, Omega: BoundedRegion | None = None) -> GridSpec:
    """Grid covering Omega (or the shape's bounding box) with cell edges on integer multiples of h."""
    if Omega is not None:
        lo, hi = Omega.bounds()
    elif E.bounded:
        lo, hi = E.bbox()
    else:
        raise ValueError("an unbounded shape needs a bounded region Omega")
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if Omega is None:
        # a margin keeps the exterior term away from the set's boundary
        pad = 0.25 * float(np.max(hi - lo))
        lo, hi = lo - pad, hi + pad
    lo = np.floor(lo / h - 1e-9) * h
    hi = np.ceil(hi / h + 1e-9) * h
    return GridSpec.covering(lo, hi, h)


def frac_perimeter(
    E: ShapeSet,
    alpha: float,
    Omega: BoundedRegion | None = None,
    method: str = "auto",
    h: float | None = None,
    grid: GridSpec | None = None,
) -> float:
    """P_alpha(E; Omega): Omega x Omega interactions plus twice Omega x Omega^c.

    ``method='exact'`` uses closed forms (unions of intervals) or adaptive
    quadrature (disks and rectangles with Omega = R^n); ``'grid'`` sums
    exact cell-pair weights on a grid and integrates everything outside the
    grid analytically.  ``'auto'`` prefers ``exact`` where available.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    if E.empty:
        return 0.0
    if method == "auto":
        method = "exact" if (E.n == 1 or (Omega is None and E.kind in ("ball", "box"))) else "grid"
    if method == "exact":
        if E.n == 1:
            return _perimeter_1d_exact(E, alpha, Omega)
        if Omega is not None:
            raise ValueError("relative perimeters in 2-D use method='grid'")
        if E.kind == "ball":
            return ball_perimeter_2d(alpha, E.radius).value
        if E.kind == "box":
            return box_perimeter_2d(alpha, E.lo, E.hi).value
        if E.kind == "half_space":
            return math.inf
        raise ValueError(f"no closed form for {E.kind}")
    if method != "grid":
        raise ValueError(f"unknown perimeter method {method!r}")
    if grid is None:
        if h is None:
            raise ValueError("the grid method needs h or a grid")
        grid = default_perimeter_grid(E, h, Omega)
    return _perimeter_grid(E, alpha, grid, Omega)


# --------------------------------------------------------------------------
# fractional variation


def _gradient_density(f: ScalarField, alpha: float, mask: np.ndarray | None = None) -> np.ndarray:
    """Adjoint-of-divergence samples; indicators also get the part of the set beyond the grid.

    With ``mask`` the exterior part is only evaluated on the masked samples.
    """
    g = adjoint_divergence(f, alpha).values
    if f.is_indicator and f.shape is not None:
        lo, hi = f.shape.bbox()
        if np.any(lo < f.grid.lo - 1e-12) or np.any(hi > f.grid.hi + 1e-12):
            g = g + exterior_correction(f.shape, f.grid, alpha, mask)
    return g


def _outside_variation_1d(f: ScalarField, alpha: float) -> tuple[float, float]:
    """Mass of |grad^alpha f| beyond the grid: (value, uncertainty).

    Exact when f does not change sign; otherwise the triangle-inequality
    bound is returned and the gap to the signed mass is the uncertainty.
    """
    grid = f.grid
    mu = C.mu(1, alpha)
    L, R = grid.lo[0], grid.hi[0]
    e = grid.origin[0] + np.arange(grid.extents[0] + 1) * grid.h - 0.5 * grid.h
    e[0], e[-1] = L, R
    c = 1 / (alpha * (1 - alpha))
    # int_{x > R} int_{cell} (x - y)^(-1-alpha) dy dx per cell
    right = c * ((R - e[:-1]) ** (1 - alpha) - (R - e[1:]) ** (1 - alpha))
    left = c * ((e[1:] - L) ** (1 - alpha) - (e[:-1] - L) ** (1 - alpha))
    v = f.values
    signed = abs(float(np.sum(v * right))) + abs(float(np.sum(v * left)))
    bound = float(np.sum(np.abs(v) * (right + left)))
    return mu * bound, mu * max(bound - signed, 0.0)


def _block_masses(f: ScalarField, blocks: int) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate f into at most blocks x blocks super-cells: (centres (M, 2), masses (M,))."""
    grid = f.grid
    v = f.values * grid.cell_volume
    pts = grid.points()
    b = max(1, math.ceil(max(grid.extents) / blocks))
    Nx, Ny = grid.extents
    px, py = (-Nx) % b, (-Ny) % b
    vp = np.pad(v, ((0, px), (0, py)))
    xp = np.pad(pts, ((0, px), (0, py), (0, 0)), mode="edge")
    sh = (vp.shape[0] // b, b, vp.shape[1] // b, b)
    mass = vp.reshape(sh).sum(axis=(1, 3))
    cx = xp[..., 0].reshape(sh).mean(axis=(1, 3))
    cy = xp[..., 1].reshape(sh).mean(axis=(1, 3))
    keep = mass != 0
    return np.stack([cx[keep], cy[keep]], axis=-1), mass[keep]


def _far_mass(centres: np.ndarray, masses: np.ndarray, grid: GridSpec, alpha: float, order: int = 24) -> float:
    mu = C.mu(2, alpha)
    x0 = 0.5 * (grid.lo + grid.hi)
    th, w = _ray_rule(256)
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    d = box_exit_distance(np.broadcast_to(x0, e.shape), e, grid.lo, grid.hi)
    t, wt = np.polynomial.legendre.leggauss(order)
    u, wu = 0.5 * (t + 1), 0.5 * wt
    total = 0.0
    for ei, di, wi in zip(e, d, w):
        # rho = d u^(-1/alpha) turns int_d^inf rho^(-1-alpha) d rho into a constant integrand
        rho = di * u ** (-1 / alpha)
        jac = di / alpha * u ** (-1 / alpha - 1)
        xs = x0 + rho[:, None] * ei[None, :]
        diff = centres[None, :, :] - xs[:, None, :]
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        g = mu * np.einsum("k,qkc->qc", masses, diff * r[..., None] ** (-3 - alpha))
        total += wi * float(np.sum(wu * np.linalg.norm(g, axis=1) * rho * jac))
    return total


def _outside_variation_2d(f: ScalarField, alpha: float) -> tuple[float, float]:
    """Mass of |grad^alpha f| beyond the grid from block-aggregated far-field sums.

    The uncertainty is the change when the aggregation is coarsened by two.
    """
    if not np.any(f.values):
        return 0.0, 0.0
    fine = _far_mass(*_block_masses(f, 32), f.grid, alpha)
    coarse = _far_mass(*_block_masses(f, 16), f.grid, alpha)
    return fine, abs(fine - coarse)


def frac_variation(
    f: ScalarField,
    alpha: float,
    Omega: BoundedRegion | None = None,
    method: str = "adjoint_l1",
    return_witness: bool = False,
) -> VariationReport:
    """|D^alpha f|(Omega) as the L^1(Omega) norm of the discrete adjoint.

    ``pairing_sup`` evaluates the same supremum explicitly by pairing f with
    the maximiser phi* = -sgn(adjoint) on Omega (audit path).  ``oracle``
    integrates the closed-form gradient of a one-dimensional interval union.
    With Omega = None (all of R^n) the mass beyond the grid is added: exactly
    in 1-D for single-signed f, by a far-field estimate in 2-D.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    grid = f.grid
    if method == "oracle":
        if not (f.is_indicator and f.shape.n == 1):
            raise ValueError("the oracle method needs the indicator of a 1-D interval union")
        ivs = f.shape.intervals1d()
        if Omega is not None:
            raise ValueError("the oracle method computes the total variation over R")
        val = oracles.interval_union_gradient_l1(ivs, alpha)
        return VariationReport(val, None, "oracle", ErrorBudget(0.0, 0.0, 1e-10 * val, ("closed_form",)))
    g = _gradient_density(f, alpha)
    mask = grid.region_mask(Omega) if Omega is not None else np.ones(grid.extents, dtype=bool)
    if Omega is not None:
        lo, hi = Omega.bounds()
        if np.any(lo < grid.lo - 1e-12) or np.any(hi > grid.hi + 1e-12):
            raise ResolutionError("the region Omega is clipped by the grid")
    mag = np.sqrt(np.sum(g * g, axis=0))
    flags: list[str] = []
    witness = None
    if method == "adjoint_l1":
        value = grid.cell_volume * float(np.sum(mag[mask]))
    else:
        safe = np.where(mag > 0, mag, 1.0)
        phi = np.where(mask[None] & (mag[None] > 0), -g / safe[None], 0.0)
        witness = VectorField(grid, phi, None, None, {"operator": "variation_maximiser", "alpha": alpha})
        # int f div phi computed with the transposed stencil equals -sum g . phi
        div = frac_divergence(witness, alpha, Backend("direct", estimate_quadrature=False), allow_tail=True)
        value = grid.cell_volume * float(np.sum(f.values * div.values))
        if f.is_indicator and f.shape is not None and not np.allclose(g, adjoint_divergence(f, alpha).values):
            # the part of the set beyond the grid pairs through the exterior term
            ext = exterior_correction(f.shape, grid, alpha)
            value -= grid.cell_volume * float(np.sum(ext * phi))
        value = max(value, 0.0)
    tail = unc = 0.0
    if Omega is None:
        if f.is_indicator and f.shape is not None and not f.shape.bounded:
            raise ValueError("the variation of an unbounded set over R^n is infinite; pass a region")
        tail, unc = (_outside_variation_1d if grid.n == 1 else _outside_variation_2d)(f, alpha)
        value += tail
        flags.append("outside_grid_mass")
    quad = 0.0
    if min(grid.extents) >= 8:
        sub = grid.subsampled()
        fs = rasterize(f.shape, sub) if f.is_indicator else ScalarField(
            sub, f.values[tuple(slice(0, None, 2) for _ in range(grid.n))]
        )
        gs = _gradient_density(fs, alpha)
        ms = sub.region_mask(Omega) if Omega is not None else np.ones(sub.extents, dtype=bool)
        coarse = sub.cell_volume * float(np.sum(np.sqrt(np.sum(gs * gs, axis=0))[ms]))
        if Omega is None:
            coarse += (_outside_variation_1d if grid.n == 1 else _outside_variation_2d)(fs, alpha)[0]
        order = 1.0 - alpha if f.is_indicator else 1.0
        quad = abs(value - coarse) / (2**order - 1)
    budget = ErrorBudget(0.0, unc, quad, tuple(flags))
    return VariationReport(float(value), Omega, method, budget, witness if return_witness else None)


def pair_with_field(f: ScalarField, phi: VectorField, alpha: float) -> float:
    """h^n sum f div^alpha_h phi with the direct stencil."""
    if f.grid != phi.grid:
        raise ValueError("f and phi must share a grid")
    div = frac_divergence(phi, alpha, Backend("direct", estimate_quadrature=False), allow_tail=True)
    return f.grid.cell_volume * float(np.sum(f.values * div.values))


def variation_on_region(f: ScalarField, alpha: float, B: BoundedRegion) -> VectorMeasureSample:
    """(D^alpha f(B), |D^alpha f|(B)) from the adjoint density on the cells of B."""
    grid = f.grid
    lo, hi = B.bounds()
    if np.any(lo < grid.lo - 1e-12) or np.any(hi > grid.hi + 1e-12):
        raise ResolutionError("the region is clipped by the grid")
    mask = grid.region_mask(B)
    g = _gradient_density(f, alpha, mask)
    vec = grid.cell_volume * g[:, mask].sum(axis=1)
    total = grid.cell_volume * float(np.sqrt(np.sum(g * g, axis=0))[mask].sum())
    return VectorMeasureSample(B, tuple(float(v) for v in vec), total)


# --------------------------------------------------------------------------
# coarea


@dataclass(frozen=True)
class CoareaResult:
    accumulated: VectorField
    level_total: float
    variation: float
    levels: tuple[float, ...]
    skipped: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "level_total": self.level_total,
            "variation": self.variation,
            "levels": len(self.levels),
            "skipped": list(self.skipped),
        }


def coarea_integral(f: ScalarField, alpha: float, levels: int | np.ndarray = 64, region: BoundedRegion | None = None) -> CoareaResult:
    """Trapezoid accumulation over t of D^alpha chi_{f > t}, plus int |D^alpha chi_{f>t}| dt.

    Levels are uniform on [min(f, 0), max f] unless given explicitly; level
    sets covering fewer than 4 cells are skipped with a warning.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    grid = f.grid
    v = f.values
    if isinstance(levels, (int, np.integer)):
        ts = np.linspace(min(float(v.min()), 0.0), max(float(v.max()), 0.0), int(levels))
    else:
        ts = np.asarray(levels, dtype=float)
    if ts.size < 2:
        raise ValueError("at least two levels are required")
    w = np.zeros(ts.size)
    dt = np.diff(ts)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    mask = grid.region_mask(region) if region is not None else np.ones(grid.extents, dtype=bool)
    acc = np.zeros((grid.n,) + grid.extents)
    level_total = 0.0
    skipped = []
    W = K.direct_stencil(grid.n, alpha, grid.h, grid.extents)
    for t, wt in zip(ts, w):
        # {f > t} for t >= 0 and the complement of {f <= t} shifted by a constant for t < 0:
        # D^alpha of a constant vanishes, so chi_{f>t} - 1 = -chi_{f<=t} carries the same gradient
        chi = (v > t).astype(float) if t >= 0 else -(v <= t).astype(float)
        count = int(np.count_nonzero(chi))
        if count == 0:
            continue
        if count < 4:
            skipped.append(float(t))
            warnings.warn(f"level set at t={t:.4g} spans fewer than 4 cells; skipped", stacklevel=2)
            continue
        g = np.stack([K.correlate(chi, Wc) for Wc in W])
        acc += wt * g
        level_total += wt * grid.cell_volume * float(np.sqrt(np.sum(g * g, axis=0))[mask].sum())
    variation = grid.cell_volume * float(np.sqrt(np.sum(acc * acc, axis=0))[mask].sum())
    field_ = VectorField(grid, acc, None, None, {"operator": "coarea_integral", "alpha": alpha, "levels": int(ts.size)})
    return CoareaResult(field_, level_total, variation, tuple(float(t) for t in ts), tuple(skipped))


# --------------------------------------------------------------------------
# gradients of sets through their classical boundary measure


def _line_power(a: np.ndarray, t0: np.ndarray, t1: np.ndarray, q: float) -> np.ndarray:
    from .operators import _segment_power

    return _segment_power(a, t0, t1, q)


def bv_measure_gradient(obj, alpha: float, where) -> np.ndarray | VectorField:
    """grad^alpha via mu/(n+alpha-1) int |y - x|^(1-n-alpha) dDf(y).

    ``obj`` is a ShapeSet (Df is the inner normal times surface measure) or
    a ramp AnalyticFn (Df is a bounded density on the annulus).  ``where``
    is a GridSpec (returns a VectorField) or an array of points (..., n)
    (returns (n, ...)).  Points on the boundary are rejected.
    """
    from .fields import AnalyticFn

    alpha = C.check_order(alpha, 0.0, 1.0)
    grid = where if isinstance(where, GridSpec) else None
    n = obj.n
    if grid is not None:
        pts = grid.points()
        pts = pts[..., None] if n == 1 else pts
    else:
        pts = np.asarray(where, dtype=float)
        pts = pts[..., None] if (n == 1 and (pts.ndim == 0 or pts.shape[-1] != 1)) else pts
    flat = pts.reshape(-1, n)
    if isinstance(obj, AnalyticFn):
        if obj.kind != "ramp_annulus":
            raise ValueError("only the ramp has a closed-form gradient measure")
        p = obj.p
        vals = np.stack([oracles.ramp_gradient(p["eps"], p["r"], p["center"], alpha, y) for y in flat], axis=1)
    elif isinstance(obj, ShapeSet):
        vals = _shape_boundary_gradient(obj, alpha, flat)
    else:
        raise TypeError("expected a ShapeSet or a ramp AnalyticFn")
    vals = vals.reshape((n,) + pts.shape[:-1])
    if grid is not None:
        return VectorField(grid, vals, None, None, {"operator": "bv_measure_gradient", "alpha": alpha})
    return vals


def _shape_boundary_gradient(E: ShapeSet, alpha: float, pts: np.ndarray) -> np.ndarray:
    n = E.n
    mu = C.mu(n, alpha)
    q = n + alpha - 1
    if n == 1:
        x = pts[:, 0]
        acc = np.zeros_like(x)
        for a, b in E.intervals1d():
            for end, sign in ((a, 1.0), (b, -1.0)):
                if math.isfinite(end):
                    d = np.abs(x - end)
                    if np.any(d == 0):
                        raise ValueError("evaluation point on the boundary")
                    acc += sign * d ** (-alpha)
        return (mu / alpha * acc)[None]
    out = np.zeros((2, pts.shape[0]))
    if E.kind == "half_space":
        nrm = np.asarray(E.normal)
        dist = np.abs(pts @ nrm - E.offset)
        if np.any(dist == 0):
            raise ValueError("evaluation point on the boundary")
        line = math.sqrt(math.pi) * C.gamma(alpha / 2) / C.gamma((1 + alpha) / 2) * dist ** (-alpha)
        return mu / q * line[None, :] * nrm[:, None]
    if E.kind == "box":
        lo, hi = np.asarray(E.lo), np.asarray(E.hi)
        # each edge: inner normal times int over the edge of |y - x|^(-q)
        for axis in range(2):
            other = 1 - axis
            for plane, sign in ((lo[axis], 1.0), (hi[axis], -1.0)):
                a = pts[:, axis] - plane
                t0 = lo[other] - pts[:, other]
                t1 = hi[other] - pts[:, other]
                if np.any((a == 0) & (t0 <= 0) & (t1 >= 0)):
                    raise ValueError("evaluation point on the boundary")
                out[axis] += sign * _line_power(a, t0, t1, q)
        return mu / q * out
    if E.kind == "ball":
        c = np.asarray(E.center)
        R = E.radius
        d = np.linalg.norm(pts - c, axis=1)
        gap = np.abs(d - R)
        if np.any(gap == 0):
            raise ValueError("evaluation point on the boundary")
        # periodic trapezoid: spectrally accurate once the node spacing is below the gap
        M = int(min(1 << 16, max(512, math.ceil(40 * R / max(float(gap.min()), 1e-12)))))
        th = 2 * np.pi * np.arange(M) / M
        e = np.stack([np.cos(th), np.sin(th)])
        for start in range(0, pts.shape[0], 256):
            sl = slice(start, start + 256)
            y = c[:, None, None] + R * e[:, None, :]
            diff = y - pts[sl].T[:, :, None]
            r = np.sqrt(np.sum(diff * diff, axis=0))
            kern = r ** (-q) * (R * 2 * np.pi / M)
            out[:, sl] = -np.einsum("cm,pm->cp", e, kern)
        return mu / q * out
    raise ValueError(f"no boundary parametrisation for {E.kind}")
