"""Fractional gradient, divergence, Laplacian and Riesz potential on grids.

Three backends evaluate the gradient and divergence:

``direct``
    Stencil obtained by summation by parts of the staggered-difference
    Riesz form with exact cell integrals of the kernel.  It is exactly
    antisymmetric, so the divergence is the negative transpose of the
    gradient, and on indicators of cell-aligned intervals it returns exact
    cell averages.
``riesz``
    Central-difference gradient convolved with exact cell integrals of
    ``|z|^(1-n-alpha)``.
``fft``
    The same convolution with a point-sampled kernel whose origin cell is
    replaced by the integral over the ball of equal volume.

Every output carries an :class:`ErrorBudget`.  Indicator fields (rasterized
shapes) are always evaluated with ``direct`` since their distributional
gradient has no grid representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _backend
from . import constants as C
from . import kernels as K
from .fields import ErrorBudget, GridSpec, ResolutionError, ScalarField, VectorField
from .geometry import ShapeSet, box_exit_distance

BACKENDS = ("direct", "riesz", "fft")
RAY_COUNT = 512


@dataclass(frozen=True)
class Backend:
    kind: str = "direct"
    R: float | None = None
    eps: float | None = None
    estimate_quadrature: bool = True

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ValueError(f"unknown backend {self.kind!r}; choose from {', '.join(BACKENDS)}")

    def inner_radius(self, h: float) -> float:
        eps = h / 2 if self.eps is None else self.eps
        if not h / 2 - 1e-15 <= eps <= 4 * h + 1e-15:
            raise ValueError(f"inner exclusion {eps:g} outside [h/2, 4h] = [{h / 2:g}, {4 * h:g}]")
        return eps

    def to_dict(self) -> dict:
        return {"kind": self.kind, "R": self.R, "eps": self.eps}


DIRECT = Backend("direct")


def _check_alpha(alpha: float) -> float:
    return C.check_order(alpha, 0.0, 1.0)


def _boundary_max(values: np.ndarray) -> float:
    """Max |value| over the outermost layer of cells."""
    a = np.abs(values)
    if a.ndim == 1:
        return float(max(a[0], a[-1]))
    return float(max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max()))


def check_support(values: np.ndarray, what: str = "field", tol: float = 1e-8) -> float:
    """Raise if the data does not decay before the grid boundary; return the boundary level."""
    top = float(np.max(np.abs(values))) if values.size else 0.0
    edge = _boundary_max(values)
    if top > 0 and edge > tol * top:
        raise ResolutionError(
            f"{what} support touches the grid boundary: boundary level {edge:.3g} exceeds {tol:g} x max {top:.3g}; enlarge the grid"
        )
    return edge


def _tail_term(n: int, alpha: float, sup_boundary: float, R: float) -> float:
    # contribution of |z| > R bounded by 2 mu ||f||_inf n w_n R^-alpha / alpha,
    # applied to the part of f that the grid cannot see
    return 2 * C.mu(n, alpha) * sup_boundary * n * C.omega(n) * R ** (-alpha) / alpha


def _jump_tail(grid: GridSpec, alpha: float, edge: float) -> float:
    """Effect, on the inner half of the grid, of cutting a slowly decaying input at the boundary.

    Zero extension creates a jump of size <= edge on the boundary; through the
    Riesz form it contributes mu/(n+alpha-1) edge |bd| (R/2)^(1-n-alpha), and the
    discarded far field at most as much again.
    """
    n = grid.n
    R = _half_width(grid)
    boundary = 2.0 if n == 1 else 8 * R
    return 2 * C.mu(n, alpha) / (n + alpha - 1) * edge * boundary * (R / 2) ** (1 - n - alpha)


def _half_width(grid: GridSpec) -> float:
    return 0.5 * grid.h * min(grid.extents)


def discrete_lipschitz(values: np.ndarray, h: float) -> float:
    v = np.asarray(values)
    if v.ndim == 1:
        return float(np.max(np.abs(np.diff(v)))) / h if v.size > 1 else 0.0
    return float(max(np.max(np.abs(np.diff(v, axis=0))), np.max(np.abs(np.diff(v, axis=1))))) / h


def _inner_term(n: int, alpha: float, lip: float, eps: float) -> float:
    return C.mu(n, alpha) * lip * n * C.omega(n) * eps ** (1 - alpha) / (1 - alpha)


def central_gradient(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order central differences with zero extension outside the grid."""
    v = np.asarray(values, dtype=float)
    pad = np.pad(v, 1)
    if v.ndim == 1:
        return ((pad[2:] - pad[:-2]) / (2 * h))[None]
    gx = (pad[2:, 1:-1] - pad[:-2, 1:-1]) / (2 * h)
    gy = (pad[1:-1, 2:] - pad[1:-1, :-2]) / (2 * h)
    return np.stack([gx, gy])


def central_divergence(values: np.ndarray, h: float) -> np.ndarray:
    return sum(central_gradient(values[c], h)[c] for c in range(values.shape[0]))


# --------------------------------------------------------------------------
# exterior contributions


def outside_vector_integral(grid: GridSpec, alpha: float, mask: np.ndarray | None = None) -> np.ndarray:
    """mu int over the complement of the grid box of (y - x)/|y - x|^(n+alpha+1) dy.

    Returned with shape (n, *extents); entries outside ``mask`` are zero.
    """
    n = grid.n
    mu = C.mu(n, alpha)
    out = np.zeros((n,) + grid.extents)
    if n == 1:
        x = grid.points()
        lo, hi = grid.lo[0], grid.hi[0]
        out[0] = mu * ((hi - x) ** (-alpha) - (x - lo) ** (-alpha)) / alpha
        return out
    pts = grid.points()
    sel = np.ones(grid.extents, dtype=bool) if mask is None else mask
    xs = pts[sel]
    th, w = _ray_rule()
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    s = box_exit_distance(xs[:, None, :], e[None, :, :], grid.lo, grid.hi)
    val = s ** (-alpha) / alpha * w[None, :]
    for c in range(2):
        out[c][sel] = mu * np.sum(val * e[None, :, c], axis=1)
    return out


def _ray_rule(count: int = RAY_COUNT) -> tuple[np.ndarray, np.ndarray]:
    # composite Gauss-Legendre over [0, 2 pi): 64 panels of `count/64` nodes
    panels = 64
    per = max(count // panels, 2)
    t, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(0, 2 * np.pi, panels + 1)
    half = (edges[1] - edges[0]) / 2
    th = (edges[:-1, None] + half * (t[None, :] + 1)).ravel()
    ww = np.tile(w * half, panels)
    return th, ww


def exterior_correction(shape: ShapeSet, grid: GridSpec, alpha: float, mask: np.ndarray | None = None) -> np.ndarray:
    """Gradient contribution of the part of the shape outside the grid box.

    mu int_{E minus box} (y - x)/|y - x|^(n+alpha+1) dy at the grid samples;
    exact in 1-D, ray quadrature in 2-D (library shapes are convex there).
    """
    n = grid.n
    mu = C.mu(n, alpha)
    out = np.zeros((n,) + grid.extents)
    lo, hi = grid.lo, grid.hi
    if n == 1:
        x = grid.points()
        acc = np.zeros_like(x)
        for a, b in shape.intervals1d():
            # right of the box
            p, q = max(a, hi[0]), b
            if q > p:
                acc += ((p - x) ** (-alpha) - (q - x if math.isfinite(q) else np.inf) ** (-alpha)) / alpha
            # left of the box
            p, q = a, min(b, lo[0])
            if q > p:
                far = (x - p) if math.isfinite(p) else np.inf
                acc -= ((x - q) ** (-alpha) - far ** (-alpha)) / alpha
        out[0] = mu * acc
        return out
    if shape.bbox()[0][0] >= lo[0] and np.all(shape.bbox()[0] >= lo) and np.all(shape.bbox()[1] <= hi):
        return out
    pts = grid.points()
    sel = np.ones(grid.extents, dtype=bool) if mask is None else mask
    xs = pts[sel]
    th, w = _ray_rule()
    e = np.stack([np.cos(th), np.sin(th)], axis=-1)
    acc = np.zeros((xs.shape[0], 2))
    for start in range(0, xs.shape[0], 1024):
        chunk = xs[start : start + 1024]
        s = _exit_distance_2d(chunk, e, lo, hi)
        t1, t2 = shape.ray_segment(chunk[:, None, :], e[None, :, :])
        begin = np.maximum(s, t1)
        with np.errstate(divide="ignore"):
            far = np.where(np.isinf(t2), 0.0, t2 ** (-alpha))
            contrib = np.where(t2 > begin, (begin ** (-alpha) - far) / alpha, 0.0)
        acc[start : start + 1024] = (contrib * w[None, :]) @ e
    for c in range(2):
        out[c][sel] = mu * acc[:, c]
    return out


def _exit_distance_2d(xs: np.ndarray, e: np.ndarray, lo, hi) -> np.ndarray:
    """Distance from each point (P, 2) inside the box to its boundary along each direction (R, 2)."""
    out = None
    for c in range(2):
        ec = e[:, c]
        with np.errstate(divide="ignore"):
            inv = np.where(ec != 0, 1.0 / np.where(ec != 0, ec, 1.0), np.inf)
        wall = np.where(ec > 0, 1.0, 0.0)
        gap_hi = (hi[c] - xs[:, c])[:, None]
        gap_lo = (lo[c] - xs[:, c])[:, None]
        t = (gap_hi * wall[None, :] + gap_lo * (1 - wall)[None, :]) * inv[None, :]
        t = np.where(ec[None, :] == 0, np.inf, t)
        out = t if out is None else np.minimum(out, t)
    return out


def _needs_exterior(shape: ShapeSet, grid: GridSpec) -> bool:
    lo, hi = shape.bbox()
    return bool(np.any(lo < grid.lo - 1e-12) or np.any(hi > grid.hi + 1e-12))


# --------------------------------------------------------------------------
# gradient and divergence


def _direct_gradient_values(values: np.ndarray, grid: GridSpec, alpha: float) -> np.ndarray:
    W = K.direct_stencil(grid.n, alpha, grid.h, grid.extents)
    return np.stack([K.correlate(values, Wc) for Wc in W])


def _riesz_gradient_values(values: np.ndarray, grid: GridSpec, alpha: float, kind: str) -> np.ndarray:
    n = grid.n
    s = n + alpha - 1
    ker = K.cell_kernel(n, s, grid.h, grid.extents) if kind == "riesz" else K.sampled_kernel(n, s, grid.h, grid.extents)
    pref = C.mu(n, alpha) / (n + alpha - 1)
    grad = central_gradient(values, grid.h)
    return np.stack([pref * K.convolve_kernel(gc, ker) for gc in grad])


def _gradient_values(values: np.ndarray, grid: GridSpec, alpha: float, kind: str) -> np.ndarray:
    if kind == "direct":
        return _direct_gradient_values(values, grid, alpha)
    return _riesz_gradient_values(values, grid, alpha, kind)


def _subsample(values: np.ndarray) -> np.ndarray:
    sl = tuple(slice(0, None, 2) for _ in range(values.ndim))
    return values[sl]


def _richardson(fine: np.ndarray, coarse: np.ndarray) -> float:
    """max |fine - coarse| over coincident samples of a vector field (component axis 0)."""
    sub = np.stack([_subsample(fc) for fc in fine])
    return float(np.max(np.abs(sub - coarse))) if sub.size else 0.0


def frac_gradient(f: ScalarField, alpha: float, backend: Backend = DIRECT, allow_tail: bool = False) -> VectorField:
    """Samples of the fractional gradient with an error budget.

    Inputs that have not decayed at the grid boundary are rejected unless
    ``allow_tail`` is set, in which case the truncation enters the tail term
    (valid on the inner half of the grid).
    """
    alpha = _check_alpha(alpha)
    grid = f.grid
    eps = backend.inner_radius(grid.h)
    kind = backend.kind
    flags: list[str] = []
    if f.is_indicator:
        if kind != "direct":
            flags.append("indicator_rerouted_to_direct")
            kind = "direct"
        edge = 0.0
    else:
        edge = _boundary_max(f.values) if allow_tail else check_support(f.values, "input field")
    vals = _gradient_values(f.values, grid, alpha, kind)
    if f.is_indicator:
        if _needs_exterior(f.shape, grid):
            vals = vals + exterior_correction(f.shape, grid, alpha)
            flags.append("exterior_correction")
        inner = 0.0
        flags.append("indicator_cell_average")
    else:
        inner = _inner_term(grid.n, alpha, discrete_lipschitz(f.values, grid.h), eps)
    R = backend.R or _half_width(grid)
    tail = _tail_term(grid.n, alpha, edge, R) + (_jump_tail(grid, alpha, edge) if allow_tail else 0.0)
    quad = 0.0
    if backend.estimate_quadrature and not f.is_indicator and min(grid.extents) >= 8:
        coarse = _gradient_values(_subsample(f.values), grid.subsampled(), alpha, kind)
        quad = _richardson(vals, coarse)
    elif f.is_indicator:
        flags.append("quadrature_not_estimated")
    budget = ErrorBudget(inner, tail, quad, tuple(flags))
    prov = {"operator": "frac_gradient", "alpha": alpha, "backend": kind}
    return VectorField(grid, vals, f.support_hint, budget, prov)


def _direct_divergence_values(values: np.ndarray, grid: GridSpec, alpha: float) -> np.ndarray:
    W = K.direct_stencil(grid.n, alpha, grid.h, grid.extents)
    return sum(K.correlate(values[c], W[c]) for c in range(grid.n))


def _divergence_values(values: np.ndarray, grid: GridSpec, alpha: float, kind: str) -> np.ndarray:
    if kind == "direct":
        return _direct_divergence_values(values, grid, alpha)
    n = grid.n
    s = n + alpha - 1
    ker = K.cell_kernel(n, s, grid.h, grid.extents) if kind == "riesz" else K.sampled_kernel(n, s, grid.h, grid.extents)
    pref = C.mu(n, alpha) / (n + alpha - 1)
    return pref * K.convolve_kernel(central_divergence(values, grid.h), ker)


def frac_divergence(phi: VectorField, alpha: float, backend: Backend = DIRECT, allow_tail: bool = False) -> ScalarField:
    """Samples of the fractional divergence; ``allow_tail`` as in :func:`frac_gradient`."""
    alpha = _check_alpha(alpha)
    grid = phi.grid
    eps = backend.inner_radius(grid.h)
    mag = np.abs(phi.values).max(axis=0)
    edge = _boundary_max(mag) if allow_tail else check_support(mag, "input vector field")
    vals = _divergence_values(phi.values, grid, alpha, backend.kind)
    lip = max(discrete_lipschitz(phi.values[c], grid.h) for c in range(grid.n))
    inner = grid.n * _inner_term(grid.n, alpha, lip, eps)
    tail = grid.n * _tail_term(grid.n, alpha, edge, backend.R or _half_width(grid))
    if allow_tail:
        tail += _jump_tail(grid, alpha, edge)
    quad = 0.0
    if backend.estimate_quadrature and min(grid.extents) >= 8:
        sub = np.stack([_subsample(c) for c in phi.values])
        coarse = _divergence_values(sub, grid.subsampled(), alpha, backend.kind)
        quad = float(np.max(np.abs(_subsample(vals) - coarse)))
    budget = ErrorBudget(inner, tail, quad)
    prov = {"operator": "frac_divergence", "alpha": alpha, "backend": backend.kind}
    return ScalarField(grid, vals, phi.support_hint, budget, prov)


def adjoint_divergence(f: ScalarField, alpha: float, backend: Backend = DIRECT) -> VectorField:
    """The field g with h^n sum f div_h(phi) = -h^n sum g . phi for every grid phi.

    Assembled from the transposed direct weights: g_c = -sum_m W_c(-m) f_(j+m).
    """
    alpha = _check_alpha(alpha)
    if backend.kind != "direct":
        raise ValueError("the adjoint is assembled from the explicit direct weights; use backend 'direct'")
    grid = f.grid
    W = K.direct_stencil(grid.n, alpha, grid.h, grid.extents)
    flip = tuple(slice(None, None, -1) for _ in range(grid.n))
    vals = np.stack([K.correlate(f.values, -Wc[flip]) for Wc in W])
    prov = {"operator": "adjoint_divergence", "alpha": alpha, "backend": "direct"}
    return VectorField(grid, vals, f.support_hint, None, prov)


def apply_gradient_at(f: ScalarField, alpha: float, idx: np.ndarray) -> np.ndarray:
    """Direct-stencil gradient at selected sample indices, (len(idx), n), compiled loop."""
    grid = f.grid
    W = K.direct_stencil(grid.n, alpha, grid.h, grid.extents)
    idx = np.ascontiguousarray(idx, dtype=np.intp)
    v = np.ascontiguousarray(f.values)
    if grid.n == 1:
        return _backend.apply_at_1d(v, np.ascontiguousarray(W[0]), idx.ravel())[:, None]
    return np.stack([_backend.apply_at_2d(v, np.ascontiguousarray(Wc), idx.reshape(-1, 2)) for Wc in W], axis=1)


# --------------------------------------------------------------------------
# negative order divergence


def _segment_power(a: np.ndarray, t0: np.ndarray, t1: np.ndarray, q: float) -> np.ndarray:
    """int_{t0}^{t1} (a^2 + t^2)^(-q/2) dt, 0 < q < 1."""

    def A(t):
        t = np.asarray(t, dtype=float)
        aa = np.abs(a)
        out = np.sign(t) * np.abs(t) ** (1 - q) / (1 - q)
        nz = aa > 0
        if np.any(nz):
            an, tn = np.broadcast_arrays(aa, t)
            an, tn = an[nz], tn[nz]
            u = tn / an
            val = tn * an ** (-q) * special.hyp2f1(0.5, q / 2, 1.5, -u * u)
            out = np.array(out, dtype=float)
            out[nz] = val
        return out

    a, t0, t1 = np.broadcast_arrays(np.asarray(a, float), np.asarray(t0, float), np.asarray(t1, float))
    return A(t1) - A(t0)


def _odd_kernel_cells_2d(grid: GridSpec, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell integrals of z/|z|^(3-alpha) (n = 2), components (x, y)."""
    h = grid.h
    mx, my = np.meshgrid(*[np.arange(-(N - 1), N, dtype=float) for N in grid.extents], indexing="ij")
    q = 1 - alpha
    out = []
    for comp in range(2):
        a_, b_ = (mx, my) if comp == 0 else (my, mx)
        res = np.empty(mx.shape)
        near = np.maximum(np.abs(mx), np.abs(my)) <= K.NEAR
        # exact: potential |z|^(alpha-1)/(alpha-1) differenced across the cell
        lo_a, hi_a = (a_[near] - 0.5) * h, (a_[near] + 0.5) * h
        lo_b, hi_b = (b_[near] - 0.5) * h, (b_[near] + 0.5) * h
        S_hi = _segment_power(hi_a, lo_b, hi_b, q)
        S_lo = _segment_power(lo_a, lo_b, hi_b, q)
        res[near] = (S_hi - S_lo) / (alpha - 1)
        far = ~near
        t, w = np.polynomial.legendre.leggauss(4)
        t, w = t * h / 2, w * h / 2
        acc = np.zeros(far.sum())
        ca, cb = a_[far] * h, b_[far] * h
        for ti, wi in zip(t, w):
            for tj, wj in zip(t, w):
                za, zb = ca + ti, cb + tj
                acc += wi * wj * za * (za * za + zb * zb) ** (-(3 - alpha) / 2)
        res[far] = acc
        out.append(res)
    return out[0], out[1]


def _odd_kernel_cells_1d(grid: GridSpec, alpha: float) -> np.ndarray:
    h = grid.h
    N = grid.extents[0]
    m = np.arange(-(N - 1), N, dtype=float)
    lo, hi = (m - 0.5) * h, (m + 0.5) * h
    # int sgn(z)|z|^(alpha-1) = |z|^alpha / alpha
    return (np.abs(hi) ** alpha - np.abs(lo) ** alpha) / alpha


def odd_kernel_cells(grid: GridSpec, alpha: float) -> tuple[np.ndarray, ...]:
    """Per-component cell integrals of z/|z|^(n+1-alpha) over the offset cells of ``grid``."""
    if grid.n == 1:
        return (_odd_kernel_cells_1d(grid, alpha),)
    return _odd_kernel_cells_2d(grid, alpha)


def _power_tail_1d(x: np.ndarray, edge: float, c: float, alpha: float, side: int) -> np.ndarray:
    """int beyond the edge of c |y|^(-1-alpha) sgn-kernel (y - x)|y - x|^(alpha-2) dy.

    ``side`` = +1 integrates y in (edge, inf), -1 integrates y in (-inf, -edge)
    with the model c |y|^(-1-alpha) on that side.
    """
    t, w = np.polynomial.legendre.leggauss(64)
    t = 0.5 * (t + 1)
    w = 0.5 * w
    # substitution y = edge / t (right side) or y = -edge / t (left)
    acc = np.zeros_like(x)
    for ti, wi in zip(t, w):
        y = side * edge / ti
        jac = edge / ti**2
        z = y - x
        acc += wi * jac * c * abs(y) ** (-1 - alpha) * np.sign(z) * np.abs(z) ** (alpha - 1)
    return acc


def _monopole_far_field_2d(phi: VectorField, alpha: float):
    """Contribution of phi beyond the grid, modelled as M grad^alpha of a Gaussian.

    The far field of a fractional gradient is -mu M y |y|^(-3-alpha), with M
    fitted on the grid boundary.  For the model F = M grad^alpha G the
    identity -div^{-alpha} F = M G holds on all of R^2, so the part of
    div^{-alpha} F coming from outside the grid is -M G minus the grid sum of
    F.  Returns a function of the Gaussian width (as a fraction of the grid
    half-width); the spread between widths measures the model error.
    """
    from .oracles import gaussian_frac_gradient

    grid = phi.grid
    centre = 0.5 * (grid.lo + grid.hi)
    y = grid.points() - centre
    ring = np.zeros(grid.extents, dtype=bool)
    ring[[0, -1], :] = True
    ring[:, [0, -1]] = True
    r = np.sqrt(np.sum(y * y, axis=-1))
    far = -C.mu(2, alpha) * np.moveaxis(y, -1, 0) * r ** (-3 - alpha)
    num = float(np.sum(phi.values[:, ring] * far[:, ring]))
    den = float(np.sum(far[:, ring] ** 2))
    mass = num / den if den > 0 else 0.0
    K0, K1 = _odd_kernel_cells_2d(grid, alpha)
    mneg = C.mu(2, -alpha)
    R = _half_width(grid)

    def model(width: float) -> np.ndarray:
        sigma = width * R
        norm = mass / (2 * math.pi * sigma**2)
        F = norm * gaussian_frac_gradient(2, alpha, y, sigma)
        on_grid = mneg * (K.correlate(F[0], K0) + K.correlate(F[1], K1))
        return -norm * np.exp(-0.5 * r * r / sigma**2) - on_grid

    return model


def frac_divergence_neg(phi: VectorField, alpha: float, extrapolate: bool = True) -> ScalarField:
    """div^{-alpha} phi = mu_{n,-alpha} int z . phi(x + z) |z|^(-(n+1-alpha)) dz.

    The input is taken as zero outside the grid unless ``extrapolate`` is
    set.  Then the far field is modelled by the decay of a fractional
    gradient of a localized function: c_(+/-) |y|^(-1-alpha) fitted at each
    edge in 1-D, a fitted monopole in 2-D.
    """
    alpha = _check_alpha(alpha)
    grid = phi.grid
    n = grid.n
    mneg = C.mu(n, -alpha)
    flags: list[str] = []
    if n == 1:
        Kc = _odd_kernel_cells_1d(grid, alpha)
        vals = mneg * K.correlate(phi.values[0], Kc)
        x = grid.points()
        lo, hi = grid.lo[0], grid.hi[0]
        edge_r = hi if hi > 0 else None
        edge_l = -lo if lo < 0 else None

        def model(k: int) -> np.ndarray:
            # far field c |y|^(-1-alpha) fitted at the k-th sample from each edge
            acc = np.zeros_like(x)
            if edge_r is not None:
                c_r = phi.values[0, -1 - k] * abs(x[-1 - k]) ** (1 + alpha)
                acc += _power_tail_1d(x, edge_r, c_r, alpha, +1)
            if edge_l is not None:
                c_l = phi.values[0, k] * abs(x[k]) ** (1 + alpha)
                acc += _power_tail_1d(x, edge_l, c_l, alpha, -1)
            return mneg * acc

        tail_model = model(0)
        if extrapolate:
            vals = vals + tail_model
            flags.append("power_law_far_field")
            # sensitivity of the fit to where it is taken
            probe = max(1, grid.extents[0] // 16)
            tail_err = float(np.max(np.abs(tail_model - model(probe))))
        else:
            tail_err = float(np.max(np.abs(tail_model)))
    else:
        K0, K1 = _odd_kernel_cells_2d(grid, alpha)
        vals = mneg * (K.correlate(phi.values[0], K0) + K.correlate(phi.values[1], K1))
        if extrapolate:
            model = _monopole_far_field_2d(phi, alpha)
            vals = vals + model(0.125)
            flags.append("monopole_far_field")
            tail_err = float(np.max(np.abs(model(0.125) - model(0.25))))
        else:
            # outside the grid |phi| <= edge (R/|y|)^(2+alpha); for |x| <= R/2 the
            # kernel is at most (|y|/2)^(alpha-2), giving edge R^alpha 2^(2-alpha) pi
            R = _half_width(grid)
            edge = max(float(np.max(np.abs(phi.values[:, [0, -1], :]))), float(np.max(np.abs(phi.values[:, :, [0, -1]]))))
            tail_err = mneg * edge * R**alpha * 2 ** (2 - alpha) * math.pi
    out_norm = float(np.max(np.abs(vals))) if vals.size else 0.0
    if out_norm > 0 and tail_err > 0.1 * out_norm:
        flags.append("slow_decay")
    budget = ErrorBudget(0.0, float(tail_err), 0.0, tuple(flags))
    prov = {"operator": "frac_divergence_neg", "alpha": alpha}
    return ScalarField(grid, vals, phi.support_hint, budget, prov)


# --------------------------------------------------------------------------
# Laplacian and Riesz potential


def riesz_potential(f: ScalarField, beta: float) -> ScalarField:
    """I_beta f on the grid with exact cell integrals of |z|^(beta - n)."""
    n = f.grid.n
    beta = C.check_order(beta, 0.0, float(n), name="beta")
    grid = f.grid
    ker = K.cell_kernel(n, n - beta, grid.h, grid.extents)
    c = C.riesz_constant(n, beta)
    vals = c * K.convolve_kernel(f.values, ker)
    flags = []
    edge = _boundary_max(f.values)
    if edge > 1e-8 * max(float(np.max(np.abs(f.values))), 1e-300):
        flags.append("input_not_decayed")
    quad = 0.0
    if min(grid.extents) >= 8:
        sub = grid.subsampled()
        coarse = c * K.convolve_kernel(_subsample(f.values), K.cell_kernel(n, n - beta, sub.h, sub.extents))
        quad = float(np.max(np.abs(_subsample(vals) - coarse)))
    return ScalarField(grid, vals, None, ErrorBudget(0.0, 0.0, quad, tuple(flags)), {"operator": "riesz_potential", "beta": beta})


def discrete_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    pad = np.pad(np.asarray(values, dtype=float), 1)
    if values.ndim == 1:
        return (pad[2:] - 2 * pad[1:-1] + pad[:-2]) / h**2
    return (pad[2:, 1:-1] + pad[:-2, 1:-1] + pad[1:-1, 2:] + pad[1:-1, :-2] - 4 * pad[1:-1, 1:-1]) / h**2


def _axis_derivatives(values: np.ndarray, h: float) -> tuple[list[np.ndarray], list[np.ndarray]]:
    pad = np.pad(np.asarray(values, dtype=float), 1)
    if values.ndim == 1:
        return [(pad[2:] - pad[:-2]) / (2 * h)], [(pad[2:] - 2 * pad[1:-1] + pad[:-2]) / h**2]
    c = pad[1:-1, 1:-1]
    d1 = [(pad[2:, 1:-1] - pad[:-2, 1:-1]) / (2 * h), (pad[1:-1, 2:] - pad[1:-1, :-2]) / (2 * h)]
    d2 = [(pad[2:, 1:-1] - 2 * c + pad[:-2, 1:-1]) / h**2, (pad[1:-1, 2:] - 2 * c + pad[1:-1, :-2]) / h**2]
    return d1, d2


def _laplacian_values(values: np.ndarray, grid: GridSpec, s: float) -> np.ndarray:
    # cell rule with a second-order Taylor expansion of f about every cell
    # centre; the self cell keeps only the (even) curvature term
    L, T, S = K.laplacian_stencil(grid.n, s, grid.h, grid.extents)
    M1, M2 = K.laplacian_moments(grid.n, s, grid.h, grid.extents)
    nu = C.nu(grid.n, s)
    d1, d2 = _axis_derivatives(values, grid.h)
    acc = K.correlate(values, L) - T * values + S * sum(d2)
    for j in range(grid.n):
        acc = acc + K.correlate(d1[j], M1[j]) + 0.5 * K.correlate(d2[j], M2[j])
    return nu * acc


def frac_laplacian(f: ScalarField, s: float) -> ScalarField:
    """(-Delta)^(s/2) f for s in (-1, 2), following the four-branch definition."""
    s = float(s)
    if not -1 < s < 2:
        raise ValueError(f"s={s} outside admissible range (-1, 2)")
    grid = f.grid
    if s == 0:
        return ScalarField(grid, f.values, f.support_hint, ErrorBudget(), {"operator": "frac_laplacian", "s": 0.0})
    if s < 0:
        out = riesz_potential(f, -s)
        return ScalarField(grid, out.values, None, out.budget, {"operator": "frac_laplacian", "s": s})
    check_support(f.values, "input field")
    vals = _laplacian_values(f.values, grid, s)
    quad = 0.0
    if min(grid.extents) >= 8:
        coarse = _laplacian_values(_subsample(f.values), grid.subsampled(), s)
        # Richardson with the observed order of the scheme, 3 - s capped at 2
        order = min(2.0, 3.0 - s)
        quad = float(np.max(np.abs(_subsample(vals) - coarse))) / (2**order - 1)
    flags = ("principal_value_pairing",) if s >= 1 else ()
    return ScalarField(grid, vals, f.support_hint, ErrorBudget(0.0, 0.0, quad, flags), {"operator": "frac_laplacian", "s": s})


# --------------------------------------------------------------------------
# nonlocal Leibniz remainders


def _nl_pairs(f: np.ndarray, g: np.ndarray, Kc: np.ndarray) -> np.ndarray:
    f = np.ascontiguousarray(f, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    Kc = np.ascontiguousarray(Kc)
    if f.ndim == 1:
        return _backend.nl_sum_1d(f, g, Kc)
    return _backend.nl_sum_2d(f, g, Kc)


def _nl_budget(grid: GridSpec, alpha: float, lip_f: float, lip_g: float) -> float:
    # the doubled difference makes the excluded cell O(eps^(2-alpha))
    eps = grid.h / 2
    return C.mu(grid.n, alpha) * lip_f * lip_g * grid.n * C.omega(grid.n) * eps ** (2 - alpha) / (2 - alpha)


def _nl_midpoint(f: np.ndarray, gs: list[np.ndarray], grid: GridSpec, alpha: float, contract: bool) -> np.ndarray:
    Kv = K.midpoint_vector_kernel(grid.n, alpha, grid.h, grid.extents)
    outside = outside_vector_integral(grid, alpha)
    if contract:
        return sum(_nl_pairs(f, gs[c], Kv[c]) + f * gs[c] * outside[c] for c in range(grid.n))
    return np.stack([_nl_pairs(f, gs[0], Kv[c]) + f * gs[0] * outside[c] for c in range(grid.n)])


def nl_gradient_remainder(f: ScalarField, g: ScalarField, alpha: float, rule: str = "midpoint") -> VectorField:
    """grad_NL(f, g)(x) = mu int (y - x)(f(y) - f(x))(g(y) - g(x)) / |y - x|^(n+alpha+1) dy.

    ``midpoint`` is an independent point quadrature (plus the exact
    contribution of the region outside the grid); ``stencil`` uses the
    direct weights, for which the discrete product rule holds exactly.
    """
    alpha = _check_alpha(alpha)
    grid = f.grid
    if rule == "stencil":
        fg = _direct_gradient_values(f.values * g.values, grid, alpha)
        vals = fg - f.values * _direct_gradient_values(g.values, grid, alpha) - g.values * _direct_gradient_values(f.values, grid, alpha)
        return VectorField(grid, vals, None, ErrorBudget(), {"operator": "nl_gradient_remainder", "rule": rule})
    if rule != "midpoint":
        raise ValueError(f"unknown rule {rule!r}")
    vals = _nl_midpoint(f.values, [g.values], grid, alpha, contract=False)
    inner = _nl_budget(grid, alpha, discrete_lipschitz(f.values, grid.h), discrete_lipschitz(g.values, grid.h))
    quad = 0.0
    if min(grid.extents) >= 8:
        sub = grid.subsampled()
        coarse = _nl_midpoint(_subsample(f.values), [_subsample(g.values)], sub, alpha, contract=False)
        quad = _richardson(vals, coarse)
    budget = ErrorBudget(inner, 0.0, quad)
    return VectorField(grid, vals, None, budget, {"operator": "nl_gradient_remainder", "rule": rule, "alpha": alpha})


def nl_divergence_remainder(f: ScalarField, phi: VectorField, alpha: float, rule: str = "midpoint") -> ScalarField:
    """div_NL(f, phi)(x) = mu int (y - x).(phi(y) - phi(x))(f(y) - f(x)) / |y - x|^(n+alpha+1) dy."""
    alpha = _check_alpha(alpha)
    grid = f.grid
    if rule == "stencil":
        fphi = _direct_divergence_values(f.values[None] * phi.values, grid, alpha)
        vals = (
            fphi
            - f.values * _direct_divergence_values(phi.values, grid, alpha)
            - np.sum(phi.values * _direct_gradient_values(f.values, grid, alpha), axis=0)
        )
        return ScalarField(grid, vals, None, ErrorBudget(), {"operator": "nl_divergence_remainder", "rule": rule})
    if rule != "midpoint":
        raise ValueError(f"unknown rule {rule!r}")
    comps = [phi.values[c] for c in range(grid.n)]
    vals = _nl_midpoint(f.values, comps, grid, alpha, contract=True)
    lip_phi = max(discrete_lipschitz(c, grid.h) for c in comps)
    inner = grid.n * _nl_budget(grid, alpha, discrete_lipschitz(f.values, grid.h), lip_phi)
    quad = 0.0
    if min(grid.extents) >= 8:
        sub = grid.subsampled()
        coarse = _nl_midpoint(_subsample(f.values), [_subsample(c) for c in comps], sub, alpha, contract=True)
        quad = float(np.max(np.abs(_subsample(vals) - coarse)))
    budget = ErrorBudget(inner, 0.0, quad)
    return ScalarField(grid, vals, None, budget, {"operator": "nl_divergence_remainder", "rule": rule, "alpha": alpha})
