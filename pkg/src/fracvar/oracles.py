"""Closed-form reference values used as ground truth by the suites and tests.

The interval formulas are exact.  Gaussian formulas come from the Fourier
symbol |xi|^s acting on a radial Gaussian and are written with Kummer's
function 1F1; they are independent of every grid discretisation in the
package, which is what makes them useful as oracles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from . import constants as C
from .fields import GridSpec, VectorField
from .operators import odd_kernel_cells


@dataclass(frozen=True)
class IntervalOracle:
    a: float
    b: float
    alpha: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval oracle needs a < b, got ({self.a}, {self.b})")
        C.check_order(self.alpha, 0.0, 1.0)

    def gradient(self, x):
        return interval_gradient(self.a, self.b, self.alpha, x)

    @property
    def perimeter(self) -> float:
        return interval_perimeter(self.a, self.b, self.alpha)

    @property
    def gradient_l1(self) -> float:
        return interval_gradient_l1(self.a, self.b, self.alpha)


# --------------------------------------------------------------------------
# indicator of an interval


def interval_gradient(a: float, b: float, alpha: float, x):
    """Fractional gradient of the indicator of (a, b) at x (x not an endpoint)."""
    alpha = C.check_order(alpha, 0.0, 1.0)
    x = np.asarray(x, dtype=float)
    if np.any((x == a) | (x == b)):
        raise ValueError("the fractional gradient of an indicator is infinite at the endpoints")
    pref = C.mu(1, alpha) / alpha
    out = pref * (np.abs(x - a) ** (-alpha) - np.abs(x - b) ** (-alpha))
    return float(out) if out.ndim == 0 else out


def interval_perimeter(a: float, b: float, alpha: float) -> float:
    alpha = C.check_order(alpha, 0.0, 1.0)
    if b < a:
        raise ValueError("interval perimeter needs a <= b")
    return 4.0 * (b - a) ** (1 - alpha) / (alpha * (1 - alpha))


def interval_gradient_l1(a: float, b: float, alpha: float) -> float:
    alpha = C.check_order(alpha, 0.0, 1.0)
    if b < a:
        raise ValueError("needs a <= b")
    return 2 ** (1 + alpha) * C.mu(1, alpha) * (b - a) ** (1 - alpha) / (alpha * (1 - alpha))


def strict_margin(alpha: float) -> float:
    """1 - |D^a chi_(a,b)|(R) / (mu P_a((a,b))) = 1 - 2^(alpha-1)."""
    return 1.0 - 2 ** (alpha - 1)


def _singular_piece(fun_at, lo: float, hi: float, alpha: float) -> float:
    """int_lo^hi f(x) dx where f ~ |x - endpoint|^(-alpha) at finite endpoints.

    ``fun_at(e, t)`` evaluates f(e + t); passing the endpoint and the offset
    separately keeps distances to the endpoint exact when they are far below
    the spacing of floating-point numbers near e.  Substituting
    x - lo = u^(1/(1-alpha)) on the left half and the mirror on the right half
    removes the endpoint singularities.
    """
    q = 1.0 / (1.0 - alpha)

    def plain(x):
        return fun_at(x, 0.0)

    if math.isinf(hi):
        mid = lo + 1.0
        tail, _ = integrate.quad(plain, mid, math.inf, limit=400, epsabs=1e-14, epsrel=1e-12)
        return _singular_piece(fun_at, lo, mid, alpha) + tail
    if math.isinf(lo):
        mid = hi - 1.0
        tail, _ = integrate.quad(plain, -math.inf, mid, limit=400, epsabs=1e-14, epsrel=1e-12)
        return _singular_piece(fun_at, mid, hi, alpha) + tail
    Lq = (0.5 * (hi - lo)) ** (1 / q)

    def left(u):
        return fun_at(lo, u**q) * q * u ** (q - 1)

    def right(u):
        return fun_at(hi, -(u**q)) * q * u ** (q - 1)

    v1, _ = integrate.quad(left, 0, Lq, limit=400, epsabs=1e-14, epsrel=1e-12)
    v2, _ = integrate.quad(right, 0, Lq, limit=400, epsabs=1e-14, epsrel=1e-12)
    return v1 + v2


def interval_union_gradient_l1(intervals, alpha: float) -> float:
    """L^1 norm over R of the closed-form fractional gradient of a union of intervals."""
    alpha = C.check_order(alpha, 0.0, 1.0)
    ivs = [(float(a), float(b)) for a, b in intervals]
    if not ivs:
        return 0.0
    pref = C.mu(1, alpha) / alpha

    def grad_at(e, t):
        return pref * sum(abs((e - a) + t) ** (-alpha) - abs((e - b) + t) ** (-alpha) for a, b in ivs)

    def grad(x):
        return grad_at(x, 0.0)

    def absgrad_at(e, t):
        return abs(grad_at(e, t))

    ends = sorted({e for iv in ivs for e in iv})
    pieces = [(-math.inf, ends[0])] + list(zip(ends[:-1], ends[1:])) + [(ends[-1], math.inf)]
    with warnings.catch_warnings():
        # the tolerances sit at the roundoff floor on purpose; quadpack then
        # reports roundoff although the result agrees with the closed form
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _piecewise_total(pieces, grad, absgrad_at, alpha)


def _piecewise_total(pieces, grad, absgrad_at, alpha: float) -> float:
    total = 0.0
    for lo, hi in pieces:
        # split finite pieces at sign changes of the gradient
        if math.isfinite(lo) and math.isfinite(hi):
            xs = np.linspace(lo, hi, 65)[1:-1]
            g = np.array([grad(x) for x in xs])
            cuts = [lo]
            for i in np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]:
                cuts.append(optimize.brentq(grad, xs[i], xs[i + 1], xtol=1e-15))
            cuts.append(hi)
            for p, q in zip(cuts[:-1], cuts[1:]):
                total += _singular_piece(absgrad_at, p, q, alpha)
        else:
            total += _singular_piece(absgrad_at, lo, hi, alpha)
    return total


def interval_gradient_l1_numeric(a: float, b: float, alpha: float) -> float:
    """Independent quadrature of |interval_gradient| over R (consistency check of the two closed forms)."""
    return interval_union_gradient_l1([(a, b)], alpha)


# --------------------------------------------------------------------------
# atom witness f_{a,b,alpha}


def atom_witness_value(a: float, b: float, alpha: float, x):
    """|x - b|^(alpha-1) sgn(x - b) - |x - a|^(alpha-1) sgn(x - a)."""
    alpha = C.check_order(alpha, 0.0, 1.0)
    x = np.asarray(x, dtype=float)
    if np.any((x == a) | (x == b)):
        raise ValueError("the atom witness is singular at a and b")
    out = np.sign(x - b) * np.abs(x - b) ** (alpha - 1) - np.sign(x - a) * np.abs(x - a) ** (alpha - 1)
    return float(out) if out.ndim == 0 else out


def atom_pairing_expected(phi_a: float, phi_b: float, alpha: float) -> float:
    """int f_{a,b,alpha} div^alpha phi = (phi(a) - phi(b)) / mu_{1,-alpha}."""
    return (phi_a - phi_b) / C.mu(1, -alpha)


# --------------------------------------------------------------------------
# Gaussian closed forms


def gaussian_frac_laplacian(n: int, s: float, x, sigma: float = 1.0):
    """(-Delta)^(s/2) of exp(-|x|^2 / (2 sigma^2)), s in (-n, 2)."""
    x = np.asarray(x, dtype=float)
    r2 = (x**2 if n == 1 else np.sum(x**2, axis=-1)) / sigma**2
    c = 2 ** (s / 2) * special.gamma((n + s) / 2) / special.gamma(n / 2)
    return sigma ** (-s) * c * special.hyp1f1((n + s) / 2, n / 2, -r2 / 2)


def gaussian_frac_gradient(n: int, alpha: float, x, sigma: float = 1.0) -> np.ndarray:
    """Fractional gradient of exp(-|x|^2 / (2 sigma^2)); shape (n, ...) for points x (..., n)."""
    x = np.asarray(x, dtype=float)
    pts = x[..., None] if n == 1 else x
    r2 = np.sum(pts**2, axis=-1) / sigma**2
    a = (n + 1 + alpha) / 2
    c = 2 ** ((1 + alpha) / 2) * special.gamma(a) / (n * special.gamma(n / 2))
    radial = -c * special.hyp1f1(a, n / 2 + 1, -r2 / 2) * sigma ** (-1 - alpha)
    return np.moveaxis(pts * radial[..., None], -1, 0)


# --------------------------------------------------------------------------
# ramp h_{eps,r,x}


def ramp_gradient(eps: float, r: float, center, alpha: float, y) -> np.ndarray:
    """Fractional gradient of the ramp equal to 1 on B_r(center), 0 off B_{r+eps}, linear between.

    mu/(eps (n+alpha-1)) int over the annulus of (c - z)/|c - z| |z - y|^(1-n-alpha) dz.
    One dimension is exact; in two dimensions the annulus is integrated in
    polar coordinates about y with a singularity-removing substitution.
    Returns an array of shape (n,) for a single point.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    c = np.atleast_1d(np.asarray(center, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = c.size
    mu = C.mu(n, alpha)
    if n == 1:
        from .kernels import interval_power_integral

        cc, yy = c[0], y[0]
        # Dh = -sgn(z - c)/eps on the annulus pieces
        right = interval_power_integral(cc + r - yy, cc + r + eps - yy, alpha)
        left = interval_power_integral(cc - r - eps - yy, cc - r - yy, alpha)
        return np.array([mu / (eps * alpha) * (left - right)])
    return _ramp_gradient_2d(eps, r, c, alpha, y, mu)


def _ramp_gradient_2d(eps, r, c, alpha, y, mu, angles: int = 256, order: int = 24) -> np.ndarray:
    R0, R1 = r, r + eps
    th = (np.arange(angles) + 0.5) * 2 * np.pi / angles
    dth = 2 * np.pi / angles
    d = y - c
    t, w = np.polynomial.legendre.leggauss(order)
    t, w = 0.5 * (t + 1), 0.5 * w
    q = 1.0 / (1.0 - alpha)
    acc = np.zeros(2)
    for theta in th:
        e = np.array([math.cos(theta), math.sin(theta)])
        b = float(d @ e)
        dd = float(d @ d)
        # rho where |y + rho e - c| = R: rho^2 + 2 b rho + dd - R^2 = 0
        segs = []
        roots = {}
        for R in (R0, R1):
            disc = b * b - dd + R * R
            roots[R] = (-b - math.sqrt(disc), -b + math.sqrt(disc)) if disc > 0 else None
        out1 = roots[R1]
        if out1 is None:
            continue
        inn = roots[R0]
        lo1, hi1 = max(out1[0], 0.0), max(out1[1], 0.0)
        if inn is None:
            segs.append((lo1, hi1))
        else:
            lo0, hi0 = max(inn[0], 0.0), max(inn[1], 0.0)
            segs += [(lo1, lo0), (hi0, hi1)]
        for a0, a1 in segs:
            if a1 <= a0:
                continue
            # int_a0^a1 rho^(-alpha) g(rho) d rho with rho = u^q
            u0, u1 = a0 ** (1 / q), a1 ** (1 / q)
            u = u0 + (u1 - u0) * t
            rho = u**q
            z = y[None, :] + rho[:, None] * e[None, :]
            cz = c[None, :] - z
            dirs = cz / np.linalg.norm(cz, axis=1)[:, None]
            # rho^(-alpha) d rho = q u^(q-1) u^(-alpha q) du = q du
            acc += (u1 - u0) * q * np.sum(w[:, None] * dirs, axis=0) * dth
    return mu / (eps * (1 + alpha)) * acc


# --------------------------------------------------------------------------
# fundamental theorem of calculus


def ftc_reconstruct(grad: VectorField, alpha: float, x_index, y_index) -> float:
    """mu_{n,-alpha} int (K(z - x) - K(z - y)) . grad(z) dz with K(w) = w/|w|^(n+1-alpha).

    x and y are grid sample indices; the kernel is integrated exactly over
    each cell, so the singular cells at x and y need no special treatment.
    The result approximates f(y) - f(x) when ``grad`` is the fractional
    gradient of f.
    """
    alpha = C.check_order(alpha, 0.0, 1.0)
    grid: GridSpec = grad.grid
    cells = odd_kernel_cells(grid, alpha)
    xi = tuple(np.atleast_1d(x_index))
    yi = tuple(np.atleast_1d(y_index))
    if xi == yi:
        return 0.0
    centre = tuple(N - 1 for N in grid.extents)

    def window(idx):
        return tuple(slice(c - i, c - i + N) for c, i, N in zip(centre, idx, grid.extents))

    total = 0.0
    for comp in range(grid.n):
        Kc = cells[comp]
        diff = Kc[window(xi)] - Kc[window(yi)]
        total += float(np.sum(diff * grad.values[comp]))
    return C.mu(grid.n, -alpha) * total
