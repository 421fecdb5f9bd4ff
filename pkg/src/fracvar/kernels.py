"""Cell integrals of radial power kernels and the stencils built from them.

All stencils are stored as dense arrays of shape ``(2*N0 - 1, ..., 2*Nd - 1)``
indexed by the offset ``m + N - 1`` so that they can be applied either by
FFT correlation or by the compiled windowed kernels.

Cell ``k`` is the cube of side ``h`` centred at ``k*h``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import signal, special

from . import constants as C

# Offsets with |k|_inf up to this radius use exact antiderivatives; beyond it
# a tensor Gauss-Legendre rule is accurate to roughly (1/NEAR)^8.
NEAR = 8
_GL_FAR = 4


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# one dimension


def power_antiderivative_1d(x: np.ndarray, s: float) -> np.ndarray:
    """Odd antiderivative of |z|^(-s), s < 1, vanishing at 0."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** (1 - s) / (1 - s)


def interval_power_integral(lo, hi, s: float) -> np.ndarray:
    """Integral of |z|^(-s) over [lo, hi].

    For s < 1 any interval is allowed; for s >= 1 the interval must not
    contain the origin.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if s < 1:
        return power_antiderivative_1d(hi, s) - power_antiderivative_1d(lo, s)
    if np.any((lo < 0) & (hi > 0)):
        raise ValueError("non-integrable kernel over an interval containing 0")
    a = np.minimum(np.abs(lo), np.abs(hi))
    b = np.maximum(np.abs(lo), np.abs(hi))
    if s == 1:
        return np.log(b / a)
    return (a ** (1 - s) - b ** (1 - s)) / (s - 1)


# --------------------------------------------------------------------------
# two dimensions


def _corner_integral(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """int_0^a int_0^b (x^2+y^2)^(-s/2) dy dx for a, b >= 0 and s < 2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = s / 2
    e = 2 - s
    out = np.zeros(np.broadcast(a, b).shape)
    a, b = np.broadcast_arrays(a, b)
    ok = (a > 0) & (b > 0)
    aa, bb = a[ok], b[ok]
    # split the angular range at the diagonal of the rectangle and write
    # each piece as int_0^u (1 + t^2)^(-p) dt = u 2F1(1/2, p; 3/2; -u^2)
    u = bb / aa
    v = aa / bb
    part1 = aa**e * u * special.hyp2f1(0.5, p, 1.5, -u * u)
    part2 = bb**e * v * special.hyp2f1(0.5, p, 1.5, -v * v)
    out[ok] = (part1 + part2) / e
    return out


def signed_corner_integral(x: np.ndarray, y: np.ndarray, s: float) -> np.ndarray:
    """int_0^x int_0^y |z|^(-s) with orientation signs (a 2-D antiderivative)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sign(x) * np.sign(y) * _corner_integral(np.abs(x), np.abs(y), s)


def rect_power_integral(x0, x1, y0, y1, s: float) -> np.ndarray:
    """Integral of |z|^(-s) over [x0,x1] x [y0,y1], s < 2, by inclusion-exclusion."""
    G = signed_corner_integral
    return G(x1, y1, s) - G(x0, y1, s) - G(x1, y0, s) + G(x0, y0, s)


def _gl_rect(cx: np.ndarray, cy: np.ndarray, h: float, s: float, order: int = _GL_FAR) -> np.ndarray:
    t, w = np.polynomial.legendre.leggauss(order)
    t = t * h / 2
    w = w * h / 2
    acc = np.zeros(np.broadcast(cx, cy).shape)
    for ti, wi in zip(t, w):
        for tj, wj in zip(t, w):
            acc += wi * wj * ((cx + ti) ** 2 + (cy + tj) ** 2) ** (-s / 2)
    return acc


def _gl_rect_composite(cx: np.ndarray, cy: np.ndarray, h: float, s: float, split: int = 8, order: int = 6) -> np.ndarray:
    acc = np.zeros(np.broadcast(cx, cy).shape)
    sub = h / split
    offs = (np.arange(split) + 0.5) * sub - h / 2
    for ox in offs:
        for oy in offs:
            acc += _gl_rect(cx + ox, cy + oy, sub, s, order)
    return acc


def cell_power_integrals_2d(kx: np.ndarray, ky: np.ndarray, h: float, s: float, shift=(0.0, 0.0)) -> np.ndarray:
    """int over the h-square centred at ((kx+sx)h, (ky+sy)h) of |z|^(-s).

    Cells that contain or touch the origin require s < 2.
    """
    kx = np.asarray(kx, dtype=float) + shift[0]
    ky = np.asarray(ky, dtype=float) + shift[1]
    kx, ky = np.broadcast_arrays(kx, ky)
    out = np.empty(kx.shape)
    near = np.maximum(np.abs(kx), np.abs(ky)) <= NEAR
    far = ~near
    out[far] = _gl_rect(kx[far] * h, ky[far] * h, h, s)
    if s < 2:
        x0 = (kx[near] - 0.5) * h
        y0 = (ky[near] - 0.5) * h
        out[near] = rect_power_integral(x0, x0 + h, y0, y0 + h, s)
    else:
        touches = np.maximum(np.abs(kx[near]), np.abs(ky[near])) < 0.5 + 1e-12
        if np.any(touches):
            raise ValueError("non-integrable kernel on a cell containing the origin")
        out[near] = _gl_rect_composite(kx[near] * h, ky[near] * h, h, s)
    return out


def _offsets(shape: tuple[int, ...]) -> list[np.ndarray]:
    return [np.arange(-(N - 1), N) for N in shape]


# --------------------------------------------------------------------------
# stencils


@lru_cache(maxsize=32)
def direct_stencil(n: int, alpha: float, h: float, shape: tuple[int, ...]) -> tuple[np.ndarray, ...]:
    """Weights W^(c) with (grad f)_c(x_i) = sum_m W^(c)_m f_{i+m}.

    Summation by parts of the staggered-difference form of the Riesz
    representation with exact cell integrals; antisymmetric in m.
    """
    mu = C.mu(n, alpha)
    pref = mu / ((n + alpha - 1) * h)
    s = n + alpha - 1
    out = []
    if n == 1:
        (N,) = shape
        m = np.arange(-(N - 1), N, dtype=float)

        def q(k):
            return interval_power_integral(k * h, (k + 1) * h, s)

        A = pref * (q(m - 1) - q(m))
        out.append(_readonly(0.5 * (A - A[::-1])))
        return tuple(out)
    if n != 2:
        raise ValueError("grids are supported for n in {1, 2}")
    mx, my = np.meshgrid(*_offsets(shape), indexing="ij")
    for c in range(2):
        ex, ey = (1.0, 0.0) if c == 0 else (0.0, 1.0)
        shift = (0.5 * ex, 0.5 * ey)
        Q_prev = cell_power_integrals_2d(mx - ex, my - ey, h, s, shift)
        Q_here = cell_power_integrals_2d(mx, my, h, s, shift)
        A = pref * (Q_prev - Q_here)
        out.append(_readonly(0.5 * (A - A[::-1, ::-1])))
    return tuple(out)


@lru_cache(maxsize=32)
def cell_kernel(n: int, s: float, h: float, shape: tuple[int, ...]) -> np.ndarray:
    """K_m = int_{cell m} |z|^(-s) dz (s < n), the exact-cell Riesz kernel."""
    if n == 1:
        (N,) = shape
        m = np.arange(-(N - 1), N, dtype=float)
        return _readonly(interval_power_integral((m - 0.5) * h, (m + 0.5) * h, s))
    mx, my = np.meshgrid(*_offsets(shape), indexing="ij")
    return _readonly(cell_power_integrals_2d(mx, my, h, s))


def ball_origin_integral(n: int, s: float, h: float) -> float:
    """int over the ball of volume h^n centred at 0 of |z|^(-s), s < n."""
    rho = (h**n / C.omega(n)) ** (1.0 / n)
    return n * C.omega(n) * rho ** (n - s) / (n - s)


@lru_cache(maxsize=32)
def sampled_kernel(n: int, s: float, h: float, shape: tuple[int, ...]) -> np.ndarray:
    """Point-sampled h^n |m h|^(-s) with the origin cell replaced by its ball integral."""
    grids = np.meshgrid(*_offsets(shape), indexing="ij")
    r = np.sqrt(sum((g * h) ** 2 for g in grids))
    K = np.zeros(r.shape)
    nz = r > 0
    K[nz] = h**n * r[nz] ** (-s)
    K[tuple(N - 1 for N in shape)] = ball_origin_integral(n, s, h)
    return _readonly(K)


@lru_cache(maxsize=32)
def midpoint_vector_kernel(n: int, alpha: float, h: float, shape: tuple[int, ...]) -> tuple[np.ndarray, ...]:
    """mu h^n z/|z|^(n+alpha+1) sampled at z = m h, zero at m = 0."""
    mu = C.mu(n, alpha)
    grids = np.meshgrid(*_offsets(shape), indexing="ij")
    z = [g * h for g in grids]
    r = np.sqrt(sum(zi**2 for zi in z))
    safe = np.where(r > 0, r, 1.0)
    out = []
    for zi in z:
        K = np.where(r > 0, mu * h**n * zi * safe ** (-(n + alpha + 1)), 0.0)
        out.append(_readonly(K))
    return tuple(out)


@lru_cache(maxsize=32)
def laplacian_stencil(n: int, s: float, h: float, shape: tuple[int, ...]) -> tuple[np.ndarray, float, float]:
    """Weights for the hypersingular form of (-Delta)^(s/2), s in (0, 2).

    Returns (L, T, S): L_m = int_{cell m} |z|^(-n-s) for m != 0 (zero at
    m = 0); T = int over the complement of cell 0; S = (1/2n) int_{cell 0}
    |z|^(2-n-s), the weight of the discrete Laplacian in the self cell.
    """
    p = n + s
    if n == 1:
        (N,) = shape
        m = np.arange(-(N - 1), N, dtype=float)
        L = np.zeros(m.shape)
        nz = m != 0
        lo = np.abs(m[nz]) - 0.5
        L[nz] = interval_power_integral(lo * h, (lo + 1) * h, p)
        T = 2 * (h / 2) ** (-s) / s
        S = (h / 2) ** (2 - s) / (2 - s)
        return _readonly(L), T, S
    mx, my = np.meshgrid(*_offsets(shape), indexing="ij")
    nz = (mx != 0) | (my != 0)
    L = np.zeros(mx.shape)
    L[nz] = cell_power_integrals_2d(mx[nz], my[nz], h, p)
    from scipy import integrate

    # complement of the square of half-side h/2, eight octants
    T = 8 * integrate.quad(lambda t: ((h / 2) / math.cos(t)) ** (-s) / s, 0, math.pi / 4, epsabs=0, epsrel=1e-13)[0]
    # in two dimensions |z|^(2-n-s) = |z|^(-s)
    S = 0.25 * float(rect_power_integral(-h / 2, h / 2, -h / 2, h / 2, s))
    return _readonly(L), T, S


def _moment_1d(lo: np.ndarray, hi: np.ndarray, c: np.ndarray, p: float, k: int) -> np.ndarray:
    """int_lo^hi (z - c)^k |z|^(-p) dz on intervals away from 0 (k = 1, 2)."""
    sg = np.sign(c)
    a, b = np.minimum(np.abs(lo), np.abs(hi)), np.maximum(np.abs(lo), np.abs(hi))
    cc = np.abs(c)

    def J(q):  # int_a^b t^(q - p) dt
        e = q - p + 1
        if abs(e) < 1e-14:
            return np.log(b / a)
        return (b**e - a**e) / e

    if k == 1:
        return sg * (J(1) - cc * J(0))
    return J(2) - 2 * cc * J(1) + cc * cc * J(0)


@lru_cache(maxsize=16)
def laplacian_moments(n: int, s: float, h: float, shape: tuple[int, ...]) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Per-cell moments int_{cell m} (z_j - m_j h)^k |z|^(-n-s) for k = 1, 2 (zero at m = 0).

    They upgrade the piecewise-constant cell rule to a second-order Taylor
    rule about each cell centre.
    """
    p = n + s
    if n == 1:
        (N,) = shape
        m = np.arange(-(N - 1), N, dtype=float)
        nz = m != 0
        M1 = np.zeros(m.shape)
        M2 = np.zeros(m.shape)
        lo, hi, c = (m[nz] - 0.5) * h, (m[nz] + 0.5) * h, m[nz] * h
        M1[nz] = _moment_1d(lo, hi, c, p, 1)
        M2[nz] = _moment_1d(lo, hi, c, p, 2)
        return (_readonly(M1),), (_readonly(M2),)
    mx, my = np.meshgrid(*_offsets(shape), indexing="ij")
    nz = (mx != 0) | (my != 0)
    near = nz & (np.maximum(np.abs(mx), np.abs(my)) <= 3)
    far = nz & ~near
    M1 = [np.zeros(mx.shape), np.zeros(mx.shape)]
    M2 = [np.zeros(mx.shape), np.zeros(mx.shape)]
    for sel, split, order in ((near, 16, 6), (far, 1, 6)):
        cx, cy = mx[sel] * h, my[sel] * h
        sub = h / split
        t, w = np.polynomial.legendre.leggauss(order)
        offs = (np.arange(split) + 0.5) * sub - h / 2
        acc = np.zeros((4, cx.size))
        for ox in offs:
            for oy in offs:
                for ti, wi in zip(t * sub / 2, w * sub / 2):
                    for tj, wj in zip(t * sub / 2, w * sub / 2):
                        dx, dy = ox + ti, oy + tj
                        kern = wi * wj * ((cx + dx) ** 2 + (cy + dy) ** 2) ** (-p / 2)
                        acc[0] += dx * kern
                        acc[1] += dy * kern
                        acc[2] += dx * dx * kern
                        acc[3] += dy * dy * kern
        M1[0][sel], M1[1][sel], M2[0][sel], M2[1][sel] = acc
    return tuple(_readonly(a) for a in M1), tuple(_readonly(a) for a in M2)


# --------------------------------------------------------------------------
# cell-pair weights for double integrals


def _pair_weight_unit_2d(m1: int, m2: int, s: float) -> float:
    """int_{[-1,1]^2} (1-|z1|)(1-|z2|) |m + z|^(-2-s) dz for a neighbour offset m (|m|_inf = 1).

    Polar coordinates about the singular point -m make the integrand
    O(rho^-s) or better, which adaptive quadrature handles.
    """
    import warnings

    from scipy import integrate

    w = np.array([-m1, -m2], dtype=float)

    def inner(theta: float) -> float:
        e = np.array([math.cos(theta), math.sin(theta)])
        with np.errstate(divide="ignore"):
            t = np.where(e > 0, (1 - w) / e, np.where(e < 0, (-1 - w) / e, np.inf))
        rmax = float(np.min(t))
        if rmax <= 0:
            return 0.0

        def g(rho: float) -> float:
            z = w + rho * e
            return (1 - abs(z[0])) * (1 - abs(z[1])) * rho ** (-1 - s)

        breaks = [b for b in ((-w[0]) / e[0] if e[0] else -1, (-w[1]) / e[1] if e[1] else -1) if 0 < b < rmax]
        return integrate.quad(g, 0, rmax, points=breaks or None, limit=200, epsabs=0, epsrel=1e-11)[0]

    lo = math.atan2(*(reversed((-w).tolist()))) - math.pi / 2
    # the square lies in the half plane facing -w for edge neighbours and in a
    # quarter plane for corner neighbours
    span = math.pi if m1 == 0 or m2 == 0 else math.pi / 2
    if span < math.pi:
        lo = math.atan2(-w[1], -w[0]) - math.pi / 4
    cuts = [lo + span * k / 4 for k in range(5)]
    with warnings.catch_warnings():
        # the inner integrals hit round-off well below the requested 1e-11
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return sum(integrate.quad(inner, a, b, limit=200, epsabs=0, epsrel=1e-10)[0] for a, b in zip(cuts[:-1], cuts[1:]))


def _pair_weight_far_2d(mx: np.ndarray, my: np.ndarray, s: float, order: int) -> np.ndarray:
    t, w = np.polynomial.legendre.leggauss(order)
    # each quadrant of [-1, 1]^2 carries a bilinear weight
    acc = np.zeros(mx.shape)
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for ti, wi in zip(0.5 * (t + 1), 0.5 * w):
                for tj, wj in zip(0.5 * (t + 1), 0.5 * w):
                    z1, z2 = sx * ti, sy * tj
                    acc += wi * wj * (1 - ti) * (1 - tj) * ((mx + z1) ** 2 + (my + z2) ** 2) ** (-(2 + s) / 2)
    return acc


@lru_cache(maxsize=16)
def _pair_weights_unit_2d(s: float, shape: tuple[int, int]) -> np.ndarray:
    mx, my = np.meshgrid(*_offsets(shape), indexing="ij")
    rad = np.maximum(np.abs(mx), np.abs(my))
    P = np.zeros(mx.shape)
    mid = (rad >= 2) & (rad <= NEAR)
    far = rad > NEAR
    P[mid] = _pair_weight_far_2d(mx[mid].astype(float), my[mid].astype(float), s, 12)
    P[far] = _pair_weight_far_2d(mx[far].astype(float), my[far].astype(float), s, 4)
    edge = _pair_weight_unit_2d(1, 0, s)
    corner = _pair_weight_unit_2d(1, 1, s)
    P[(rad == 1) & ((mx == 0) | (my == 0))] = edge
    P[(rad == 1) & (mx != 0) & (my != 0)] = corner
    return P


@lru_cache(maxsize=32)
def pair_weights(n: int, s: float, h: float, shape: tuple[int, ...], rule: str = "cell") -> np.ndarray:
    """Weights P_m for double sums  sum_{i != j} P_{j-i} F(f_i, f_j)  with kernel |x - y|^(-n-s).

    ``cell``: P_m = int_{cell 0} int_{cell m} |x - y|^(-n-s), exact for
    piecewise-constant data; needs s < 1 (adjacent cells are otherwise
    non-integrable).  ``midpoint``: P_m = h^(2n) |m h|^(-n-s).
    """
    if rule == "cell" and not s < 1:
        raise ValueError(f"cell pair weights need n + s with s < 1, got s = {s:g}; use rule='midpoint'")
    grids = np.meshgrid(*_offsets(shape), indexing="ij")
    if rule == "midpoint":
        r = np.sqrt(sum((g * h) ** 2 for g in grids))
        P = np.where(r > 0, h ** (2 * n) * np.where(r > 0, r, 1.0) ** (-n - s), 0.0)
        return _readonly(P)
    if rule != "cell":
        raise ValueError(f"unknown pair rule {rule!r}")
    if n == 1:
        m = np.abs(grids[0]).astype(float)

        def G(t):
            return np.abs(t) ** (1 - s) / (s * (1 - s))

        # second difference of the double antiderivative of t^(-1-s)
        P = -(G(m + 1) - 2 * G(m) + G(m - 1))
        P[m == 0] = 0.0
        return _readonly(P * h ** (1 - s))
    return _readonly(_pair_weights_unit_2d(s, shape) * h ** (2 - s))


# --------------------------------------------------------------------------
# application


def correlate(f: np.ndarray, W: np.ndarray) -> np.ndarray:
    """out_i = sum_m W_{m} f_{i+m} over the grid (zero outside), by FFT."""
    B = W[tuple(slice(None, None, -1) for _ in range(W.ndim))]
    full = signal.fftconvolve(f, B, mode="full")
    sl = tuple(slice(N - 1, 2 * N - 1) for N in f.shape)
    return full[sl]


def convolve_kernel(f: np.ndarray, K: np.ndarray) -> np.ndarray:
    """out_i = sum_j K_{i-j} f_j for a centred kernel array K."""
    full = signal.fftconvolve(f, K, mode="full")
    sl = tuple(slice(N - 1, 2 * N - 1) for N in f.shape)
    return full[sl]
