"""Normalising constants and explicit bounds of the fractional calculus.

Everything here is a deterministic function of (n, alpha[, region]).  The
gamma function is evaluated with a Lanczos approximation so that the
constants do not depend on the platform libm.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .geometry import BoundedRegion

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class Estimate(NamedTuple):
    value: float
    error: float


def gamma(x: float) -> float:
    """Gamma function for real arguments (Lanczos + reflection)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power to avoid overflow for large x
    half = t ** ((x + 0.5) / 2)
    return math.sqrt(2 * math.pi) * half * half * math.exp(-t) * acc


def check_order(alpha: float, lo: float, hi: float, name: str = "alpha", closed_lo: bool = False) -> float:
    alpha = float(alpha)
    ok = (lo <= alpha if closed_lo else lo < alpha) and alpha < hi
    if not ok or not math.isfinite(alpha):
        left = "[" if closed_lo else "("
        raise ValueError(f"{name}={alpha} outside admissible range {left}{lo}, {hi})")
    return alpha


def check_dim(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    return int(n)


def omega(n: float) -> float:
    """Volume of the unit ball in dimension n (n may be fractional)."""
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def mu(n: int, alpha: float) -> float:
    """Normalisation of the fractional gradient, alpha in (-1, 1)."""
    n = check_dim(n)
    alpha = check_order(alpha, -1.0, 1.0)
    return 2**alpha * math.pi ** (-n / 2) * gamma((n + alpha + 1) / 2) / gamma((1 - alpha) / 2)


def nu(n: int, alpha: float) -> float:
    """Normalisation of the fractional Laplacian of order alpha/2, alpha in (-1, 2), alpha != 0."""
    n = check_dim(n)
    alpha = check_order(alpha, -1.0, 2.0)
    if alpha == 0:
        raise ValueError("nu is undefined at alpha = 0 (the operator is the identity)")
    return 2**alpha * math.pi ** (-n / 2) * gamma((n + alpha) / 2) / gamma(-alpha / 2)


def riesz_constant(n: int, beta: float) -> float:
    """Prefactor of the Riesz potential of order beta in (0, n)."""
    check_order(beta, 0.0, float(n), name="beta")
    return gamma((n - beta) / 2) / (2**beta * math.pi ** (n / 2) * gamma(beta / 2))


def riesz_tail_bound(n: int, alpha: float, U: BoundedRegion) -> float:
    """Upper bound of sup_x int_U |y - x|^(1-n-alpha) dy."""
    n = check_dim(n)
    alpha = check_order(alpha, 0.0, 1.0)
    w = omega(n)
    s = n + alpha - 1
    return n / (1 - alpha) * (w * U.diam ** (1 - alpha) + (n * w / s) ** (s / n) * U.volume ** ((1 - alpha) / n))


def c_div_sup_constant(n: int, alpha: float, U: BoundedRegion) -> float:
    """Constant C_{n,alpha,U} bounding sup|div^alpha phi| by sup|div phi|."""
    n = check_dim(n)
    alpha = check_order(alpha, 0.0, 1.0)
    w = omega(n)
    s = n + alpha - 1
    lead = n * mu(n, alpha) / ((1 - alpha) * s)
    return lead * (w * U.diam ** (1 - alpha) + (n * w / s) ** (s / n) * U.volume ** ((1 - alpha) / n))


def gamma_translation_bound(n: int, alpha: float) -> float:
    """Closed upper bound n w_n (2 3^a / a + (n - a + 2)/(1 - a)) for the translation integral."""
    return n * omega(n) * (2 * 3**alpha / alpha + (n - alpha + 2) / (1 - alpha))


def _sphere_asymptotic(n: int, s: float) -> float:
    # int over S^{n-1} of |e1 - s (e1.w) w|
    if n == 1:
        return 2 * abs(1 - s)
    val, _ = integrate.quad(lambda t: math.sqrt(1 - 2 * s * math.cos(t) ** 2 + (s * math.cos(t)) ** 2), 0, 2 * math.pi, limit=200)
    return val


@lru_cache(maxsize=64)
def _translation_integral(n: int, alpha: float, R: float) -> Estimate:
    s = n + 1 - alpha

    if n == 1:
        def g(z):
            return math.copysign(abs(z) ** (alpha - 1), z) - math.copysign(abs(z - 1) ** (alpha - 1), z - 1)

        inner = 0.0
        err = 0.0
        for a, b in ((-2, 0), (0, 0.5), (0.5, 1), (1, 2)):
            v, e = integrate.quad(lambda z: abs(g(z)), a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
            inner += v
            err += e
        outer = 0.0
        for a, b in ((2, R), (-R, -2)):
            v, e = integrate.quad(lambda z: abs(g(z)), a, b, limit=400, epsabs=1e-13, epsrel=1e-12)
            outer += v
            err += e
    else:
        # polar coordinates about the origin; theta in (0, pi) doubled by symmetry
        def integrand(r, t):
            z1, z2 = r * math.cos(t), r * math.sin(t)
            d1, d2 = z1 - 1.0, z2
            rd = math.hypot(d1, d2)
            a1 = z1 * r ** (-s) - d1 * rd ** (-s)
            a2 = z2 * r ** (-s) - d2 * rd ** (-s)
            return math.hypot(a1, a2)

        def ring(r):
            pts = [0.0] if abs(r - 1) < 0.5 else None
            v, _ = integrate.quad(lambda t: integrand(r, t), 0, math.pi, points=pts, limit=200, epsabs=1e-11, epsrel=1e-10)
            return 2 * r * v

        inner = 0.0
        err = 0.0
        for a, b in ((0, 0.5), (0.5, 1), (1, 1.5), (1.5, 2)):
            v, e = integrate.quad(ring, a, b, limit=200, epsabs=1e-10, epsrel=1e-9)
            inner += v
            err += e
        outer, e = integrate.quad(ring, 2, R, limit=400, epsabs=1e-10, epsrel=1e-9)
        err += e
    tail = _sphere_asymptotic(n, s) * R ** (alpha - 1) / (1 - alpha)
    err += abs(tail) * (s + 2) ** 2 / R**2
    return Estimate(inner + outer + tail, err)


def gamma_translation_constant(n: int, alpha: float, R: float = 400.0) -> Estimate:
    """gamma_{n,alpha}: translation constant, by quadrature split at |z| = 2.

    The region |z| > R is replaced by the leading far-field term of the
    kernel difference; the neglected next order is folded into the error.
    """
    n = check_dim(n)
    alpha = check_order(alpha, 0.0, 1.0)
    if n > 2:
        raise ValueError("translation-constant quadrature is implemented for n <= 2")
    with warnings.catch_warnings():
        # near |z| = 1 the angular integrand has a cusp that quadpack flags
        # although the returned error estimate is honest
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        raw = _translation_integral(n, alpha, float(R))
    m = mu(n, -alpha)
    return Estimate(m * raw.value, m * raw.error)


def embedding_constant(n: int, alpha: float, beta: float) -> float:
    """C_{n,alpha,beta} of the embedding of BV^alpha into W^{beta,1}, 0 < beta < alpha < 1."""
    alpha = check_order(alpha, 0.0, 1.0)
    beta = check_order(beta, 0.0, 1.0, name="beta")
    if not beta < alpha:
        raise ValueError(f"embedding needs beta < alpha, got beta={beta}, alpha={alpha}")
    g = gamma_translation_constant(n, alpha).value
    return n * omega(n) * alpha * 2 ** ((alpha - beta) / beta) * g ** (beta / alpha) / (beta * (alpha - beta))


def unit_ball_perimeter(n: int, alpha: float) -> Estimate:
    """P_alpha(B_1): exact for n = 1, quadrature for n = 2."""
    n = check_dim(n)
    alpha = check_order(alpha, 0.0, 1.0)
    if n == 1:
        return Estimate(4 * 2 ** (1 - alpha) / (alpha * (1 - alpha)), 0.0)
    from .measures import ball_perimeter_2d

    return ball_perimeter_2d(alpha, 1.0)


def decay_constants(n: int, alpha: float) -> tuple[float, float]:
    """(A, B) = (10, 13) * mu_{n,alpha} * P_alpha(B_1)."""
    p = unit_ball_perimeter(n, alpha).value
    m = mu(n, alpha)
    return 10 * m * p, 13 * m * p


def density_bound(n: int, alpha: float) -> float:
    """A_{n,alpha} / omega_{n-alpha}: bound on the upper (n - alpha)-density."""
    return decay_constants(n, alpha)[0] / omega(n - alpha)


def constants_table(n: int, alpha: float) -> dict:
    """All constants for (n, alpha) in one record, for report provenance."""
    out = {"n": n, "alpha": alpha, "mu": mu(n, alpha), "mu_neg": mu(n, -alpha), "omega_n": omega(n)}
    if 0 < alpha < 1:
        out["nu"] = nu(n, alpha)
    return out


def sup_riesz_integral_bruteforce(n: int, alpha: float, U: BoundedRegion, samples: int = 41) -> float:
    """Brute-force max over a grid of x of int_U |y - x|^(1-n-alpha) dy (n = 1 exact per x)."""
    lo, hi = U.bounds()
    if n == 1:
        a, b = float(lo[0]), float(hi[0])
        xs = np.linspace(a - 0.25 * (b - a), b + 0.25 * (b - a), samples)
        e = 1 - alpha

        def val(x):
            # int_a^b |y - x|^(-alpha) dy
            left = abs(x - a) ** e * (1 if x > a else -1)
            right = abs(b - x) ** e * (1 if b > x else -1)
            return (left + right) / e

        return max(val(x) for x in xs)
    best = 0.0
    s = n + alpha - 1
    for x in np.linspace(lo[0], hi[0], samples // 4 + 1):
        for y in np.linspace(lo[1], hi[1], samples // 4 + 1):
            def ring(r, x=x, y=y):
                t = np.linspace(0, 2 * np.pi, 721)[:-1]
                p = np.stack([x + r * np.cos(t), y + r * np.sin(t)], -1)
                return r ** (1 - s) * np.mean(U.contains(p)) * 2 * np.pi

            v, _ = integrate.quad(ring, 0, U.diam, limit=200)
            best = max(best, v)
    return best
