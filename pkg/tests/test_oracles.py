from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from fracvar import constants as C
from fracvar import oracles as O


def test_interval_perimeter_closed_form():
    assert O.interval_perimeter(0, 1, 0.5) == pytest.approx(16.0)
    for alpha in (0.25, 0.5, 0.75):
        assert O.interval_perimeter(0, 1, alpha) == pytest.approx(4 / (alpha * (1 - alpha)))


def test_interval_variation_value_and_margin():
    assert O.interval_gradient_l1(0, 1, 0.5) == pytest.approx(2.25675833419, rel=1e-10)
    for alpha in (0.25, 0.5, 0.75):
        ratio = O.interval_gradient_l1(0, 1, alpha) / (C.mu(1, alpha) * O.interval_perimeter(0, 1, alpha))
        assert 1 - ratio == pytest.approx(O.strict_margin(alpha), rel=1e-12)
    assert O.strict_margin(0.5) == pytest.approx(1 - 2**-0.5)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.8, 0.95])
def test_interval_l1_matches_numeric_integration(alpha):
    assert O.interval_gradient_l1_numeric(0, 1, alpha) == pytest.approx(O.interval_gradient_l1(0, 1, alpha), rel=1e-8)


def test_interval_gradient_symmetry_and_poles():
    x = np.array([-0.7, 0.2, 0.4])
    g = O.interval_gradient(0, 1, 0.5, x)
    np.testing.assert_allclose(O.interval_gradient(0, 1, 0.5, 1 - x), -g)
    assert O.interval_gradient(0, 1, 0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        O.interval_gradient(0, 1, 0.5, 1.0)


def test_interval_union_reduces_to_single_interval():
    assert O.interval_union_gradient_l1([(0.0, 1.0)], 0.5) == pytest.approx(O.interval_gradient_l1(0, 1, 0.5), rel=1e-8)


def _fourier_gradient_1d(alpha, x):
    # symbol i xi |xi|^(alpha-1) applied to exp(-x^2/2)
    val, _ = integrate.quad(lambda k: k**alpha * math.exp(-k * k / 2) * math.sin(k * x), 0, 40, limit=400)
    return -2 * val / math.sqrt(2 * math.pi)


def _fourier_laplacian_1d(s, x):
    val, _ = integrate.quad(lambda k: k**s * math.exp(-k * k / 2) * math.cos(k * x), 0, 40, limit=400)
    return 2 * val / math.sqrt(2 * math.pi)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_gaussian_gradient_against_fourier_integral(alpha):
    for x in (0.3, 1.0, 2.5):
        got = O.gaussian_frac_gradient(1, alpha, np.array([x]))[0, 0]
        assert got == pytest.approx(_fourier_gradient_1d(alpha, x), rel=1e-7)


@pytest.mark.parametrize("s", [-0.5, 0.5, 1.0, 1.5])
def test_gaussian_laplacian_against_fourier_integral(s):
    for x in (0.0, 0.7, 2.0):
        assert O.gaussian_frac_laplacian(1, s, x) == pytest.approx(_fourier_laplacian_1d(s, x), rel=1e-7, abs=1e-12)


def test_gaussian_gradient_sigma_scaling():
    x = np.array([0.4, 1.1])
    a = O.gaussian_frac_gradient(1, 0.5, 2 * x, sigma=2.0)
    b = O.gaussian_frac_gradient(1, 0.5, x, sigma=1.0)
    np.testing.assert_allclose(a, 2**-0.5 * b, rtol=1e-12)


def test_atom_pairing_constant():
    # D^a f_{0,1,1/2} pairs phi to sqrt(2 pi) (phi(0) - phi(1))
    assert O.atom_pairing_expected(1.0, 0.0, 0.5) == pytest.approx(math.sqrt(2 * math.pi))


def test_ramp_gradient_vanishes_at_centre():
    g = O.ramp_gradient(0.1, 0.5, 0.0, 0.5, np.array([0.0]))
    assert abs(float(np.ravel(g)[0])) < 1e-12
