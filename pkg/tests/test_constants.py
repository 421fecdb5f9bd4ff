from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar import constants as C
from fracvar.geometry import BoundedRegion


@given(st.floats(min_value=0.05, max_value=30.0))
def test_lanczos_gamma_matches_math(x):
    assert C.gamma(x) == pytest.approx(math.gamma(x), rel=1e-12)


@given(st.floats(min_value=-4.9, max_value=-0.01).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_lanczos_gamma_reflection(x):
    assert C.gamma(x) == pytest.approx(math.gamma(x), rel=1e-10)


def test_gamma_poles_raise():
    with pytest.raises(ValueError):
        C.gamma(-2.0)


def test_unit_ball_volumes():
    assert C.omega(1) == pytest.approx(2.0)
    assert C.omega(2) == pytest.approx(math.pi)
    assert C.omega(3) == pytest.approx(4 * math.pi / 3)


def test_mu_closed_values():
    # mu_{1,1/2} = 2^{1/2} Gamma(5/4) / (sqrt(pi) Gamma(1/4))
    expected = math.sqrt(2) * math.gamma(1.25) / (math.sqrt(math.pi) * math.gamma(0.25))
    assert C.mu(1, 0.5) == pytest.approx(expected, rel=1e-13)
    # the negative order used by the inverse operators: mu_{1,-1/2} = 1/sqrt(2 pi)
    assert C.mu(1, -0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-13)


def test_nu_negative_order_is_inverse_sqrt_two_pi():
    # the example value printed in the requirements is wrong; the formula gives 1/sqrt(2 pi)
    assert C.nu(1, -0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-13)


def test_nu_rejects_zero_and_out_of_range():
    with pytest.raises(ValueError):
        C.nu(1, 0.0)
    with pytest.raises(ValueError):
        C.nu(1, 2.0)


@pytest.mark.parametrize("bad", [1.0, -1.0, 1.5, float("nan")])
def test_mu_rejects_orders_outside_range(bad):
    with pytest.raises(ValueError, match="admissible range"):
        C.mu(1, bad)


def test_translation_constant_one_dimension():
    est = C.gamma_translation_constant(1, 0.5)
    assert est.value == pytest.approx(3.191538, abs=2e-6)
    assert est.error < 1e-5
    assert C.gamma_translation_bound(1, 0.5) == pytest.approx(23.8564, abs=1e-4)
    assert est.value <= C.gamma_translation_bound(1, 0.5)


def test_translation_constant_two_dimensions():
    est = C.gamma_translation_constant(2, 0.5)
    assert est.value == pytest.approx(6.139566, abs=1e-5)
    assert est.value <= C.gamma_translation_bound(2, 0.5)


def test_embedding_constant_formula():
    alpha, beta = 0.5, 0.25
    g = C.gamma_translation_constant(1, alpha).value
    expected = 1 * 2.0 * alpha * 2 ** ((alpha - beta) / beta) * g ** (beta / alpha) / (beta * (alpha - beta))
    assert C.embedding_constant(1, alpha, beta) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        C.embedding_constant(1, 0.5, 0.6)


def test_decay_constants_ratio_and_density():
    A, B = C.decay_constants(1, 0.5)
    assert B / A == pytest.approx(1.3)
    p = C.unit_ball_perimeter(1, 0.5).value
    assert A == pytest.approx(10 * C.mu(1, 0.5) * p)
    assert C.density_bound(1, 0.5) == pytest.approx(A / C.omega(0.5))


def test_unit_disk_perimeter_frozen():
    assert C.unit_ball_perimeter(2, 0.5).value == pytest.approx(124.26127755565818, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.2, max_value=3.0))
def test_sup_constant_dominates_bruteforce_integral(alpha, radius):
    U = BoundedRegion.interval(-radius, radius)
    # the constant is n mu / (n + alpha - 1) times a bound on the Riesz-type integral
    lead = C.mu(1, alpha) / alpha
    brute = C.sup_riesz_integral_bruteforce(1, alpha, U)
    assert lead * brute <= C.c_div_sup_constant(1, alpha, U) * (1 + 1e-9)


def test_constants_table_keys():
    table = C.constants_table(2, 0.5)
    assert set(table) >= {"mu", "mu_neg", "omega_n", "nu"}
