import cmath
import math

import pytest

from arithmos.special import (binomial, gamma, hurwitz_zeta, lerch_inputs,
                              log_gamma, riemann_zeta)

scipy_special = pytest.importorskip("scipy.special")


def test_gamma_integers():
    for n in range(1, 12):
        assert gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-13)


def test_gamma_half():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_gamma_reflection_left_half_plane():
    z = -2.3 + 0.7j
    lhs = gamma(z) * gamma(1 - z)
    rhs = math.pi / cmath.sin(math.pi * z)
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_gamma_pole_raises():
    with pytest.raises(ValueError):
        gamma(0)
    with pytest.raises(ValueError):
        gamma(-3)


def test_gamma_against_scipy_complex_grid():
    for re in (0.3, 1.7, 4.2):
        for im in (-2.0, 0.5, 3.1):
            z = complex(re, im)
            ref = complex(scipy_special.gamma(z))
            assert abs(gamma(z) - ref) < 1e-12 * abs(ref)


def test_log_gamma_matches_gamma():
    for z in (0.7, 2.5, 5.0 + 1.0j):
        assert abs(cmath.exp(log_gamma(z)) - gamma(z)) < 1e-12 * abs(gamma(z))


def test_riemann_zeta_known_values():
    assert riemann_zeta(2).real == pytest.approx(math.pi ** 2 / 6, rel=1e-13)
    assert riemann_zeta(4).real == pytest.approx(math.pi ** 4 / 90, rel=1e-13)


def test_hurwitz_against_scipy():
    for s in (1.5, 2.0, 3.7, 6.0):
        for a in (0.25, 1.0, 2.5):
            ref = scipy_special.zeta(s, a)
            assert hurwitz_zeta(s, a).real == pytest.approx(ref, rel=1e-12)


def test_hurwitz_at_zero_closed_form():
    for a in (0.5, 1.0, 1.7, 3.2, 5.0):
        assert hurwitz_zeta(0.0, a).real == pytest.approx(0.5 - a, abs=1e-12)


def test_hurwitz_derivative_lerch_identity():
    # zeta_H'(0, a) = log Gamma(a) - log(2 pi)/2, continued by Euler-Maclaurin
    for a in (0.5, 1.0, 2.2, 4.8):
        em = hurwitz_zeta(0.0, a, derivative=True).real
        closed = (log_gamma(a) - 0.5 * math.log(2 * math.pi)).real
        assert em == pytest.approx(closed, abs=1e-11)


def test_lerch_inputs_report():
    rep = lerch_inputs(1.3)
    assert rep["zeta0_error"] < 1e-10
    assert rep["dzeta0_error"] < 1e-10


def test_hurwitz_pole_and_domain():
    with pytest.raises(ValueError):
        hurwitz_zeta(1.0, 2.0)
    with pytest.raises(ValueError):
        hurwitz_zeta(2.0, -1.0)


def test_binomial_integer_cases():
    assert binomial(5, 2) == pytest.approx(10.0)
    assert binomial(7, 0) == pytest.approx(1.0)


def test_binomial_noninteger_vs_gamma():
    x, k = 3.7, 5
    ref = gamma(x + 1) / (gamma(x - k + 1) * math.factorial(k))
    assert binomial(x, k) == pytest.approx(ref, rel=1e-11)


def test_hurwitz_complex_argument():
    mpmath = pytest.importorskip("mpmath")
    s = 2.5 + 1.2j
    a = 1.5
    ref = complex(mpmath.zeta(s, a))
    assert abs(hurwitz_zeta(s, a) - ref) < 1e-11 * abs(ref)
