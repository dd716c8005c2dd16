import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from qanomaly import specfun
from qanomaly.errors import ConvergenceError, DomainError

mpmath.mp.dps = 40


def _rel(a, b):
    return abs(a - b) / abs(b)


ORDERS = [0.0, 0.5, 1.0, 1.5, 2.5, 3.5, 4.25, 7.0, 10.0]
ARGS = [1e-3, 0.1, 0.7, 2.0, 5.0, 12.0, 24.9, 25.1, 31.0, 50.0]


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("x", ARGS)
def test_bessel_i_against_mpmath(nu, x):
    ref = float(mpmath.besseli(nu, x))
    assert _rel(specfun.bessel_i(nu, x), ref) < 1e-13


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("x", ARGS + [200.0, 700.0])
def test_bessel_k_against_mpmath(nu, x):
    ref = float(mpmath.besselk(nu, x))
    assert _rel(specfun.bessel_k(nu, x), ref) < 1e-13


@pytest.mark.parametrize("nu", [-0.5, -1.5, -2.25, -3.0])
@pytest.mark.parametrize("x", [0.3, 2.0, 9.0, 30.0])
def test_negative_order(nu, x):
    assert _rel(specfun.bessel_i(nu, x), float(mpmath.besseli(nu, x))) < 1e-12
    assert _rel(specfun.bessel_k(nu, x), specfun.bessel_k(-nu, x)) < 1e-15


def test_zero_argument():
    assert specfun.bessel_i(0.0, 0.0) == 1.0
    assert specfun.bessel_i(1.5, 0.0) == 0.0


def test_vectorized_matches_scalar():
    x = np.linspace(0.05, 40.0, 37)
    vec = specfun.bessel_i(2.5, x)
    assert vec.shape == x.shape
    np.testing.assert_array_equal(vec, [specfun.bessel_i(2.5, xi) for xi in x])
    np.testing.assert_allclose(specfun.bessel_k(1.5, x), special.kv(1.5, x), rtol=1e-13)
    np.testing.assert_allclose(specfun.bessel_i(1.5, x), special.iv(1.5, x), rtol=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        specfun.bessel_i(1.0, -1.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(1.0, 0.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(1.0, np.array([1.0, -2.0]))


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5, 3.5])
def test_wronskian(nu):
    x = np.geomspace(0.1, 30.0, 200)
    w = specfun.bessel_i(nu, x) * specfun.bessel_k_deriv(nu, x) - specfun.bessel_i_deriv(
        nu, x
    ) * specfun.bessel_k(nu, x)
    assert np.max(np.abs(w * x + 1.0)) < 1e-10


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_half_integer_i(n):
    x = np.geomspace(0.01, 40.0, 120)
    np.testing.assert_allclose(specfun.bessel_i_half(n, x), special.iv(n + 0.5, x), rtol=1e-12)
    np.testing.assert_allclose(specfun.bessel_i(n + 0.5, x), specfun.bessel_i_half(n, x), rtol=1e-12)


@pytest.mark.parametrize("n", [0, 1])
def test_half_integer_k(n):
    x = np.geomspace(0.01, 40.0, 120)
    np.testing.assert_allclose(specfun.bessel_k(n + 0.5, x), specfun.bessel_k_half(n, x), rtol=1e-12)


def test_logderiv_even_and_matches_ratio():
    x = np.array([0.3, 1.0, 4.0, 11.0, 30.0, 49.0])
    for nu in (1.5, 2.0, 2.5):
        lhs = specfun.bessel_i_logderiv_series(nu, x)
        ref = x * specfun.bessel_i_deriv(nu, x) / specfun.bessel_i(nu, x)
        np.testing.assert_allclose(lhs, ref, rtol=1e-12)
        np.testing.assert_array_equal(specfun.bessel_i_logderiv_series(nu, -x), lhs)
    assert specfun.bessel_i_logderiv_series(1.5, 0.0) == pytest.approx(1.5)


def test_logderiv_radius():
    with pytest.raises(ConvergenceError):
        specfun.bessel_i_logderiv_series(1.5, specfun.LOGDERIV_RADIUS + 1.0)


@given(
    nu=st.floats(0.0, 8.0),
    x=st.floats(0.05, 45.0),
)
def test_recurrence_i(nu, x):
    # I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu
    lhs = specfun.bessel_i(nu - 1.0, x) - specfun.bessel_i(nu + 1.0, x)
    rhs = 2.0 * nu / x * specfun.bessel_i(nu, x)
    scale = specfun.bessel_i(nu - 1.0, x) + specfun.bessel_i(nu + 1.0, x)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(
    nu=st.floats(0.0, 8.0),
    x=st.floats(0.05, 45.0),
)
def test_recurrence_k(nu, x):
    # K_{nu+1} - K_{nu-1} = (2 nu / x) K_nu
    lhs = specfun.bessel_k(nu + 1.0, x) - specfun.bessel_k(nu - 1.0, x)
    rhs = 2.0 * nu / x * specfun.bessel_k(nu, x)
    assert abs(lhs - rhs) <= 1e-12 * specfun.bessel_k(nu + 1.0, x)


@given(nu=st.floats(0.0, 6.0), x=st.floats(0.05, 45.0))
def test_wronskian_property(nu, x):
    w = specfun.bessel_i(nu, x) * specfun.bessel_k_deriv(nu, x) - specfun.bessel_i_deriv(
        nu, x
    ) * specfun.bessel_k(nu, x)
    assert math.isclose(w * x, -1.0, rel_tol=1e-11)


@given(x=st.floats(0.01, 45.0))
def test_monotone_in_order(x):
    # I_nu(x) decreases in nu >= 0 for fixed x > 0; K_nu increases
    i = [specfun.bessel_i(nu, x) for nu in (0.5, 1.5, 2.5)]
    k = [specfun.bessel_k(nu, x) for nu in (0.5, 1.5, 2.5)]
    assert i[0] > i[1] > i[2] > 0
    assert 0 < k[0] < k[1] < k[2]


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.5, 2.5, 3.5, 6.0, 10.0])
def test_series_asymptotic_seam(nu):
    x0 = specfun.I_SERIES_CROSSOVER
    below = specfun.bessel_i(nu, np.nextafter(x0, 0.0))
    above = specfun.bessel_i(nu, np.nextafter(x0, np.inf))
    # the true function changes by a relative ~ 4e-15 across two ulps
    assert abs(above / below - 1.0) < 1e-10
    assert _rel(above, float(mpmath.besseli(nu, np.nextafter(x0, np.inf)))) < 1e-13
