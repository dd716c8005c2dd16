r"""Modified Bessel functions of real order.

Evaluation strategy

* :math:`I_\nu(x)` uses the ascending power series for ``x <= I_SERIES_CROSSOVER``
  and the Hankel large-argument expansion beyond it. All series terms are
  positive on the series side, so the only loss is rounding in the term
  recurrence; tails are accumulated with Neumaier compensated summation.
* :math:`K_\nu(x)` uses the trapezoidal rule on
  :math:`K_\nu(x) = \int_0^\infty e^{-x\cosh t}\cosh(\nu t)\,dt`.
  The integrand is entire and decays doubly exponentially, so the rule
  converges geometrically in the step size for every ``x > 0``.
* Negative orders are reduced with :math:`K_{-\nu}=K_\nu` and
  :math:`I_{-\nu} = I_\nu + (2/\pi)\sin(\nu\pi)K_\nu`.

The logarithmic derivative :math:`x I_\nu'(x)/I_\nu(x)` is provided through the
ratio of the two power series in :math:`(x/2)^2`; it is an even function of
``x`` and is the only route by which negative arguments are supported.
"""
import math

import numpy as np

from ._jit import njit
from .errors import ConvergenceError, DomainError

__all__ = [
    "I_SERIES_CROSSOVER",
    "LOGDERIV_RADIUS",
    "bessel_i",
    "bessel_k",
    "bessel_i_deriv",
    "bessel_k_deriv",
    "bessel_i_logderiv_series",
    "bessel_i_half",
    "bessel_k_half",
]

I_SERIES_CROSSOVER = 25.0
LOGDERIV_RADIUS = 50.0

_MAX_TERMS = 100000


@njit
def _i_series(nu, x):
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    y = 0.25 * x * x
    term = (0.5 * x) ** nu / math.gamma(nu + 1.0)
    s = term
    c = 0.0
    k = 0
    while k < _MAX_TERMS:
        k += 1
        term *= y / (k * (k + nu))
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        if term <= 1e-17 * s and k * (k + nu) > y:
            break
    return s + c


@njit
def _i_asymptotic(nu, x):
    mu = 4.0 * nu * nu
    term = 1.0
    s = 1.0
    c = 0.0
    prev = 1.0
    k = 0
    while k < 200:
        k += 1
        odd = 2.0 * k - 1.0
        term = -term * (mu - odd * odd) / (8.0 * k * x)
        if term == 0.0:
            break
        if abs(term) > abs(prev) and odd * odd > mu:
            # past the smallest term: the expansion started to diverge
            break
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        prev = term
        if abs(term) < 1e-17 * abs(s):
            break
    # split exp to delay overflow
    half = math.exp(0.5 * x)
    return half * ((s + c) * half / math.sqrt(2.0 * math.pi * x))


@njit
def _k_scaled(nu, x):
    """exp(x) * K_nu(x) for x > 0, nu >= 0."""
    h = 0.05
    if x > 144.0:
        h = 0.6 / math.sqrt(x)
    s = 0.0
    c = 0.0
    best = -1e308
    k = 0
    while k < _MAX_TERMS:
        t = k * h
        sh = math.sinh(0.5 * t)
        base = -2.0 * x * sh * sh
        e_up = base + nu * t
        f = 0.5 * (math.exp(e_up) + math.exp(base - nu * t))
        if k == 0:
            f *= 0.5
        u = s + f
        if abs(s) >= abs(f):
            c += (s - u) + f
        else:
            c += (f - u) + s
        s = u
        if e_up > best:
            best = e_up
        elif e_up < best - 45.0:
            break
        k += 1
    return h * (s + c)


@njit
def _bessel_k_scalar(nu, x):
    nu = abs(nu)
    ks = _k_scaled(nu, x)
    if x > 700.0:
        return ks * math.exp(-0.5 * x) * math.exp(-0.5 * x)
    return ks * math.exp(-x)


@njit
def _i_nonneg(nu, x):
    if x <= I_SERIES_CROSSOVER:
        return _i_series(nu, x)
    return _i_asymptotic(nu, x)


@njit
def _bessel_i_scalar(nu, x):
    if nu >= 0.0:
        return _i_nonneg(nu, x)
    a = -nu
    if a == math.floor(a):
        # integer order: I_{-n} = I_n (sin(n pi) only rounds to zero)
        return _i_nonneg(a, x)
    s = math.sin(a * math.pi)
    if x == 0.0:
        return math.inf
    return _i_nonneg(a, x) + (2.0 / math.pi) * s * _bessel_k_scalar(a, x)


@njit
def _logderiv_scalar(nu, x):
    y = 0.25 * x * x
    b = 1.0
    num = 0.0
    den = 1.0
    cn = 0.0
    cd = 0.0
    k = 0
    while k < _MAX_TERMS:
        k += 1
        b *= y / (k * (k + nu))
        kb = k * b
        t = num + kb
        if abs(num) >= kb:
            cn += (num - t) + kb
        else:
            cn += (kb - t) + num
        num = t
        t = den + b
        if abs(den) >= b:
            cd += (den - t) + b
        else:
            cd += (b - t) + den
        den = t
        if kb <= 1e-17 * num and k * (k + nu) > y:
            break
    return nu + 2.0 * (num + cn) / (den + cd)


@njit
def _vec_i(nu, x, out):
    for idx in range(x.size):
        out[idx] = _bessel_i_scalar(nu[idx], x[idx])


@njit
def _vec_k(nu, x, out):
    for idx in range(x.size):
        out[idx] = _bessel_k_scalar(nu[idx], x[idx])


@njit
def _vec_logderiv(nu, x, out):
    for idx in range(x.size):
        out[idx] = _logderiv_scalar(nu[idx], x[idx])


def _prepare(nu, x):
    nu_a, x_a = np.broadcast_arrays(
        np.asarray(nu, dtype=np.float64), np.asarray(x, dtype=np.float64)
    )
    if not (np.all(np.isfinite(x_a)) and np.all(np.isfinite(nu_a))):
        raise DomainError("Bessel arguments must be finite")
    # broadcast views are read-only; kernels want owned contiguous buffers
    return nu_a.copy(), x_a.copy()


def _finish(out, shape):
    if shape == ():
        return float(out[0])
    return out.reshape(shape)


def bessel_i(nu, x):
    """Modified Bessel function of the first kind, ``I_nu(x)``.

    Parameters
    ----------
    nu : float or array_like
        Real order. Validated to 1e-10 relative for ``0 <= nu <= 10``;
        negative orders go through the reflection formula.
    x : float or array_like
        Argument, ``x >= 0``.

    Returns
    -------
    float or ndarray
        Broadcast result; a Python float for scalar inputs.
    """
    nu_a, x_a = _prepare(nu, x)
    if np.any(x_a < 0):
        raise DomainError("bessel_i requires x >= 0; use bessel_i_logderiv_series for x < 0")
    shape = x_a.shape
    out = np.empty(x_a.size)
    _vec_i(np.ascontiguousarray(nu_a).ravel(), np.ascontiguousarray(x_a).ravel(), out)
    return _finish(out, shape)


def bessel_k(nu, x):
    """Modified Bessel function of the second kind, ``K_nu(x)``, for ``x > 0``."""
    nu_a, x_a = _prepare(nu, x)
    if np.any(x_a <= 0):
        raise DomainError("bessel_k requires x > 0")
    shape = x_a.shape
    out = np.empty(x_a.size)
    _vec_k(np.ascontiguousarray(nu_a).ravel(), np.ascontiguousarray(x_a).ravel(), out)
    return _finish(out, shape)


def bessel_i_deriv(nu, x):
    """``I_nu'(x) = (I_{nu-1}(x) + I_{nu+1}(x)) / 2``."""
    nu = np.asarray(nu, dtype=np.float64)
    return 0.5 * (np.asarray(bessel_i(nu - 1.0, x)) + np.asarray(bessel_i(nu + 1.0, x)))[()]


def bessel_k_deriv(nu, x):
    """``K_nu'(x) = -(K_{nu-1}(x) + K_{nu+1}(x)) / 2``."""
    nu = np.asarray(nu, dtype=np.float64)
    return -0.5 * (np.asarray(bessel_k(nu - 1.0, x)) + np.asarray(bessel_k(nu + 1.0, x)))[()]


def bessel_i_logderiv_series(nu, x):
    r"""``x I_nu'(x) / I_nu(x)`` from the ratio of power series.

    Writing :math:`I_\nu(x) = (x/2)^\nu \sum_k b_k y^k` with :math:`y = x^2/4`,
    the log-derivative equals :math:`\nu + 2\sum_k k b_k y^k / \sum_k b_k y^k`.
    Only ``y`` enters, so the result minus ``nu`` is exactly even in ``x`` and
    well defined for negative ``x``.

    Raises
    ------
    ConvergenceError
        If ``|x| > LOGDERIV_RADIUS``, the range over which the summation was
        validated against an extended-precision oracle.
    """
    nu_a, x_a = _prepare(nu, x)
    if np.any(nu_a < 0):
        raise DomainError("bessel_i_logderiv_series requires nu >= 0")
    if np.any(np.abs(x_a) > LOGDERIV_RADIUS):
        raise ConvergenceError(
            f"|x| exceeds the validated series radius {LOGDERIV_RADIUS}"
        )
    shape = x_a.shape
    out = np.empty(x_a.size)
    _vec_logderiv(np.ascontiguousarray(nu_a).ravel(), np.ascontiguousarray(x_a).ravel(), out)
    return _finish(out, shape)


def bessel_i_half(n, x):
    """Closed form of ``I_{n+1/2}(x)`` for integer ``n`` in {-1, 0, 1}."""
    x = np.asarray(x, dtype=np.float64)
    pref = np.sqrt(2.0 / (np.pi * x))
    if n == -1:
        return pref * np.cosh(x)
    if n == 0:
        return pref * np.sinh(x)
    if n == 1:
        # cosh x - sinh(x)/x cancels for small x; use its even series there
        x2 = x * x
        small = x2 * (1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (1.0 / 840.0 + x2 * (1.0 / 45360.0 + x2 / 3991680.0))))
        with np.errstate(divide="ignore", invalid="ignore"):
            big = np.cosh(x) - np.sinh(x) / x
        return pref * np.where(x < 0.2, small, big)
    raise DomainError("closed form provided for n in {-1, 0, 1} only")


def bessel_k_half(n, x):
    """Closed form of ``K_{n+1/2}(x)`` for integer ``n`` in {0, 1}."""
    x = np.asarray(x, dtype=np.float64)
    base = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x)
    if n == 0:
        return base
    if n == 1:
        return base * (1.0 + 1.0 / x)
    raise DomainError("closed form provided for n in {0, 1} only")
