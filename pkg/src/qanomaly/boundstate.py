"""Cutoff-regularized s-wave bound state of the electron-monopole system.

Natural units (hbar = 1). The physical input is the charge product ``eg``
(``2 eg`` integer), the mass ``m`` and the cutoff length ``L``. Inside the
cutoff the potential vanishes and the radial function is
``A r^{-1/2} I_{|eg|+1/2}(beta r)``; outside it is ``B r^{-1/2} K_{1/2}(beta r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import specfun
from .errors import ConfigError, DomainError, QuadratureError

__all__ = [
    "PhysicalConfig",
    "BoundState",
    "SuperconformalIndices",
    "lowest_j",
    "superconformal_indices",
    "lambda_coupling",
    "heaviside",
    "smooth_step",
    "smooth_step_deriv",
    "potential_regularized",
    "matching_residual",
    "matching_residual_truncated",
    "small_cutoff_root",
    "bound_energy",
    "make_bound_state",
    "bound_state_from_beta",
    "wavefunction",
    "norm_integral",
]

# exterior integrand e^{-2 beta r}: truncating at L + 18/beta leaves e^{-36} ~ 2e-16
_TAIL_DECAYS = 18.0


@dataclass(frozen=True)
class PhysicalConfig:
    """Charges, mass and cutoff. ``cutoff`` is both the regulator L and the scale Lambda."""

    e: float = 1.0
    g: float = 1.0
    m: float = 1.0
    cutoff: float = 1.0

    def __post_init__(self):
        for name in ("e", "g", "m", "cutoff"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        two_eg = 2.0 * self.e * self.g
        if two_eg == 0.0:
            raise ConfigError("charge quantization: e*g must be nonzero")
        if abs(round(two_eg) - two_eg) > 1e-12:
            raise ConfigError(
                f"charge quantization: 2*e*g must be an integer, got {two_eg!r}"
            )
        if not self.m > 0:
            raise ConfigError(f"mass m must be positive, got {self.m!r}")
        if not self.cutoff > 0:
            raise ConfigError(f"cutoff must be positive, got {self.cutoff!r}")

    @property
    def eg(self) -> float:
        return self.e * self.g

    @property
    def abs_eg(self) -> float:
        # snap to the half-integer lattice guaranteed by validation
        return abs(round(2.0 * self.eg)) / 2.0

    @property
    def interior_order(self) -> float:
        return self.abs_eg + 0.5


@dataclass(frozen=True)
class SuperconformalIndices:
    j: float
    alpha: int
    d_j: float
    delta: float

    @property
    def k_order(self) -> float:
        """Order ``2 delta - 1`` of the Macdonald function in the unregularized solution."""
        return 2.0 * self.delta - 1.0


def lowest_j(config: PhysicalConfig) -> float:
    """Total angular momentum of the sector holding the normalizable state."""
    return config.abs_eg - 0.5


def superconformal_indices(j: float, config: PhysicalConfig, alpha: int) -> SuperconformalIndices:
    if alpha not in (1, -1):
        raise DomainError(f"alpha must be +1 or -1, got {alpha!r}")
    steps = j - lowest_j(config)
    if steps < -1e-12 or abs(steps - round(steps)) > 1e-12:
        raise DomainError(
            f"j = {j!r} is not in the ladder |eg| - 1/2 + n for eg = {config.eg!r}"
        )
    d2 = (j + 0.5) ** 2 - config.eg**2
    if d2 < -1e-12:
        raise DomainError(f"(j+1/2)^2 < (eg)^2 for j = {j!r}")
    d_j = math.sqrt(max(d2, 0.0))
    delta = 0.5 - 0.25 * alpha + 0.5 * d_j
    return SuperconformalIndices(j=j, alpha=alpha, d_j=d_j, delta=delta)


def lambda_coupling(config: PhysicalConfig) -> float:
    """Strength of the effective attractive ``-lambda/r^2`` potential."""
    a = config.abs_eg
    return (1.0 + 1.0 / a) * a * a / (2.0 * config.m)


def heaviside(u):
    """Unit step with the midpoint convention ``H(0) = 1/2``."""
    return np.heaviside(u, 0.5)


def smooth_step(u, width):
    """Logistic switch ``1 / (1 + exp(-u/width))``; reduces to :func:`heaviside` at width 0."""
    if width == 0:
        return heaviside(u)
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(u, dtype=np.float64) / width))


def smooth_step_deriv(u, width):
    """Derivative of :func:`smooth_step` with respect to ``u``."""
    q = np.exp(-np.abs(np.asarray(u, dtype=np.float64)) / width)
    return q / (width * (1.0 + q) ** 2)


def potential_regularized(r, lam: float, cutoff: float, smoothing: float = 0.0):
    """``-lam / r^2`` switched on outside ``cutoff`` (exact step when ``smoothing == 0``)."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0):
        raise DomainError("potential_regularized requires r > 0")
    out = -lam / r**2 * smooth_step(r - cutoff, smoothing)
    return out[()]


def matching_residual(x, config: PhysicalConfig):
    """Derivative-continuity residual at the cutoff as a function of ``x = beta L``.

    ``f(x) = 1 + 2x + 2 x I_nu'(x)/I_nu(x)`` with ``nu = |eg| + 1/2``. The
    identity ``I_{nu-1} + I_{nu+1} = 2 I_nu'`` makes ``f(x) = 0`` the same
    statement as matching the logarithmic derivatives of the two pieces.
    """
    nu = config.interior_order
    return 1.0 + 2.0 * np.asarray(x, dtype=np.float64) + 2.0 * np.asarray(
        specfun.bessel_i_logderiv_series(nu, x)
    )[()]


def matching_residual_truncated(x, config: PhysicalConfig):
    """Constant plus linear part of :func:`matching_residual` (the log-derivative has no odd terms)."""
    return 1.0 + 2.0 * config.interior_order + 2.0 * np.asarray(x, dtype=np.float64)


def small_cutoff_root(config: PhysicalConfig) -> float:
    """Root of the truncated residual, ``x = -(|eg| + 1)``.

    Negative, although ``beta`` is a positive square root; see
    :func:`make_bound_state` for the sign adopted downstream.
    """
    return -(config.abs_eg + 1.0)


def bound_energy(config: PhysicalConfig) -> float:
    return -((config.abs_eg + 1.0) ** 2) / (2.0 * config.m * config.cutoff**2)


@dataclass(frozen=True)
class BoundState:
    """Piecewise radial state. ``norm_exterior``/``norm_interior`` are B and A."""

    beta: float
    energy: float
    norm_exterior: float
    norm_interior: float
    config: PhysicalConfig
    normalization: str = "renormalized"
    norm_error: float = field(default=0.0, compare=False)

    @property
    def cutoff(self) -> float:
        return self.config.cutoff

    @property
    def x(self) -> float:
        """Dimensionless cutoff ``beta * L``."""
        return self.beta * self.config.cutoff

    @property
    def limit_norm_exterior(self) -> float:
        """``B = 2 beta / sqrt(pi)``, exact only as ``beta L -> 0``."""
        return 2.0 * self.beta / math.sqrt(math.pi)

    def interior(self, r):
        r = np.asarray(r, dtype=np.float64)
        nu = self.config.interior_order
        return (self.norm_interior * specfun.bessel_i(nu, self.beta * r) / np.sqrt(r))[()]

    def exterior(self, r):
        r = np.asarray(r, dtype=np.float64)
        return (self.norm_exterior * specfun.bessel_k(0.5, self.beta * r) / np.sqrt(r))[()]

    def __call__(self, r):
        return wavefunction(r, self)


def _interior_from_continuity(B, beta, config):
    x = beta * config.cutoff
    return B * specfun.bessel_k(0.5, x) / specfun.bessel_i(config.interior_order, x)


def norm_integral(beta: float, B: float, A: float, config: PhysicalConfig):
    """``int_0^inf r^2 |Phi(r)|^2 dr`` by adaptive quadrature plus an analytic tail.

    Returns ``(value, error_estimate)``.
    """
    L = config.cutoff
    nu = config.interior_order

    def f_in(r):
        return A * A * r * specfun.bessel_i(nu, beta * r) ** 2

    def f_out(r):
        return B * B * r * specfun.bessel_k(0.5, beta * r) ** 2

    r_max = L + _TAIL_DECAYS / beta
    # K_{1/2}(z)^2 = pi e^{-2z} / (2z): the remaining tail is elementary
    tail = B * B * math.pi * math.exp(-2.0 * beta * r_max) / (4.0 * beta * beta)
    v_in, e_in, info_in = integrate.quad(f_in, 0.0, L, epsabs=0.0, epsrel=1e-13, limit=200, full_output=1)[:3]
    v_out, e_out, info_out = integrate.quad(
        f_out, L, r_max, epsabs=0.0, epsrel=1e-13, limit=200, full_output=1
    )[:3]
    total = v_in + v_out + tail
    err = e_in + e_out
    if err > 1e-9 * abs(total):
        raise QuadratureError("normalization integral did not converge", err)
    return total, err


def bound_state_from_beta(config: PhysicalConfig, beta: float, normalize: bool = True) -> BoundState:
    """Bound-state record for an arbitrary ``beta > 0`` at the configured cutoff.

    With ``normalize=False`` the exterior constant is the small-cutoff value
    ``2 beta / sqrt(pi)``; otherwise the piecewise state is rescaled to unit
    norm numerically.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    B = 2.0 * beta / math.sqrt(math.pi)
    A = _interior_from_continuity(B, beta, config)
    norm_err = 0.0
    label = "limit"
    if normalize:
        n2, norm_err = norm_integral(beta, B, A, config)
        s = 1.0 / math.sqrt(n2)
        B *= s
        A *= s
        label = "renormalized"
    return BoundState(
        beta=beta,
        energy=-beta * beta / (2.0 * config.m),
        norm_exterior=B,
        norm_interior=A,
        config=config,
        normalization=label,
        norm_error=norm_err,
    )


def make_bound_state(config: PhysicalConfig, normalize: bool = True) -> BoundState:
    """Regularized bound state with ``beta = (|eg| + 1) / L``.

    The magnitude of the small-cutoff root is used so that ``beta`` stays a
    positive square root of ``-2 m E``; the signed root is available from
    :func:`small_cutoff_root`.
    """
    beta = (config.abs_eg + 1.0) / config.cutoff
    return bound_state_from_beta(config, beta, normalize=normalize)


def wavefunction(r, state: BoundState):
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0):
        raise DomainError("wavefunction requires r > 0")
    inside = r < state.cutoff
    out = np.empty(r.shape)
    if np.any(inside):
        out[inside] = state.interior(r[inside])
    if np.any(~inside):
        out[~inside] = state.exterior(r[~inside])
    return out[()]
