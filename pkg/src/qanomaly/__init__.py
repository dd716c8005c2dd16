"""Anomaly-induced decoherence of an electron-monopole bound-state qubit.

Submodules
----------
specfun
    Modified Bessel functions I and K of real order.
boundstate
    Cutoff-regularized s-wave bound state, matching condition, energy.
anomaly
    Expectation value of the scale anomaly (quadrature, boundary term, closed form).
algebra
    Finite-difference check of the conformal algebra on a radial grid.
dynamics
    Driven non-Hermitian two-level evolution: closed forms and an adaptive integrator.
"""
__version__ = "0.1.0"

from ._jit import BACKEND
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GridSupportError,
    IntegratorError,
    QAnomalyError,
    QuadratureError,
)

__all__ = [
    "__version__",
    "BACKEND",
    "QAnomalyError",
    "DomainError",
    "ConfigError",
    "ConvergenceError",
    "QuadratureError",
    "IntegratorError",
    "GridSupportError",
]
