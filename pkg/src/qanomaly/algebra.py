"""Finite-difference check of the conformal algebra on a radial grid.

Operators act on values of a radial function on a uniform grid with the
``r^2 dr`` measure:

* ``H = -(1/2m)(d^2/dr^2 + (2/r) d/dr) + V(r)``
* ``D = (i/4)(2 r d/dr + 3)`` (dilatation at t = 0)
* ``K = (m/2) r^2`` (special conformal generator at t = 0)

With these, ``i[H, D] + H = (1 + (r/2) d/dr) V`` holds as an operator
identity, and ``[H, K] = 2iD``, ``[D, K] = iK`` hold for any
multiplicative ``V``. Second-order central differences make every residual
``O(h^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DomainError, GridSupportError

__all__ = [
    "RadialGrid",
    "GridOperator",
    "build_H",
    "build_D",
    "build_K",
    "commutator",
    "gaussian_bump",
    "check_support",
    "anomaly_identity_residual",
    "kinematic_commutator_residuals",
    "hermiticity_defect",
    "convergence_orders",
    "refinement_study",
    "named_potentials",
]

MARGIN_NODES = 5
SUPPORT_TOL = 1e-14


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n: int

    def __post_init__(self):
        if not self.r_min > 0:
            raise DomainError("grid must exclude the origin (r_min > 0)")
        if not self.r_max > self.r_min:
            raise DomainError("r_max must exceed r_min")
        if self.n < 16:
            raise DomainError("grid needs at least 16 nodes")

    @property
    def spacing(self) -> float:
        return (self.r_max - self.r_min) / (self.n - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n)

    @property
    def weights(self) -> np.ndarray:
        return self.r**2 * self.spacing

    @property
    def interior(self) -> np.ndarray:
        """Mask of nodes at least ``MARGIN_NODES`` spacings from either end."""
        mask = np.ones(self.n, dtype=bool)
        mask[:MARGIN_NODES] = False
        mask[-MARGIN_NODES:] = False
        return mask

    def refined(self, n: int) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_max, n)


@dataclass
class GridOperator:
    matrix: sparse.csr_matrix
    grid: RadialGrid

    @property
    def measure(self) -> np.ndarray:
        return self.grid.weights

    def __call__(self, psi):
        return self.matrix @ psi

    def __matmul__(self, other):
        if isinstance(other, GridOperator):
            return GridOperator((self.matrix @ other.matrix).tocsr(), self.grid)
        return self.matrix @ other

    def __add__(self, other):
        return GridOperator((self.matrix + other.matrix).tocsr(), self.grid)

    def __sub__(self, other):
        return GridOperator((self.matrix - other.matrix).tocsr(), self.grid)

    def __rmul__(self, c):
        return GridOperator((c * self.matrix).tocsr(), self.grid)

    def inner(self, phi, psi) -> complex:
        return complex(np.sum(self.measure * np.conj(phi) * psi))

    def norm(self, psi, mask=None) -> float:
        w = self.measure if mask is None else self.measure[mask]
        p = psi if mask is None else psi[mask]
        return float(np.sqrt(np.sum(w * np.abs(p) ** 2)))


def _first_derivative(n, h):
    return sparse.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2.0 * h)


def _second_derivative(n, h):
    return sparse.diags(
        [np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]
    ) / (h * h)


def build_H(grid: RadialGrid, m: float, V) -> GridOperator:
    """Radial Hamiltonian. ``V`` is a callable of ``r`` (or ``None`` for the free case).

    Boundary rows use zero values outside the grid; they are never part of
    a residual norm.
    """
    r = grid.r
    h = grid.spacing
    v = np.zeros_like(r) if V is None else np.asarray(V(r), dtype=np.float64) * np.ones_like(r)
    if not np.all(np.isfinite(v)):
        bad = r[~np.isfinite(v)]
        raise DomainError(f"potential is singular on grid node(s) {bad[:3]}")
    n = grid.n
    lap = _second_derivative(n, h) + sparse.diags(2.0 / r) @ _first_derivative(n, h)
    mat = -lap / (2.0 * m) + sparse.diags(v)
    return GridOperator(sparse.csr_matrix(mat, dtype=np.complex128), grid)


def build_D(grid: RadialGrid) -> GridOperator:
    r = grid.r
    n = grid.n
    gen = 2.0 * sparse.diags(r) @ _first_derivative(n, grid.spacing) + 3.0 * sparse.identity(n)
    return GridOperator(sparse.csr_matrix(0.25j * gen), grid)


def build_K(grid: RadialGrid, m: float) -> GridOperator:
    return GridOperator(sparse.csr_matrix(sparse.diags(0.5 * m * grid.r**2), dtype=np.complex128), grid)


def commutator(a: GridOperator, b: GridOperator) -> GridOperator:
    return a @ b - b @ a


def gaussian_bump(center: float = 2.0, width: float = 0.17):
    def psi(r):
        return np.exp(-0.5 * ((r - center) / width) ** 2)

    return psi


def check_support(grid: RadialGrid, psi_values) -> None:
    """Raise :class:`GridSupportError` unless the test function vanishes near both ends."""
    band = ~grid.interior
    peak = np.max(np.abs(psi_values))
    edge = np.max(np.abs(psi_values[band]))
    if peak == 0 or edge > SUPPORT_TOL * peak:
        raise GridSupportError(
            f"test function is {edge / max(peak, 1e-300):.2e} of its peak within "
            f"{MARGIN_NODES} spacings of the grid ends (limit {SUPPORT_TOL:g})"
        )


def _sample(grid, psi):
    vals = np.asarray(psi(grid.r) if callable(psi) else psi, dtype=np.complex128)
    check_support(grid, vals)
    return vals


def anomaly_identity_residual(grid: RadialGrid, m: float, V, dV, psi) -> float:
    """``||(i[H,D] + H) psi - ((1 + (r/2) d/dr) V) psi|| / ||psi||`` on interior nodes."""
    p = _sample(grid, psi)
    r = grid.r
    H = build_H(grid, m, V)
    D = build_D(grid)
    lhs = 1j * (H @ (D @ p) - D @ (H @ p)) + H @ p
    if V is None:
        w = np.zeros_like(r)
    else:
        w = np.asarray(V(r), dtype=np.float64) + 0.5 * r * np.asarray(dV(r), dtype=np.float64)
    res = lhs - w * p
    mask = grid.interior
    return H.norm(res, mask) / H.norm(p, mask)


def kinematic_commutator_residuals(grid: RadialGrid, m: float, V, psi):
    """``(||([H,K] - 2iD) psi||, ||([D,K] - iK) psi||)``, each over ``||psi||``."""
    p = _sample(grid, psi)
    H = build_H(grid, m, V)
    D = build_D(grid)
    K = build_K(grid, m)
    hk = H @ (K @ p) - K @ (H @ p) - 2j * (D @ p)
    dk = D @ (K @ p) - K @ (D @ p) - 1j * (K @ p)
    mask = grid.interior
    norm = H.norm(p, mask)
    return H.norm(hk, mask) / norm, H.norm(dk, mask) / norm


def hermiticity_defect(op: GridOperator, phi, psi) -> float:
    """``|<phi, O psi> - <O phi, psi>|`` under the ``r^2 dr`` measure."""
    return abs(op.inner(phi, op(psi)) - op.inner(op(phi), psi))


def convergence_orders(spacings, residuals) -> np.ndarray:
    """Observed order between consecutive refinements."""
    h = np.asarray(spacings, dtype=np.float64)
    e = np.asarray(residuals, dtype=np.float64)
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


def _harmonic(m, omega):
    return (lambda r: 0.5 * m * omega**2 * r**2, lambda r: m * omega**2 * r)


def _inverse_square(lam):
    return (lambda r: -lam / r**2, lambda r: 2.0 * lam / r**3)


def named_potentials(m: float = 1.0, lam: float = 1.0, omega: float = 1.0) -> dict:
    """Named potentials ``{name: (V, dV)}`` used by the refinement study."""
    return {
        "free": (None, None),
        "inverse_square": _inverse_square(lam),
        "harmonic": _harmonic(m, omega),
    }


def refinement_study(
    r_min: float = 0.5,
    r_max: float = 3.5,
    sizes=(256, 512, 1024),
    m: float = 1.0,
    lam: float = 1.0,
    omega: float = 1.0,
    psi=None,
) -> dict:
    """Residuals of all three identities for each named potential across grid sizes."""
    if psi is None:
        psi = gaussian_bump()
    grids = [RadialGrid(r_min, r_max, n) for n in sizes]
    h = [g.spacing for g in grids]
    report = {"sizes": list(sizes), "spacings": h, "potentials": {}}
    for name, (V, dV) in named_potentials(m, lam, omega).items():
        anom, hk, dk = [], [], []
        for g in grids:
            anom.append(anomaly_identity_residual(g, m, V, dV, psi))
            a, b = kinematic_commutator_residuals(g, m, V, psi)
            hk.append(a)
            dk.append(b)
        entry = {}
        for key, vals in (("anomaly_identity", anom), ("HK_minus_2iD", hk), ("DK_minus_iK", dk)):
            orders = convergence_orders(h, vals)
            entry[key] = {
                "residuals": vals,
                "orders": orders.tolist(),
                "fitted_order": float(np.polyfit(np.log(h), np.log(vals), 1)[0]),
            }
        report["potentials"][name] = entry
    return report
