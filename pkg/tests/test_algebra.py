import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qanomaly import algebra as al
from qanomaly.errors import DomainError, GridSupportError

C, W = 2.0, 0.17


def _psi_and_derivs(r):
    u = (r - C) / W
    p = np.exp(-0.5 * u * u)
    d1 = -u / W * p
    d2 = (u * u - 1.0) / (W * W) * p
    return p, d1, d2


def test_grid_validation():
    with pytest.raises(DomainError):
        al.RadialGrid(0.0, 1.0, 64)
    with pytest.raises(DomainError):
        al.RadialGrid(1.0, 0.5, 64)
    with pytest.raises(DomainError):
        al.RadialGrid(0.5, 1.0, 8)
    g = al.RadialGrid(0.5, 3.5, 301)
    assert g.spacing == pytest.approx(0.01)
    assert g.interior.sum() == 301 - 2 * al.MARGIN_NODES


@pytest.mark.parametrize("n", [512, 1024])
def test_free_hamiltonian_against_analytic(n):
    g = al.RadialGrid(0.5, 3.5, n)
    r = g.r
    p, d1, d2 = _psi_and_derivs(r)
    exact = -0.5 * (d2 + 2.0 / r * d1)
    H = al.build_H(g, 1.0, None)
    err = np.max(np.abs(H(p) - exact)[g.interior])
    assert err < 40.0 * g.spacing**2 * np.max(np.abs(exact))


def test_dilatation_against_analytic():
    g = al.RadialGrid(0.5, 3.5, 1024)
    r = g.r
    p, d1, _ = _psi_and_derivs(r)
    exact = 0.25j * (2 * r * d1 + 3 * p)
    err = np.max(np.abs(al.build_D(g)(p) - exact)[g.interior])
    assert err < 20.0 * g.spacing**2 * np.max(np.abs(exact))


@pytest.mark.parametrize("name", ["free", "inverse_square", "harmonic"])
def test_second_order_convergence(name):
    study = al.refinement_study()
    for ident, data in study["potentials"][name].items():
        assert all(1.8 <= o <= 2.2 for o in data["orders"]), (ident, data["orders"])
        assert 1.8 <= data["fitted_order"] <= 2.2


def test_inverse_square_residual_at_finest_grid():
    study = al.refinement_study()
    res = study["potentials"]["inverse_square"]["anomaly_identity"]["residuals"][-1]
    assert res < 1e-2


@pytest.mark.xfail(strict=True, reason="second-order stencil: residual is O(h^2) ~ 3e-3 at n = 1024")
def test_inverse_square_residual_below_1e8():
    study = al.refinement_study()
    assert study["potentials"]["inverse_square"]["anomaly_identity"]["residuals"][-1] < 1e-8


def test_support_check():
    g = al.RadialGrid(0.5, 3.5, 256)
    with pytest.raises(GridSupportError):
        al.anomaly_identity_residual(g, 1.0, None, None, al.gaussian_bump(0.7, 0.3))
    with pytest.raises(GridSupportError):
        al.check_support(g, np.zeros(256))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_singular_potential_rejected():
    g = al.RadialGrid(0.5, 3.5, 64)
    with pytest.raises(DomainError):
        al.build_H(g, 1.0, lambda r: 1.0 / (r - g.r[10]))


def test_operator_arithmetic_and_commutator():
    g = al.RadialGrid(0.5, 3.5, 200)
    H = al.build_H(g, 1.0, None)
    K = al.build_K(g, 1.0)
    p = al.gaussian_bump()(g.r)
    c = al.commutator(H, K)
    np.testing.assert_allclose(c(p), H(K(p)) - K(H(p)), atol=1e-12)
    np.testing.assert_allclose((2.0 * K)(p), 2.0 * K(p))
    np.testing.assert_allclose((H + K)(p), H(p) + K(p))


def test_hermiticity():
    # the weighted central stencil makes H exactly symmetric under r^2 h;
    # D is symmetric only up to O(h^2)
    h, d_defects = [], []
    for n in (256, 512, 1024):
        g = al.RadialGrid(0.5, 3.5, n)
        a = al.gaussian_bump(1.9, 0.15)(g.r)
        b = al.gaussian_bump(2.1, 0.2)(g.r) * g.r
        assert al.hermiticity_defect(al.build_H(g, 1.0, lambda r: r**2), a, b) < 1e-11
        h.append(g.spacing)
        d_defects.append(al.hermiticity_defect(al.build_D(g), a, b))
    assert np.all(al.convergence_orders(h, d_defects) > 1.8)


@settings(max_examples=20)
@given(
    coef=st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3),
    center=st.floats(1.5, 2.5),
    width=st.floats(0.5, 1.5),
)
def test_identity_converges_for_smooth_potentials(coef, center, width):
    def V(r):
        x = r - center
        return (coef[0] + coef[1] * x + coef[2] * x * x) * np.exp(-x * x / (2 * width * width))

    def dV(r):
        x = r - center
        poly = coef[0] + coef[1] * x + coef[2] * x * x
        return (coef[1] + 2 * coef[2] * x - poly * x / width**2) * np.exp(-x * x / (2 * width * width))

    psi = al.gaussian_bump()
    res = [al.anomaly_identity_residual(al.RadialGrid(0.5, 3.5, n), 1.0, V, dV, psi) for n in (256, 512)]
    # either second-order decay or already at round-off
    assert res[1] < 0.3 * res[0] or res[1] < 1e-10
