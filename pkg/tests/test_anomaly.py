import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qanomaly import anomaly as an
from qanomaly import boundstate as bs
from qanomaly.errors import DomainError


def _state(x, eg=1.0):
    """Renormalized state with beta L = x at L = 1."""
    cfg = bs.PhysicalConfig(e=1.0, g=eg, cutoff=1.0)
    return bs.bound_state_from_beta(cfg, x)


def _delta_oracle(state, lam):
    # K_{1/2}(z)^2 = pi e^{-2z} / (2z), so |Phi(L)|^2 = B^2 pi e^{-2 beta L} / (2 beta L^2)
    L, b, B = state.cutoff, state.beta, state.norm_exterior
    phi2 = B * B * math.pi * math.exp(-2 * b * L) / (2 * b * L * L)
    return -0.5 * lam * L * phi2


@pytest.mark.parametrize("x", [1.0, 2.0, 4.0])
def test_delta_reduction_oracle(x):
    s = _state(x)
    assert an.anomaly_delta_reduction(s, 1.0) == pytest.approx(_delta_oracle(s, 1.0), rel=1e-13)


@pytest.mark.parametrize("x", [1.0, 2.0, 4.0])
def test_extrapolated_quadrature_matches_boundary_term(x):
    s = _state(x)
    res = an.evaluate_anomaly(s, lam=1.0, smoothing=1e-3, levels=3)
    assert res.rel_dev_quadrature_vs_delta < 1e-6
    # raw values approach the limit at first order in eps
    q = np.array(res.quadrature_sequence)
    gaps = np.abs(q - res.delta_reduction)
    assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.05)


@pytest.mark.parametrize("x", [1.0, 4.0])
def test_coarser_smoothing_needs_more_levels(x):
    s = _state(x)
    q, _, _ = an.anomaly_extrapolated(s, 1.0, 1e-2, levels=5)
    delta = an.anomaly_delta_reduction(s, 1.0)
    assert abs(q - delta) < 1e-6 * abs(delta)


def test_richardson_exact_on_polynomials():
    c = [3.0, -1.5, 0.25, 7.0]
    vals = [sum(ck * (0.1 / 2**k) ** p for p, ck in enumerate(c)) for k in range(4)]
    assert an.richardson(vals) == pytest.approx(3.0, rel=1e-12)
    assert an.richardson([5.0]) == 5.0


def test_anomaly_operator_annihilates_inverse_square():
    r = np.linspace(0.3, 5.0, 50)
    out = an.anomaly_operator_apply(lambda q: -2.0 / q**2, r, lambda q: 4.0 / q**3)
    np.testing.assert_allclose(out, 0.0, atol=1e-14)
    # harmonic: (1 + r d/dr / 2) r^2 = 2 r^2
    np.testing.assert_allclose(an.anomaly_operator_apply(r**2, r, 2 * r), 2 * r**2, rtol=1e-15)


def test_smoothed_potential_derivative():
    r, h = 1.0013, 1e-7
    fd = (
        an.smoothed_potential(r + h, 1.3, 1.0, 0.01) - an.smoothed_potential(r - h, 1.3, 1.0, 0.01)
    ) / (2 * h)
    assert an.smoothed_potential_deriv(r, 1.3, 1.0, 0.01) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("eg", [0.5, 1.0, 2.0, 3.5])
def test_closed_form_beta_and_energy_forms_agree(eg):
    for cutoff in (0.05, 0.1, 1.0):
        cfg = bs.PhysicalConfig(g=eg, cutoff=cutoff, m=0.7)
        E = bs.bound_energy(cfg)
        beta = math.sqrt(-2.0 * cfg.m * E)
        a = an.anomaly_closed_form(cfg, beta)
        b = an.anomaly_closed_form_energy(cfg, E)
        assert abs(a - b) <= 1e-12 * abs(a)
        assert a == pytest.approx(2 * bs.lambda_coupling(cfg) * beta**2, rel=1e-14)


def test_ratio_reported_not_asserted():
    s = bs.make_bound_state(bs.PhysicalConfig())
    res = an.evaluate_anomaly(s)
    assert res.ratio_delta_vs_closed == pytest.approx(res.delta_reduction / res.closed_form)
    assert set(res.as_dict()) >= {"quadrature", "delta_reduction", "closed_form", "ratio_delta_vs_closed"}


def test_zero_coupling():
    s = _state(2.0)
    res = an.evaluate_anomaly(s, lam=0.0)
    assert res.quadrature == 0.0 and res.delta_reduction == 0.0 and res.closed_form == 0.0
    assert math.isnan(res.ratio_delta_vs_closed)


def test_domain():
    s = _state(1.0)
    with pytest.raises(DomainError):
        an.anomaly_quadrature(s, 1.0, 0.0)
    with pytest.raises(DomainError):
        an.anomaly_closed_form(s.config, -1.0)


@settings(max_examples=15)
@given(lam=st.floats(-5.0, 5.0).filter(lambda v: abs(v) > 1e-3), x=st.floats(0.5, 5.0))
def test_linear_in_coupling(lam, x):
    s = _state(x)
    q1 = an.anomaly_quadrature(s, 1.0, 5e-3)
    q = an.anomaly_quadrature(s, lam, 5e-3)
    assert q == pytest.approx(lam * q1, rel=1e-9)
    assert an.anomaly_delta_reduction(s, lam) == pytest.approx(lam * an.anomaly_delta_reduction(s, 1.0))
