import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from paramp.errors import StabilityViolation, UnsupportedDetuning
from paramp.model import ModeParams
from paramp.scattering import (
    added_noise_quanta,
    dpa_scattering,
    ndpa_scattering,
    phase_preserving_output,
    quadrature_gains,
)

from conftest import TWO_PI, paper_dpa, paper_ndpa, quiet_model


def qle_oracle(ka, kb, g, theta, delta):
    """Brute-force two-mode input-output solve.

    Linear Langevin equations for (a[delta], b^dag[-delta]) with parametric
    rate g, solved by a dense linear solve; a_out = -a_in + sqrt(k) a.
    """
    M = np.array(
        [
            [0.5 * ka - 1j * delta, 1j * g * np.exp(-1j * theta)],
            [-1j * g * np.exp(1j * theta), 0.5 * kb - 1j * delta],
        ]
    )
    K = np.diag([math.sqrt(ka), math.sqrt(kb)])
    return -np.eye(2) + K @ np.linalg.solve(M, K)


rho_st = st.floats(0.0, 0.99)
theta_st = st.floats(-math.pi, math.pi)
det_st = st.floats(-3.0, 3.0)  # detuning in signal linewidths


@given(rho_st, theta_st, det_st, st.floats(0.3, 3.0))
def test_ndpa_matches_brute_force(rho, theta, det, kb_ratio):
    model = quiet_model(
        "non-degenerate",
        ModeParams.from_hz(10e9, 100e6),
        ModeParams.from_hz(17e9, 1e9),
        TWO_PI * 1e3,
        idler=ModeParams.from_hz(7e9, 100e6 * kb_ratio),
    )
    ka, kb = model.signal.kappa, model.idler.kappa
    g_ab = 0.5 * rho * math.sqrt(ka * kb)
    ws = model.signal.omega + det * ka
    blk = ndpa_scattering(model, g_ab, model.resonant_pump_frequency, theta, ws)
    S = qle_oracle(ka, kb, g_ab, theta, det * ka)
    assert blk.r_ss == pytest.approx(S[0, 0], rel=1e-10, abs=1e-12)
    assert blk.r_ii == pytest.approx(S[1, 1], rel=1e-10, abs=1e-12)
    assert abs(blk.s_si) == pytest.approx(abs(S[0, 1]), rel=1e-10, abs=1e-12)
    assert abs(blk.s_is) == pytest.approx(abs(S[1, 0]), rel=1e-10, abs=1e-12)
    if rho > 1e-3:
        # the off-diagonal phase reference differs by a constant factor only
        assert blk.s_si / S[0, 1] == pytest.approx(-1j, abs=1e-9)
        assert blk.s_is / S[1, 0] == pytest.approx(1j, abs=1e-9)


@given(rho_st, theta_st, det_st)
def test_dpa_matches_brute_force(rho, theta, det):
    model = paper_dpa()
    k = model.signal.kappa
    g_aa = rho * k / 4.0
    blk = dpa_scattering(model, g_aa, 2 * model.signal.omega, theta, model.signal.omega + det * k)
    S = qle_oracle(k, k, 2.0 * g_aa, theta, det * k)
    assert blk.r_ss == pytest.approx(S[0, 0], rel=1e-10, abs=1e-12)
    assert abs(blk.s_si) == pytest.approx(abs(S[0, 1]), rel=1e-10, abs=1e-12)


@given(rho_st, theta_st, det_st)
def test_unitarity_identities(rho, theta, det):
    model = paper_ndpa()
    ka, kb = model.signal.kappa, model.idler.kappa
    blk = ndpa_scattering(model, 0.5 * rho * math.sqrt(ka * kb), model.resonant_pump_frequency, theta,
                          model.signal.omega + det * ka)
    assert abs(blk.determinant()) == pytest.approx(1.0, abs=1e-10)
    assert abs(blk.r_ss) ** 2 - abs(blk.s_si) ** 2 == pytest.approx(1.0, abs=1e-10)
    assert abs(blk.r_ii) ** 2 - abs(blk.s_is) ** 2 == pytest.approx(1.0, abs=1e-10)
    # literal relation between the two conversion entries
    assert blk.s_is == pytest.approx(blk.s_si * np.exp(2j * theta), abs=1e-12)


def test_conjugate_relation_on_resonance(ndpa):
    ka, kb = ndpa.signal.kappa, ndpa.idler.kappa
    blk = ndpa_scattering(ndpa, 0.4 * math.sqrt(ka * kb), ndpa.resonant_pump_frequency, 0.7, ndpa.signal.omega)
    assert blk.s_is == pytest.approx(np.conj(blk.s_si), abs=1e-14)


def test_resonant_gain_equals_ideal(ndpa):
    from paramp.model import ideal_gain

    rho = math.sqrt(9 / 11)
    ka, kb = ndpa.signal.kappa, ndpa.idler.kappa
    blk = ndpa_scattering(ndpa, 0.5 * rho * math.sqrt(ka * kb), ndpa.resonant_pump_frequency, 0.0, ndpa.signal.omega)
    assert abs(blk.r_ss) ** 2 == pytest.approx(ideal_gain(rho), rel=1e-12)
    assert abs(blk.r_ss) ** 2 == pytest.approx(100.0, rel=1e-12)


@given(rho_st, theta_st, det_st)
def test_quadrature_gain_product(rho, theta, det):
    model = paper_dpa()
    k = model.signal.kappa
    blk = dpa_scattering(model, rho * k / 4, 2 * model.signal.omega, theta, model.signal.omega + det * k)
    gp, gq = quadrature_gains(blk)
    assert gp * gq == pytest.approx(1.0, abs=1e-10)
    assert abs(np.linalg.det(blk.sub_block())) == pytest.approx(1.0, abs=1e-10)


def test_quadrature_gains_on_resonance(dpa):
    rho = 0.6
    blk = dpa_scattering(dpa, rho * dpa.signal.kappa / 4, 2 * dpa.signal.omega, 0.0, dpa.signal.omega)
    gp, gq = quadrature_gains(blk)
    assert gp == pytest.approx(((1 + rho) / (1 - rho)) ** 2, rel=1e-13)
    assert gq == pytest.approx(((1 - rho) / (1 + rho)) ** 2, rel=1e-13)


def test_dpa_detuned_pump_unsupported(dpa):
    with pytest.raises(UnsupportedDetuning):
        dpa_scattering(dpa, 1e6, 2 * dpa.signal.omega * (1 + 1e-6), 0.0, dpa.signal.omega)


def test_above_threshold_rejected(ndpa, dpa):
    ka = ndpa.signal.kappa
    with pytest.raises(StabilityViolation):
        ndpa_scattering(ndpa, 0.5 * ka, ndpa.resonant_pump_frequency, 0.0, ndpa.signal.omega)
    with pytest.raises(StabilityViolation):
        dpa_scattering(dpa, dpa.signal.kappa / 4, 2 * dpa.signal.omega, 0.0, dpa.signal.omega)


def test_quadrature_gains_need_degenerate_block(ndpa):
    blk = ndpa_scattering(ndpa, 1e6, ndpa.resonant_pump_frequency, 0.0, ndpa.signal.omega)
    with pytest.raises(ValueError):
        quadrature_gains(blk)


@given(st.floats(1.0, 1e9))
def test_phase_preserving_commutator(gain):
    out = phase_preserving_output(gain)
    # difference of two O(G) numbers: absolute error grows like G * eps
    assert out.gain_coefficient ** 2 - out.conjugate_coefficient ** 2 == pytest.approx(1.0, abs=1e-14 * gain + 1e-12)


def test_added_noise_limits():
    assert added_noise_quanta(1.0) == 0.0
    assert added_noise_quanta(1e6) == pytest.approx(0.5, abs=1e-6)
    out, a_out = phase_preserving_output(4.0, a_in=1.0 + 0j)
    assert a_out == pytest.approx(2.0)


@given(rho_st, theta_st, det_st)
def test_phase_conjugation(rho, theta, det):
    m = paper_ndpa()
    ka, kb = m.signal.kappa, m.idler.kappa
    args = (m, 0.5 * rho * math.sqrt(ka * kb), m.resonant_pump_frequency)
    ws = m.signal.omega + det * ka
    s0 = ndpa_scattering(*args, 0.0, ws).s_si
    assert ndpa_scattering(*args, theta, ws).s_si == pytest.approx(s0 * np.exp(-1j * theta), abs=1e-12)
