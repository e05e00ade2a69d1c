import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import solve_continuous_lyapunov

from paramp.depletion import vacuum_output_flux
from paramp.errors import GridTooNarrow, MarginallyStable, PhaseConventionUnavailable
from paramp.fluctuations import (
    _real_frame,
    assemble_fokker_planck,
    gaussian_wigner_grid,
    lyapunov_solve,
    quadrature_coordinates,
    steady_covariance,
    with_covariance,
)
from paramp.model import DriveConditions, dbm_to_flux, ideal_gain, pump_amplitude_for_rho
from paramp.semiclassical import SteadyState, physical_rhs, steady_states

from conftest import paper_dpa, paper_ndpa


def drive(model, rho0, signal_dbm=None):
    flux = 0.0 if signal_dbm is None else float(dbm_to_flux(signal_dbm, model.signal.omega))
    phase = 0.5 * math.pi if model.degenerate else 0.0
    return DriveConditions.resonant(model, pump_amplitude_for_rho(model, rho0), signal_flux=flux, signal_phase=phase)


def stable_states(model, d):
    return [s for s in steady_states(model, d) if s.stable]


def fake_state(scaled):
    z = np.asarray(scaled, dtype=complex)
    return SteadyState(z, z, True, "stable", np.zeros(0), 0.0)


def fd_drift(model, d, steady, phases):
    """-d(physical rhs)/dx in the rotated real frame, by central differences."""
    n = len(steady.amplitudes)
    z0 = np.asarray(steady.amplitudes, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(z0))))
    h = 1e-6 * scale
    J = np.zeros((2 * n, 2 * n))
    rot = np.exp(1j * phases)
    for k in range(2 * n):
        e = np.zeros(n, dtype=complex)
        e[k % n] = 1.0 if k < n else 1j
        e = e / rot  # unit step along a rotated-frame coordinate
        fp = physical_rhs(model, d, z0 + h * e) * rot
        fm = physical_rhs(model, d, z0 - h * e) * rot
        df = (fp - fm) / (2 * h)
        J[:, k] = np.concatenate([df.real, df.imag])
    return -J


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
@pytest.mark.parametrize("rho0,sig", [(0.5, None), (0.9, -115.0), (1.4, -130.0), (1.8, None)])
def test_drift_is_linearized_mean_field(factory, rho0, sig):
    m = factory()
    d = drive(m, rho0, sig)
    manifold = "phase-locked" if not m.degenerate else "full"
    for s in steady_states(m, d, manifold=manifold):
        if not s.stable:
            continue
        fluc = assemble_fokker_planck(m, s)
        A = fd_drift(m, d, s, fluc.phases)
        assert np.allclose(fluc.drift, A, atol=1e-6 * max(m.kappas))
        assert np.allclose(fluc.diffusion, np.tile(np.array(m.kappas) / 8, 2))


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
@given(rho0=st.floats(0.05, 2.5), sig=st.floats(-150.0, -100.0))
@settings(max_examples=15)
def test_covariance_matches_scipy_lyapunov(factory, rho0, sig):
    m = factory()
    d = drive(m, rho0, sig)
    for s in stable_states(m, d):
        fluc = assemble_fokker_planck(m, s)
        try:
            S = steady_covariance(fluc)
        except MarginallyStable:
            continue
        ref = solve_continuous_lyapunov(-fluc.drift, -2.0 * np.diag(fluc.diffusion))
        assert np.allclose(S, ref, rtol=1e-8, atol=1e-12 * np.max(np.abs(ref)))
        assert np.allclose(S, S.T)
        assert np.all(np.linalg.eigvalsh(S) > 0)


def test_lyapunov_solve_random_stable():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = rng.normal(size=(5, 5))
        A = M @ M.T + 0.5 * np.eye(5) + 0.3 * (M - M.T)
        d = rng.uniform(0.1, 1.0, size=5)
        ref = solve_continuous_lyapunov(A, 2 * np.diag(d))
        assert np.allclose(lyapunov_solve(A, d), ref, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
def test_vacuum_variance_quarter(factory):
    m = factory()
    (s,) = stable_states(m, drive(m, 0.0))
    S = steady_covariance(assemble_fokker_planck(m, s))
    assert np.allclose(S, 0.25 * np.eye(S.shape[0]), atol=1e-15)


@given(st.floats(0.0, 0.98))
@settings(max_examples=25)
def test_dpa_squeezing_closed_form(c0):
    m = paper_dpa()
    (s,) = stable_states(m, drive(m, c0))
    S = steady_covariance(assemble_fokker_planck(m, s))
    assert S[0, 0] == pytest.approx(1 / (4 * (1 + c0)), rel=1e-12)
    assert S[2, 2] == pytest.approx(1 / (4 * (1 - c0)), rel=1e-12)
    assert S[1, 1] == pytest.approx(0.25, rel=1e-12)


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
@given(rho=st.floats(0.05, 0.98))
@settings(max_examples=20)
def test_signal_photons_match_vacuum_output(factory, rho):
    """kappa <a^dag a> from the covariance equals the spectrally integrated floor."""
    m = factory()
    (s,) = stable_states(m, drive(m, rho))
    fluc = assemble_fokker_planck(m, s)
    S = steady_covariance(fluc)
    n = fluc.n // 2
    photons = S[0, 0] + S[n, n] - 0.5
    ka = m.signal.kappa
    assert ka * photons == pytest.approx(vacuum_output_flux(ka, ideal_gain(rho), rho), rel=1e-9)


@pytest.mark.parametrize("factory,scaled", [(paper_dpa, [0.0, 1.0]), (paper_ndpa, [0.0, 0.0, 1.0])])
def test_marginal_at_threshold(factory, scaled):
    m = factory()
    fluc = assemble_fokker_planck(m, fake_state(scaled))
    with pytest.raises(MarginallyStable):
        steady_covariance(fluc)


def test_phase_convention_unavailable():
    with pytest.raises(PhaseConventionUnavailable):
        _real_frame(np.array([1.0, 1j]), True)
    with pytest.raises(PhaseConventionUnavailable):
        _real_frame(np.array([1.0, 1j, 1.0]), False)
    # consistent phases rotate real
    ph = _real_frame(np.array([1j, -1.0]), True)
    assert np.allclose((np.array([1j, -1.0]) * np.exp(1j * ph)).imag, 0.0)


def test_quadrature_coordinates_of_means(dpa):
    s = stable_states(dpa, drive(dpa, 1.5, -130.0))[0]
    fluc = with_covariance(assemble_fokker_planck(dpa, s))
    x = quadrature_coordinates(fluc, s.scaled)
    assert np.allclose(x, np.concatenate([fluc.means, np.zeros(2)]), atol=1e-12)
    assert fluc.lyapunov_residual() < 1e-13 * np.max(np.abs(fluc.drift))
    assert fluc.labels == ("z1", "u1", "z2", "u2")


def test_wigner_grid_normalized_and_peak():
    S = np.array([[0.3, 0.1], [0.1, 0.2]])
    x = np.linspace(-4, 4, 401)
    W = gaussian_wigner_grid(S, [0.5, -0.2], (0, 1), (x + 0.5, x - 0.2))
    mass = np.trapezoid(np.trapezoid(W, x, axis=1), x)
    assert mass == pytest.approx(1.0, abs=1e-12)
    assert W.max() == pytest.approx(1 / (2 * math.pi * math.sqrt(np.linalg.det(S))), rel=1e-6)
    with pytest.raises(GridTooNarrow):
        gaussian_wigner_grid(S, [0.0, 0.0], (0, 1), (np.linspace(-0.2, 0.2, 21),) * 2)


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
def test_quadrature_blocks_decouple(factory):
    m = factory()
    s = stable_states(m, drive(m, 1.3, -120.0))[0]
    fluc = assemble_fokker_planck(m, s)
    n = fluc.n // 2
    assert np.all(fluc.drift[:n, n:] == 0) and np.all(fluc.drift[n:, :n] == 0)
