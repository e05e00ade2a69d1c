import math
from dataclasses import replace

import numpy as np
import pytest

import paramp.wigner_mc as wmc
from paramp.depletion import output_power, solve_rho
from paramp.errors import InsufficientSamples, StepInstability
from paramp.fluctuations import assemble_fokker_planck, quadrature_coordinates, steady_covariance
from paramp.model import DriveConditions, dbm_to_flux, pump_amplitude_for_rho
from paramp.semiclassical import steady_states
from paramp.wigner_mc import (
    EnsembleConfig,
    TrajectoryEnsemble,
    excess_kurtosis,
    histogram2d,
    output_flux_estimate,
    quadrature_kurtosis,
    sample_covariance,
    simulate,
)

from conftest import paper_dpa, paper_ndpa

# a pump three linewidths wide keeps the integration cheap
KC_HZ = 300e6


def drive(model, rho0, flux=0.0, phase=None):
    if phase is None:
        phase = 0.5 * math.pi if model.degenerate else 0.0
    return DriveConditions.resonant(model, pump_amplitude_for_rho(model, rho0), signal_flux=flux, signal_phase=phase)


def config(model, **kw):
    ka = model.signal.kappa
    base = dict(n_traj=2000, burn_in=40.0 / ka, n_samples=3, sample_interval=2.0 / ka,
                dt=0.01 / max(model.kappas), integrator="heun", master_seed=5)
    base.update(kw)
    return EnsembleConfig(**base)


def fake_ensemble(samples):
    samples = np.asarray(samples, dtype=complex)
    return TrajectoryEnsemble(samples.shape[0], 0.0, 1.0, 0.0, samples, 0, "euler", True, 1.0, 0j, 0.0)


def test_worker_count_does_not_change_results():
    m = paper_ndpa(KC_HZ)
    d = drive(m, 0.7)
    c1 = config(m, n_traj=300, burn_in=2.0 / m.signal.kappa, block_size=64)
    e1 = simulate(m, d, c1)
    e3 = simulate(m, d, replace(c1, workers=3))
    assert np.array_equal(e1.samples, e3.samples)
    e_other = simulate(m, d, replace(c1, master_seed=6))
    assert not np.array_equal(e1.samples, e_other.samples)


@pytest.mark.parametrize("factory", [paper_ndpa, paper_dpa])
def test_vacuum_variance(factory):
    m = factory(KC_HZ)
    e = simulate(m, drive(m, 0.0), config(m, burn_in=3.0 / m.signal.kappa))
    sc = sample_covariance(e)
    n = sc.covariance.shape[0]
    z = (sc.covariance - 0.25 * np.eye(n)) / sc.standard_error
    assert np.all(np.abs(np.diag(z)) < 4.0)
    assert np.allclose(sc.mean, 0.0, atol=0.05)


def test_dpa_squeezing_matches_linear_theory():
    m = paper_dpa(KC_HZ)
    d = drive(m, 0.5)
    (s,) = [s for s in steady_states(m, d) if s.stable]
    fluc = assemble_fokker_planck(m, s)
    S = steady_covariance(fluc)
    e = simulate(m, d, config(m, n_traj=4000))
    sc = sample_covariance(e, transform=lambda z: quadrature_coordinates(fluc, z))
    z = (sc.covariance - S) / sc.standard_error
    assert np.max(np.abs(z)) < 4.0
    assert sc.covariance[0, 0] == pytest.approx(1 / 6, rel=0.05)
    assert sc.covariance[2, 2] == pytest.approx(1 / 2, rel=0.05)


def test_output_flux_matches_depleted_gain():
    m = paper_ndpa(KC_HZ)
    flux = float(dbm_to_flux(-125.0, m.signal.omega))
    d = drive(m, 0.6, flux)
    e = simulate(m, d, config(m, n_traj=3000))
    est = output_flux_estimate(e)
    theory = output_power(m, solve_rho(m, d))
    assert abs(est.flux - theory) < 4.0 * est.standard_error + 0.01 * theory


def test_dt_guard(ndpa):
    with pytest.raises(ValueError, match="guard"):
        simulate(ndpa, drive(ndpa, 0.5), EnsembleConfig(n_traj=10, dt=0.05 / max(ndpa.kappas)))


def test_bad_arguments(ndpa):
    d = drive(ndpa, 0.5)
    with pytest.raises(ValueError):
        simulate(ndpa, d, EnsembleConfig(n_traj=10, integrator="rk4"))
    with pytest.raises(ValueError):
        simulate(ndpa, d, EnsembleConfig(n_traj=10, initial="thermal"))
    off = DriveConditions(d.pump_flux_amplitude, 0.0, d.pump_frequency * 1.001)
    with pytest.raises(ValueError):
        simulate(ndpa, off, EnsembleConfig(n_traj=10))


def test_step_instability_reported(monkeypatch):
    m = paper_dpa(KC_HZ)
    monkeypatch.setattr(wmc, "AMPLITUDE_LIMIT", 0.1)
    with pytest.raises(StepInstability) as info:
        simulate(m, drive(m, 0.5), config(m, n_traj=20))
    assert info.value.trajectory is not None


def test_insufficient_samples():
    e = fake_ensemble(np.zeros((50, 2, 2)))
    with pytest.raises(InsufficientSamples):
        sample_covariance(e)
    with pytest.raises(InsufficientSamples):
        output_flux_estimate(e)


def test_excess_kurtosis_reference_distributions():
    rng = np.random.default_rng(0)
    assert abs(excess_kurtosis(rng.normal(size=1_000_000))) < 0.02
    assert excess_kurtosis(rng.uniform(size=1_000_000)) == pytest.approx(-1.2, abs=0.01)
    # Laplace: +3
    assert excess_kurtosis(rng.laplace(size=2_000_000)) == pytest.approx(3.0, abs=0.1)
    z = rng.uniform(size=(20_000, 2)) + 1j * rng.normal(size=(20_000, 2))
    e = fake_ensemble(z[:, :, None])
    k_im, se_im = quadrature_kurtosis(e, quadrature="imag")
    k_re, _ = quadrature_kurtosis(e, quadrature="real")
    assert abs(k_im) < 4 * se_im + 0.02
    assert k_re == pytest.approx(-1.2, abs=0.03)


def test_histogram_is_density():
    rng = np.random.default_rng(1)
    e = fake_ensemble((rng.normal(size=(5000, 2)) + 1j * rng.normal(size=(5000, 2)))[:, :, None])
    H, xe, ye = histogram2d(e, bins=41)
    area = np.outer(np.diff(ye), np.diff(xe))
    assert (H * area).sum() == pytest.approx(1.0, rel=1e-12)
    assert H.shape == (41, 41)


def test_zero_inputs_give_zero_flux():
    m = paper_ndpa(KC_HZ)
    est = output_flux_estimate(simulate(m, drive(m, 0.0), config(m, burn_in=2.0 / m.signal.kappa)))
    assert abs(est.flux) < 3 * est.standard_error


def test_linear_regime_gain_matches_stiff_pump():
    from paramp.model import ideal_gain

    m = paper_ndpa(KC_HZ)
    flux = float(dbm_to_flux(-110.0, m.signal.omega))
    d = drive(m, 0.6, flux)
    e = simulate(m, d, config(m))
    a_out = -e.alpha_in + math.sqrt(m.signal.kappa) * e.samples[:, :, 0].mean()
    assert abs(a_out) ** 2 / flux == pytest.approx(ideal_gain(0.6), rel=0.05)


def test_step_halving():
    """Halving dt moves the squeezed and amplified variances by less than the noise."""
    m = paper_dpa(KC_HZ)
    d = drive(m, 0.5)
    (s,) = [s for s in steady_states(m, d) if s.stable]
    fluc = assemble_fokker_planck(m, s)
    out = []
    for dt in (0.01, 0.005):
        e = simulate(m, d, config(m, dt=dt / max(m.kappas), burn_in=20.0 / m.signal.kappa))
        sc = sample_covariance(e, transform=lambda z: quadrature_coordinates(fluc, z))
        out.append((np.diag(sc.covariance), np.diag(sc.standard_error)))
    (v1, e1), (v2, e2) = out
    assert np.all(np.abs(v1 - v2) < 3 * np.hypot(e1, e2))
