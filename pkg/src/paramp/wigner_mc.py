"""Truncated-Wigner Monte Carlo of the driven amplifier.

The Wigner equation without its third-derivative term is equivalent to the
Langevin equations (rotating frame, physical amplitudes)

    da = (-ka/2 a - 2 g2 a* c + sqrt(ka) a_in) dt + sqrt(ka/4) (dW1 + i dW2)
    dc = (-kc/2 c + g2 a^2 + sqrt(kc) c_in) dt + sqrt(kc/4) (dW3 + i dW4)

for the degenerate device, and the analogous three-mode set with ``g3 b* c``,
``g3 a* c`` and ``g3 a b`` for the non-degenerate one. The dropped term has
prefactor g/4, tiny against the linewidths at the couplings of interest.

Trajectories are processed in fixed-size blocks; block ``k`` draws from a
PCG64 stream seeded by ``SeedSequence(master_seed, spawn_key=(k,))``, so the
result does not depend on the number of workers or their scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .errors import InsufficientSamples, StepInstability
from .model import AmplifierModel, DriveConditions

BLOCK_SIZE = 1024
AMPLITUDE_LIMIT = 1e6
DT_GUARD = 0.01
DEFAULT_DT_FACTOR = 0.005
MIN_EFFECTIVE = 100


@dataclass(frozen=True)
class EnsembleConfig:
    """Integration settings.

    Times are in seconds. ``dt`` defaults to ``0.005 / max(kappa)``.
    ``initial`` is "vacuum" (zero mean) or "coherent" (vacuum noise around
    ``initial_means``, physical amplitudes).
    """

    n_traj: int = 10_000
    burn_in: float = 0.0
    n_samples: int = 1
    sample_interval: float = 0.0
    dt: Optional[float] = None
    master_seed: int = 0
    integrator: str = "euler"
    initial: str = "vacuum"
    initial_means: Optional[tuple] = None
    workers: int = 1
    block_size: int = BLOCK_SIZE


@dataclass
class TrajectoryEnsemble:
    """Sampled amplitudes, shape ``(n_traj, n_samples, n_modes)``."""

    n_traj: int
    t_final: float
    dt: float
    burn_in: float
    samples: np.ndarray
    master_seed: int
    integrator: str
    degenerate: bool
    kappa_signal: float
    alpha_in: complex
    signal_flux: float
    meta: dict = field(default_factory=dict)


@numba.njit(cache=True, inline="always")
def _drift(deg, a, b, c, ka, kb, kc, g, fa, fc):
    if deg:
        da = -0.5 * ka * a - 2.0 * g * np.conj(a) * c + fa
        db = 0j
        dc = -0.5 * kc * c + g * a * a + fc
    else:
        da = -0.5 * ka * a - g * np.conj(b) * c + fa
        db = -0.5 * kb * b - g * np.conj(a) * c
        dc = -0.5 * kc * c + g * a * b + fc
    return da, db, dc


@numba.njit(cache=True, nogil=True)
def _run_block(rng, deg, heun, init, params, dt, n_burn, n_samples, n_between, limit, out):
    """Integrate one block of trajectories in place.

    ``init`` holds the initial means (a, b, c); ``out`` has shape
    (block, n_samples, 3). Returns the index of the first diverging
    trajectory, or -1.
    """
    ka, kb, kc, g = params[0], params[1], params[2], params[3]
    fa = params[4] + 1j * params[5]
    fc = params[6] + 1j * params[7]
    sa = math.sqrt(ka / 4.0 * dt)
    sb = math.sqrt(kb / 4.0 * dt)
    sc = math.sqrt(kc / 4.0 * dt)
    n_traj = out.shape[0]
    for t in range(n_traj):
        a = init[0] + 0.5 * (rng.standard_normal() + 1j * rng.standard_normal())
        b = 0j
        if not deg:
            b = init[1] + 0.5 * (rng.standard_normal() + 1j * rng.standard_normal())
        c = init[2] + 0.5 * (rng.standard_normal() + 1j * rng.standard_normal())
        k = 0
        total = n_burn + (n_samples - 1) * n_between
        for step in range(total + 1):
            if step >= n_burn and (step - n_burn) % n_between == 0:
                out[t, k, 0] = a
                out[t, k, 1] = b
                out[t, k, 2] = c
                k += 1
            if step % 256 == 0:
                if not (abs(a) <= limit and abs(b) <= limit and abs(c) <= limit):
                    return t
            if step == total:
                break
            na = sa * (rng.standard_normal() + 1j * rng.standard_normal())
            nb = 0j
            if not deg:
                nb = sb * (rng.standard_normal() + 1j * rng.standard_normal())
            nc = sc * (rng.standard_normal() + 1j * rng.standard_normal())
            da, db, dc = _drift(deg, a, b, c, ka, kb, kc, g, fa, fc)
            if heun:
                pa = a + da * dt + na
                pb = b + db * dt + nb
                pc = c + dc * dt + nc
                ea, eb, ec = _drift(deg, pa, pb, pc, ka, kb, kc, g, fa, fc)
                a = a + 0.5 * (da + ea) * dt + na
                b = b + 0.5 * (db + eb) * dt + nb
                c = c + 0.5 * (dc + ec) * dt + nc
            else:
                a = a + da * dt + na
                b = b + db * dt + nb
                c = c + dc * dt + nc
    return -1


def _block_rng(master_seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(block,))))


def rate_scale(model: AmplifierModel, drive: DriveConditions) -> float:
    """Largest linear rate: linewidths and the undepleted parametric rate."""
    from .model import reduced_coupling

    rho0 = reduced_coupling(model, drive)
    return max(max(model.kappas), rho0 * model.signal.kappa)


def _inputs(model, drive):
    a_in = math.sqrt(drive.signal_flux) * np.exp(1j * drive.signal_phase)
    c_in = drive.pump_flux_amplitude * np.exp(1j * drive.pump_phase)
    fa = math.sqrt(model.signal.kappa) * a_in
    fc = math.sqrt(model.pump.kappa) * c_in
    kb = model.idler_kappa
    return a_in, np.array(
        [model.signal.kappa, kb, model.pump.kappa, model.coupling, fa.real, fa.imag, fc.real, fc.imag]
    )


def simulate(model: AmplifierModel, drive: DriveConditions, config: EnsembleConfig) -> TrajectoryEnsemble:
    """Integrate an ensemble of truncated-Wigner trajectories.

    Raises
    ------
    StepInstability
        If any amplitude exceeds 1e6 at a sample time.
    ValueError
        If ``dt`` violates the stability guard ``dt <= 0.01 / max rate``.
    """
    if not drive.is_resonant(model):
        raise ValueError("the sampler works in the frame of a resonant pump")
    if config.integrator not in ("euler", "heun"):
        raise ValueError(f"unknown integrator {config.integrator!r}")
    rate = rate_scale(model, drive)
    dt = config.dt if config.dt is not None else DEFAULT_DT_FACTOR / max(model.kappas)
    if dt > DT_GUARD / rate * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt:.3g} s exceeds the guard {DT_GUARD / rate:.3g} s")
    if config.n_traj < 1 or config.n_samples < 1:
        raise ValueError("need at least one trajectory and one sample")
    n_burn = int(round(config.burn_in / dt))
    n_between = max(1, int(round(config.sample_interval / dt))) if config.n_samples > 1 else 1
    init = np.zeros(3, dtype=complex)
    if config.initial == "coherent":
        means = np.asarray(config.initial_means, dtype=complex)
        if model.degenerate:
            init[0], init[2] = means
        else:
            init[:] = means
    elif config.initial != "vacuum":
        raise ValueError(f"unknown initial condition {config.initial!r}")
    a_in, params = _inputs(model, drive)
    samples = np.empty((config.n_traj, config.n_samples, 3), dtype=complex)
    bs = config.block_size
    n_blocks = (config.n_traj + bs - 1) // bs
    heun = config.integrator == "heun"

    def work(k):
        lo, hi = k * bs, min(config.n_traj, (k + 1) * bs)
        view = samples[lo:hi]
        bad = _run_block(
            _block_rng(config.master_seed, k), model.degenerate, heun, init, params,
            dt, n_burn, config.n_samples, n_between, AMPLITUDE_LIMIT, view,
        )
        return k, lo, bad

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, range(n_blocks)))
    else:
        results = [work(k) for k in range(n_blocks)]
    for k, lo, bad in results:
        if bad >= 0:
            raise StepInstability(
                f"trajectory {lo + bad} exceeded |amplitude| > {AMPLITUDE_LIMIT:g}",
                trajectory=samples[lo + bad].copy(),
            )
    n_modes = 2 if model.degenerate else 3
    if model.degenerate:
        samples = samples[:, :, [0, 2]]
    t_final = (n_burn + (config.n_samples - 1) * n_between) * dt
    return TrajectoryEnsemble(
        n_traj=config.n_traj,
        t_final=t_final,
        dt=dt,
        burn_in=n_burn * dt,
        samples=np.ascontiguousarray(samples[..., :n_modes]),
        master_seed=config.master_seed,
        integrator=config.integrator,
        degenerate=model.degenerate,
        kappa_signal=model.signal.kappa,
        alpha_in=complex(a_in),
        signal_flux=drive.signal_flux,
        meta={"n_between": n_between, "block_size": bs},
    )


def real_coordinates(samples):
    """(Re z_1..z_n, Im z_1..z_n) for complex samples (..., n)."""
    return np.concatenate([samples.real, samples.imag], axis=-1)


@dataclass(frozen=True)
class SampleCovariance:
    covariance: np.ndarray
    standard_error: np.ndarray
    mean: np.ndarray
    n_effective: int


def sample_covariance(ensemble: TrajectoryEnsemble, transform=None) -> SampleCovariance:
    """Sample covariance pooled over trajectories and sample times.

    Standard errors use batch means with one batch per trajectory, which
    absorbs the time correlation inside a trajectory.

    Parameters
    ----------
    transform : callable, optional
        Maps complex samples ``(..., n_modes)`` to real coordinates
        ``(..., N)``; defaults to :func:`real_coordinates`.

    Raises
    ------
    InsufficientSamples
        With fewer than 100 trajectories.
    """
    n_traj = ensemble.samples.shape[0]
    if n_traj < MIN_EFFECTIVE:
        raise InsufficientSamples(f"{n_traj} trajectories < {MIN_EFFECTIVE}")
    x = (transform or real_coordinates)(ensemble.samples)
    n_s = x.shape[1]
    mean = x.mean(axis=(0, 1))
    d = x - mean
    per_traj = np.einsum("tsi,tsj->tij", d, d) / n_s
    cov = per_traj.sum(axis=0) * n_s / (n_traj * n_s - 1)
    se = per_traj.std(axis=0, ddof=1) / math.sqrt(n_traj)
    return SampleCovariance(cov, se, mean, n_traj)


def excess_kurtosis(values):
    """Sample excess kurtosis m4/m2^2 - 3 of pooled values."""
    v = np.asarray(values, dtype=float).ravel()
    d = v - v.mean()
    m2 = np.mean(d * d)
    return float(np.mean(d ** 4) / (m2 * m2) - 3.0)


def quadrature_kurtosis(ensemble: TrajectoryEnsemble, mode=0, quadrature="imag", n_groups=20):
    """Excess kurtosis of one quadrature with a between-group standard error."""
    z = ensemble.samples[:, :, mode]
    q = z.imag if quadrature == "imag" else z.real
    value = excess_kurtosis(q)
    groups = np.array_split(q, n_groups, axis=0)
    vals = np.array([excess_kurtosis(g) for g in groups])
    return value, float(vals.std(ddof=1) / math.sqrt(n_groups))


@dataclass(frozen=True)
class FluxEstimate:
    flux: float
    standard_error: float


def output_flux_estimate(ensemble: TrajectoryEnsemble, model: Optional[AmplifierModel] = None) -> FluxEstimate:
    """Normally ordered signal output flux from Wigner moments.

    ``kappa (<|a|^2>_W - 1/2) - 2 sqrt(kappa) Re(a_in* <a>) + P_in``, from
    ``a_out = -a_in + sqrt(kappa) a``; the 1/2 removes the symmetric-ordering
    contribution.
    """
    n_traj = ensemble.samples.shape[0]
    if n_traj < MIN_EFFECTIVE:
        raise InsufficientSamples(f"{n_traj} trajectories < {MIN_EFFECTIVE}")
    kappa = model.signal.kappa if model is not None else ensemble.kappa_signal
    a = ensemble.samples[:, :, 0]
    per = (
        kappa * (np.abs(a) ** 2 - 0.5)
        - 2.0 * math.sqrt(kappa) * (np.conj(ensemble.alpha_in) * a).real
        + ensemble.signal_flux
    ).mean(axis=1)
    return FluxEstimate(float(per.mean()), float(per.std(ddof=1) / math.sqrt(n_traj)))


def histogram2d(ensemble: TrajectoryEnsemble, mode=0, bins=61, extent=None):
    """2-D histogram of one mode's (Re, Im) samples as a probability density.

    Returns ``(H, x_edges, y_edges)`` with ``H[iy, ix]``.
    """
    z = ensemble.samples[:, :, mode].ravel()
    if extent is None:
        r = 4.0 * max(np.std(z.real), np.std(z.imag))
        extent = (z.real.mean() - r, z.real.mean() + r, z.imag.mean() - r, z.imag.mean() + r)
    H, xe, ye = np.histogram2d(
        z.real, z.imag, bins=bins, range=[extent[:2], extent[2:]], density=True
    )
    return H.T, xe, ye
