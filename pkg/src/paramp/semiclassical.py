"""Classical steady states, stability and the parametric-oscillation threshold.

Work is done in scaled units: amplitudes are divided by ``sqrt(n_thr)`` (the
pump photon number at threshold) and time is measured in ``1/kappa_a``. With
these units the non-degenerate equations read

    da/dt = -ka/2 a - s/2 b* c + la
    db/dt = -kb/2 b - s/2 a* c
    dc/dt = -kc/2 c + s/2 a b + lc,      s = sqrt(ka kb)

and the degenerate ones

    da/dt = -ka/2 a - ka/2 a* c + la
    dc/dt = -kc/2 c + ka/4 a^2 + lc

where ``la = sqrt(kappa_a) alpha_in / sqrt(n_thr)`` and likewise for ``lc``.
In these units the stiff-pump coupling is ``|c|`` and the undepleted value
``2 lc / kc`` equals ``rho0``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import Inconclusive, NoThreshold, SolverExhausted
from .model import AmplifierModel, DriveConditions, pump_amplitude_for_rho

STABILITY_TOL = 1e-9
DEDUP_TOL = 1e-8
LATTICE_SIZES = (32, 32, 128)
DEFAULT_CAP_DB = 40.0
SCAN_STEP_DB = 1.0


def np_threshold_photons(model: AmplifierModel) -> float:
    """Intracavity pump photons at threshold.

    ``kappa_a^2 / (16 g2^2)`` for the degenerate device and
    ``kappa_a kappa_b / (4 g3^2)`` for the non-degenerate one.
    """
    g = model.coupling
    if model.degenerate:
        return model.signal.kappa ** 2 / (16.0 * g * g)
    return model.signal.kappa * model.idler.kappa / (4.0 * g * g)


@dataclass(frozen=True)
class ScaledEquations:
    """Scaled semiclassical equations for one operating point."""

    degenerate: bool
    ka: float
    kb: float
    kc: float
    la: complex
    lc: complex
    scale: float  # sqrt(n_thr): physical amplitude per scaled unit
    time_unit: float  # kappa_a in rad/s

    @property
    def n_modes(self):
        return 2 if self.degenerate else 3

    @property
    def rho0(self):
        return 2.0 * abs(self.lc) / self.kc

    def rhs_complex(self, z):
        """Vector field on complex amplitudes; ``z`` has shape (..., n_modes)."""
        z = np.asarray(z, dtype=complex)
        if self.degenerate:
            a, c = z[..., 0], z[..., 1]
            fa = -0.5 * self.ka * a - 0.5 * self.ka * np.conj(a) * c + self.la
            fc = -0.5 * self.kc * c + 0.25 * self.ka * a * a + self.lc
            return np.stack([fa, fc], axis=-1)
        s = math.sqrt(self.ka * self.kb)
        a, b, c = z[..., 0], z[..., 1], z[..., 2]
        fa = -0.5 * self.ka * a - 0.5 * s * np.conj(b) * c + self.la
        fb = -0.5 * self.kb * b - 0.5 * s * np.conj(a) * c
        fc = -0.5 * self.kc * c + 0.5 * s * a * b + self.lc
        return np.stack([fa, fb, fc], axis=-1)

    def wirtinger(self, z):
        """Holomorphic and anti-holomorphic derivative matrices P, Q."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape[:-1] + (self.n_modes, self.n_modes)
        P = np.zeros(shape, dtype=complex)
        Q = np.zeros(shape, dtype=complex)
        if self.degenerate:
            a, c = z[..., 0], z[..., 1]
            P[..., 0, 0] = -0.5 * self.ka
            Q[..., 0, 0] = -0.5 * self.ka * c
            P[..., 0, 1] = -0.5 * self.ka * np.conj(a)
            P[..., 1, 0] = 0.5 * self.ka * a
            P[..., 1, 1] = -0.5 * self.kc
            return P, Q
        s = math.sqrt(self.ka * self.kb)
        a, b, c = z[..., 0], z[..., 1], z[..., 2]
        P[..., 0, 0] = -0.5 * self.ka
        Q[..., 0, 1] = -0.5 * s * c
        P[..., 0, 2] = -0.5 * s * np.conj(b)
        P[..., 1, 1] = -0.5 * self.kb
        Q[..., 1, 0] = -0.5 * s * c
        P[..., 1, 2] = -0.5 * s * np.conj(a)
        P[..., 2, 0] = 0.5 * s * b
        P[..., 2, 1] = 0.5 * s * a
        P[..., 2, 2] = -0.5 * self.kc
        return P, Q

    def rhs_real(self, x):
        """Vector field in real coordinates ordered (Re z, Im z)."""
        n = self.n_modes
        f = self.rhs_complex(x[..., :n] + 1j * x[..., n:])
        return np.concatenate([f.real, f.imag], axis=-1)

    def jacobian_real(self, x):
        """Jacobian in real coordinates ordered (Re z, Im z)."""
        n = self.n_modes
        P, Q = self.wirtinger(x[..., :n] + 1j * x[..., n:])
        dx = P + Q
        dy = 1j * (P - Q)
        top = np.concatenate([dx.real, dy.real], axis=-1)
        bot = np.concatenate([dx.imag, dy.imag], axis=-1)
        return np.concatenate([top, bot], axis=-2)

    def with_drives(self, la=None, lc=None):
        return replace(self, la=self.la if la is None else la, lc=self.lc if lc is None else lc)


def scaled_equations(model: AmplifierModel, drive: DriveConditions) -> ScaledEquations:
    if not drive.is_resonant(model):
        raise ValueError("semiclassical equations need a resonant pump")
    ka = model.signal.kappa
    sqrt_n = math.sqrt(np_threshold_photons(model))
    alpha_in = math.sqrt(drive.signal_flux) * np.exp(1j * drive.signal_phase)
    c_in = drive.pump_flux_amplitude * np.exp(1j * drive.pump_phase)
    return ScaledEquations(
        degenerate=model.degenerate,
        ka=1.0,
        kb=model.idler_kappa / ka,
        kc=model.pump.kappa / ka,
        la=complex(math.sqrt(ka) * alpha_in / sqrt_n / ka),
        lc=complex(math.sqrt(model.pump.kappa) * c_in / sqrt_n / ka),
        scale=sqrt_n,
        time_unit=ka,
    )


def physical_rhs(model: AmplifierModel, drive: DriveConditions, amplitudes):
    """Unscaled rotating-frame mean-field equations (rad/s x amplitude).

    Degenerate: ``da = -ka/2 a - 2 g2 a* c + sqrt(ka) a_in``,
    ``dc = -kc/2 c + g2 a^2 + sqrt(kc) c_in``. Non-degenerate analogous with
    ``g3 b* c``, ``g3 a* c`` and ``g3 a b``.
    """
    z = np.asarray(amplitudes, dtype=complex)
    g = model.coupling
    ka, kc = model.signal.kappa, model.pump.kappa
    a_in = math.sqrt(drive.signal_flux) * np.exp(1j * drive.signal_phase)
    c_in = drive.pump_flux_amplitude * np.exp(1j * drive.pump_phase)
    if model.degenerate:
        a, c = z[..., 0], z[..., 1]
        fa = -0.5 * ka * a - 2.0 * g * np.conj(a) * c + math.sqrt(ka) * a_in
        fc = -0.5 * kc * c + g * a * a + math.sqrt(kc) * c_in
        return np.stack([fa, fc], axis=-1)
    kb = model.idler.kappa
    a, b, c = z[..., 0], z[..., 1], z[..., 2]
    fa = -0.5 * ka * a - g * np.conj(b) * c + math.sqrt(ka) * a_in
    fb = -0.5 * kb * b - g * np.conj(a) * c
    fc = -0.5 * kc * c + g * a * b + math.sqrt(kc) * c_in
    return np.stack([fa, fb, fc], axis=-1)


@dataclass(frozen=True)
class SteadyState:
    """A classical fixed point.

    ``amplitudes`` are physical rotating-frame amplitudes (sqrt of photon
    number) ordered signal, [idler,] pump; ``scaled`` holds the same point in
    units of ``sqrt(n_thr)``. ``stability`` is "stable", "marginal" or
    "unstable" and refers to ``manifold``.
    """

    amplitudes: np.ndarray
    scaled: np.ndarray
    stable: bool
    stability: str
    jacobian_eigenvalues: np.ndarray
    residual: float
    manifold: str = "full"
    continuum: bool = False

    @property
    def rho_eff(self):
        """Stiff-pump coupling implied by the intracavity pump amplitude."""
        return float(abs(self.scaled[-1]))


def _classify(eigs, tol):
    top = float(np.max(eigs.real))
    if top < -tol:
        return "stable"
    if top <= tol:
        return "marginal"
    return "unstable"


@functools.lru_cache(maxsize=64)
def _unit_lattice(n, dim, seed):
    from scipy.stats import qmc

    pts = qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)
    pts.setflags(write=False)
    return pts


def _lattice(n, dim, scale, seed):
    """Scrambled Sobol starts in [-scale, scale]^dim, deterministic per seed."""
    return (2.0 * _unit_lattice(n, dim, seed) - 1.0) * scale


def _batched_newton(fun, jac, x0, tol=1e-13, max_iter=80):
    """Damped Newton on a batch of starting points (rows of ``x0``)."""
    x = np.array(x0, dtype=float)
    f = fun(x)
    norm = np.linalg.norm(f, axis=-1)
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        active &= norm > tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        J = jac(x[idx])
        try:
            step = np.linalg.solve(J, -f[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(Ji, -fi, rcond=None)[0] for Ji, fi in zip(J, f[idx])])
        base = x[idx]
        base_n = norm[idx]
        lam = 1.0
        pending = np.arange(len(idx))
        for _ls in range(12):
            cand = base[pending] + lam * step[pending]
            cf = fun(cand)
            cn = np.linalg.norm(cf, axis=-1)
            ok = np.isfinite(cn) & (cn < (1.0 - 1e-4 * lam) * base_n[pending])
            sel = idx[pending[ok]]
            x[sel], f[sel], norm[sel] = cand[ok], cf[ok], cn[ok]
            pending = pending[~ok]
            if pending.size == 0:
                break
            lam *= 0.5
        # points where no descent step exists are dropped
        active[idx[pending]] = False
    return x, norm


def _canonical(z, eq: ScaledEquations):
    """Representative modulo the continuous phase symmetry of the unsignalled
    non-degenerate device (a -> a e^{i phi}, b -> b e^{-i phi})."""
    if eq.degenerate or eq.la != 0 or abs(z[0]) < 1e-9:
        return z, False
    ph = np.exp(-1j * np.angle(z[0]))
    return np.array([z[0] * ph, z[1] / ph, z[2]]), True


class _Solver:
    def __init__(self, eq: ScaledEquations, manifold: str):
        self.eq = eq
        self.manifold = manifold
        n = eq.n_modes
        if manifold == "full":
            self.dim = 2 * n
            self.rot = np.ones(n, dtype=complex)
            self.fun = eq.rhs_real
            self.jac = eq.jacobian_real
        elif manifold == "phase-locked":
            if eq.degenerate:
                raise ValueError("the phase-locked manifold is only used for the non-degenerate device")
            # rotate the frame so both drives are real; the real subspace is then invariant
            pa = np.exp(1j * np.angle(eq.la)) if eq.la != 0 else 1.0
            pc = np.exp(1j * np.angle(eq.lc)) if eq.lc != 0 else 1.0
            self.rot = np.array([pa, pc / pa, pc])
            self.eq_rot = eq.with_drives(la=abs(eq.la), lc=abs(eq.lc))
            self.dim = n

            def fun(x):
                pad = np.concatenate([x, np.zeros_like(x)], axis=-1)
                return self.eq_rot.rhs_real(pad)[..., :n]

            def jac(x):
                pad = np.concatenate([x, np.zeros_like(x)], axis=-1)
                return self.eq_rot.jacobian_real(pad)[..., :n, :n]

            self.fun, self.jac = fun, jac
        else:
            raise ValueError(f"unknown manifold {manifold!r}")

    def to_complex(self, x):
        n = self.eq.n_modes
        if self.manifold == "full":
            return x[..., :n] + 1j * x[..., n:]
        return x * self.rot

    def roots(self, starts):
        x, norm = _batched_newton(self.fun, self.jac, starts)
        good = np.isfinite(norm) & (norm < 1e-11)
        return x[good]


def _scale_of(eq: ScaledEquations):
    # pump-set scale: undepleted pump amplitude and the oscillation amplitude it can feed
    c_scale = 2.0 * abs(eq.lc) / eq.kc
    a_scale = math.sqrt(2.0 * eq.kc / eq.ka * max(c_scale, 1.0)) + 2.0 * abs(eq.la) / eq.ka
    return 3.0 * max(1.0, c_scale, a_scale)


def _find_roots(solver: _Solver, seed=0):
    eq = solver.eq
    scale = _scale_of(eq)
    found: List[np.ndarray] = []
    counts = []
    for level, n in enumerate(LATTICE_SIZES):
        starts = _lattice(n, solver.dim, scale, seed + level)
        if level == 0:
            # the undepleted point and the trivial point are always tried
            extra = np.zeros((2, solver.dim))
            z0 = np.zeros(eq.n_modes, dtype=complex)
            z0[-1] = 2.0 * eq.lc / eq.kc
            z0[0] = 2.0 * eq.la / eq.ka
            if solver.manifold == "full":
                extra[0] = np.concatenate([z0.real, z0.imag])
            else:
                extra[0] = (z0 / solver.rot).real
            starts = np.vstack([extra, starts])
        for x in solver.roots(starts):
            z = solver.to_complex(x)
            if solver.manifold == "full":
                z, _ = _canonical(z, eq)
            if all(np.max(np.abs(z - f)) > DEDUP_TOL * max(1.0, np.max(np.abs(z))) for f in found):
                found.append(z)
        counts.append(len(found))
        if level >= 1 and counts[-1] == counts[-2]:
            return found
    raise SolverExhausted(f"root counts disagree across multi-start levels: {counts}")


def _state(eq: ScaledEquations, z, manifold, solver: _Solver):
    n = eq.n_modes
    x = np.concatenate([z.real, z.imag])
    if manifold == "full":
        J = eq.jacobian_real(x)
    else:
        xr = (z / solver.rot).real
        J = solver.jac(xr)
    eigs = np.linalg.eigvals(J)
    tol = STABILITY_TOL * max(eq.ka, eq.kb, eq.kc)
    stability = _classify(eigs, tol)
    continuum = manifold == "full" and _canonical(z, eq)[1]
    if continuum and stability == "stable":
        stability = "marginal"
    f = eq.rhs_complex(z)
    residual = float(np.max(np.abs(f)) / max(eq.kc * max(1.0, np.max(np.abs(z))), 1e-300))
    return SteadyState(
        amplitudes=z * eq.scale,
        scaled=z,
        stable=stability == "stable",
        stability=stability,
        jacobian_eigenvalues=eigs * eq.time_unit,
        residual=residual,
        manifold=manifold,
        continuum=continuum,
    )


def default_manifold(model: AmplifierModel) -> str:
    """Manifold used for threshold detection.

    The non-degenerate device is classified on the phase-locked (real)
    subspace: its oscillating roots are only stable against in-phase
    perturbations and the unsignalled oscillator has a neutral phase mode.
    """
    return "full" if model.degenerate else "phase-locked"


def steady_states(model, drive, manifold="full", seed=0) -> List[SteadyState]:
    """All steady states of the mean-field equations, with stability.

    Parameters
    ----------
    manifold : {"full", "phase-locked"}
        ``phase-locked`` restricts the non-degenerate search and stability
        analysis to amplitudes locked to the drive phases.
    seed : int
        Seed of the scrambled multi-start lattice.

    Raises
    ------
    SolverExhausted
        When successive multi-start levels keep finding new roots.
    """
    eq = scaled_equations(model, drive)
    solver = _Solver(eq, manifold)
    roots = _find_roots(solver, seed)
    states = [_state(eq, z, manifold, solver) for z in roots]
    states.sort(key=lambda s: (abs(s.scaled[0]), s.scaled[0].real, s.scaled[0].imag))
    return states


def count_stable(states) -> int:
    return sum(1 for s in states if s.stability == "stable")


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold search.

    ``pump_flux`` is None when no threshold exists below the cap; then
    ``marker`` carries the :class:`NoThreshold` instance.
    """

    signal_flux: float
    pump_flux: Optional[float]
    rho0: Optional[float]
    cap_flux: float
    manifold: str
    evaluations: int
    marker: Optional[NoThreshold] = None
    bracket: tuple = field(default=())

    @property
    def exists(self):
        return self.pump_flux is not None


def _multiplicity(model, signal_flux, signal_phase, rho0, manifold, seed):
    drive = DriveConditions.resonant(
        model, pump_amplitude_for_rho(model, rho0), signal_flux=signal_flux, signal_phase=signal_phase
    )
    states = steady_states(model, drive, manifold=manifold, seed=seed)
    n_st = count_stable(states)
    marginal = any(s.stability == "marginal" for s in states)
    return n_st, marginal


def default_signal_phase(model: AmplifierModel) -> float:
    """Signal phase relative to a zero-phase pump used for threshold sweeps.

    The degenerate device is driven on its amplified quadrature; a signal on
    the squeezed quadrature leaves the threshold unchanged.
    """
    return 0.5 * math.pi if model.degenerate else 0.0


def oscillation_threshold(
    model,
    signal_flux,
    signal_phase=None,
    manifold=None,
    cap_db=DEFAULT_CAP_DB,
    rtol=1e-4,
    start_rho0=0.5,
    scan_step_db=SCAN_STEP_DB,
    seed=0,
) -> ThresholdResult:
    """Smallest pump flux giving two or more stable steady states.

    The pump power is scanned upward in ``scan_step_db`` steps from
    ``start_rho0`` to ``cap_db`` above the zero-signal threshold and the first
    bracket is refined by bisection in log power to relative tolerance
    ``rtol``.

    Raises
    ------
    Inconclusive
        If root finding fails at a scan point so absence cannot be confirmed.
    """
    if signal_flux < 0:
        raise ValueError("signal flux must be non-negative")
    manifold = manifold or default_manifold(model)
    signal_phase = default_signal_phase(model) if signal_phase is None else signal_phase
    p_thr0 = model.threshold_pump_flux()
    cap_rho0 = 10.0 ** (cap_db / 20.0)
    evals = 0
    failures = []

    def multi(rho0):
        nonlocal evals
        evals += 1
        n_st, marginal = _multiplicity(model, signal_flux, signal_phase, rho0, manifold, seed)
        return n_st >= 2, marginal

    n_steps = int(math.ceil(20.0 * math.log10(cap_rho0 / start_rho0) / scan_step_db))
    grid = start_rho0 * 10.0 ** (np.arange(n_steps + 1) * scan_step_db / 20.0)
    grid[-1] = min(grid[-1], cap_rho0)
    lo = None
    hi = None
    for r in grid:
        try:
            is_multi, _ = multi(r)
        except SolverExhausted as exc:
            failures.append((float(r), str(exc)))
            continue
        if is_multi:
            hi = r
            break
        lo = r
    if hi is None:
        if failures:
            raise Inconclusive(
                "no multiplicity found below the cap but root finding failed at some pump powers",
                diagnostics={"failures": failures, "evaluations": evals},
            )
        marker = NoThreshold(f"no oscillation threshold below {cap_db} dB above the zero-signal threshold")
        return ThresholdResult(signal_flux, None, None, p_thr0 * cap_rho0 ** 2, manifold, evals, marker)
    if lo is None:
        raise Inconclusive(
            "multiple stable states already at the bottom of the scan",
            diagnostics={"start_rho0": start_rho0},
        )
    # bisection on log pump power; a marginal verdict widens toward the upper end
    log_tol = math.log(1.0 + rtol)
    llo, lhi = 2.0 * math.log(lo), 2.0 * math.log(hi)
    while lhi - llo > log_tol:
        mid = 0.5 * (llo + lhi)
        is_multi, marginal = multi(math.exp(0.5 * mid))
        if is_multi:
            lhi = mid
        else:
            llo = mid
    rho_thr = math.exp(0.5 * lhi)
    return ThresholdResult(
        signal_flux,
        p_thr0 * rho_thr ** 2,
        rho_thr,
        p_thr0 * cap_rho0 ** 2,
        manifold,
        evals,
        bracket=(p_thr0 * math.exp(llo), p_thr0 * math.exp(lhi)),
    )


def coherent_output_flux(model, drive, state: SteadyState) -> float:
    """|a_out|^2 of the coherent part, a_out = -a_in + sqrt(kappa_a) a."""
    a_in = math.sqrt(drive.signal_flux) * np.exp(1j * drive.signal_phase)
    a_out = -a_in + math.sqrt(model.signal.kappa) * state.amplitudes[0]
    return float(abs(a_out) ** 2)


def max_output_before_oscillation(model, signal_flux, grid_step_db=0.01, threshold=None, **kw):
    """Output flux at the pump power one grid step below threshold.

    Sum of the coherent semiclassical output and the amplified-vacuum floor
    evaluated with the stiff-pump coupling ``|c|`` of the operating state.

    Raises
    ------
    NoThreshold
        If no threshold exists for this signal flux.
    """
    from .depletion import vacuum_output_flux
    from .model import ideal_gain

    thr = threshold or oscillation_threshold(model, signal_flux, **kw)
    if not thr.exists:
        raise thr.marker
    rho0 = thr.rho0 * 10.0 ** (-grid_step_db / 20.0)
    phase = kw.get("signal_phase")
    phase = default_signal_phase(model) if phase is None else phase
    drive = DriveConditions.resonant(
        model, pump_amplitude_for_rho(model, rho0), signal_flux=signal_flux, signal_phase=phase
    )
    manifold = kw.get("manifold") or default_manifold(model)
    states = [s for s in steady_states(model, drive, manifold=manifold) if s.stable]
    if not states:
        raise Inconclusive("no stable state just below threshold", diagnostics={"rho0": rho0})
    state = min(states, key=lambda s: abs(s.scaled[0]))
    rho = min(state.rho_eff, 1.0 - 1e-15)
    gain = ideal_gain(rho)
    return coherent_output_flux(model, drive, state) + vacuum_output_flux(model.signal.kappa, gain, rho)
