"""Core amplifier types, unit conventions and closed-form gain relations.

Conventions used throughout the package:

* every frequency and rate is an angular quantity in rad/s; linear
  frequencies in Hz are converted at the I/O boundary;
* "power" means photon flux in photons/s, dBm only appears through
  :func:`flux_to_dbm` / :func:`dbm_to_flux`;
* the input-output boundary condition is ``a_out = -a_in + sqrt(kappa) a``;
* incident thermal photons are zero.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants

from .errors import StabilityViolation

TWO_PI = 2.0 * math.pi
MILLIWATT = 1e-3
RWA_RATIO = 10.0
RESONANCE_RTOL = 1e-9


class Topology(str, enum.Enum):
    DEGENERATE = "degenerate"
    NON_DEGENERATE = "non-degenerate"


@dataclass(frozen=True)
class ModeParams:
    """A single damped resonator mode.

    Parameters
    ----------
    omega : float
        Angular frequency in rad/s.
    kappa : float
        Energy decay rate in rad/s.
    n_thermal : float
        Bose occupation of the attached line. Only zero is supported by
        the solvers; the field exists so configurations can carry it.
    """

    omega: float
    kappa: float
    n_thermal: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0 and self.kappa > 0):
            raise ValueError(f"mode needs omega > 0 and kappa > 0, got {self}")
        if self.n_thermal < 0:
            raise ValueError("n_thermal must be non-negative")
        if self.omega / self.kappa <= RWA_RATIO:
            warnings.warn(
                f"omega/kappa = {self.omega / self.kappa:.3g} <= {RWA_RATIO}: "
                "rotating-wave approximation is questionable",
                stacklevel=3,
            )

    @classmethod
    def from_hz(cls, f_hz, kappa_hz, n_thermal=0.0):
        """Build a mode from linear frequency and linewidth (both in Hz)."""
        return cls(TWO_PI * f_hz, TWO_PI * kappa_hz, n_thermal)


@dataclass(frozen=True)
class AmplifierModel:
    """Mode set plus nonlinear coupling of a parametric amplifier.

    ``coupling`` is the three-wave rate g3 for the non-degenerate device and
    the degenerate rate g2 otherwise (rad/s in both cases).
    """

    topology: Topology
    signal: ModeParams
    pump: ModeParams
    coupling: float
    idler: Optional[ModeParams] = None

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if not self.coupling > 0:
            raise ValueError("nonlinear coupling must be positive")
        if self.topology is Topology.NON_DEGENERATE and self.idler is None:
            raise ValueError("non-degenerate amplifier requires an idler mode")
        if self.topology is Topology.DEGENERATE and self.idler is not None:
            raise ValueError("degenerate amplifier must not define an idler mode")
        if self.pump.kappa < self.signal.kappa:
            raise ValueError("pump mode must be at least as lossy as the signal mode")
        if self.pump.kappa < 3.0 * self.signal.kappa:
            warnings.warn("pump linewidth is less than 3x the signal linewidth", stacklevel=3)
        if self.coupling > min(self.kappas) / 10.0:
            warnings.warn("nonlinear coupling is not small against the linewidths", stacklevel=3)

    @property
    def degenerate(self) -> bool:
        return self.topology is Topology.DEGENERATE

    @property
    def modes(self):
        """Modes in canonical order: signal, [idler,] pump."""
        if self.degenerate:
            return (self.signal, self.pump)
        return (self.signal, self.idler, self.pump)

    @property
    def kappas(self):
        return tuple(m.kappa for m in self.modes)

    @property
    def idler_kappa(self) -> float:
        """Idler linewidth; the signal linewidth for the degenerate device."""
        return self.signal.kappa if self.degenerate else self.idler.kappa

    @property
    def resonant_pump_frequency(self) -> float:
        if self.degenerate:
            return 2.0 * self.signal.omega
        return self.signal.omega + self.idler.omega

    def threshold_pump_flux(self) -> float:
        """Incident pump flux (photons/s) at which the undepleted coupling is 1."""
        return pump_amplitude_for_rho(self, 1.0) ** 2


@dataclass(frozen=True)
class DriveConditions:
    """Incident coherent tones.

    Parameters
    ----------
    pump_flux_amplitude : float
        Modulus of the incident pump amplitude, sqrt(photons/s).
    pump_phase : float
        Pump phase in rad.
    pump_frequency : float
        Pump angular frequency (rad/s).
    signal_flux : float
        Incident coherent signal flux (photons/s).
    signal_frequency : float
        Signal angular frequency (rad/s).
    signal_phase : float
        Phase of the incident signal amplitude in the same frame as the pump.
        Matters only for the phase-sensitive degenerate device.
    """

    pump_flux_amplitude: float
    pump_phase: float
    pump_frequency: float
    signal_flux: float = 0.0
    signal_frequency: float = 0.0
    signal_phase: float = 0.0

    def __post_init__(self):
        if self.pump_flux_amplitude < 0 or self.signal_flux < 0:
            raise ValueError("pump amplitude and signal flux must be non-negative")

    @property
    def pump_flux(self) -> float:
        return self.pump_flux_amplitude ** 2

    def is_resonant(self, model: AmplifierModel) -> bool:
        target = model.resonant_pump_frequency
        return abs(self.pump_frequency - target) <= RESONANCE_RTOL * target

    @classmethod
    def resonant(cls, model, pump_flux_amplitude, signal_flux=0.0, pump_phase=0.0, signal_phase=0.0):
        """Drive with the pump on resonance and the signal at the signal mode."""
        return cls(
            pump_flux_amplitude=pump_flux_amplitude,
            pump_phase=pump_phase,
            pump_frequency=model.resonant_pump_frequency,
            signal_flux=signal_flux,
            signal_frequency=model.signal.omega,
            signal_phase=signal_phase,
        )


def susceptibility(mode: ModeParams, omega):
    """Bare single-mode susceptibility ``1 / (1 - 2i(omega - omega_m)/kappa_m)``."""
    return 1.0 / (1.0 - 2j * (np.asarray(omega) - mode.omega) / mode.kappa)


def inverse_susceptibility(mode: ModeParams, omega):
    return 1.0 - 2j * (np.asarray(omega) - mode.omega) / mode.kappa


def effective_coupling(model: AmplifierModel, drive: DriveConditions) -> float:
    """Stiff-pump parametric rate g_ab (or g_aa) = 2 g |c_in| / sqrt(kappa_c)."""
    return 2.0 * model.coupling * drive.pump_flux_amplitude / math.sqrt(model.pump.kappa)


def rho_from_coupling(g_eff, kappa_a, kappa_b=None, degenerate=False):
    """Reduced coupling from an effective parametric rate.

    Non-degenerate: ``2 g / sqrt(kappa_a kappa_b)``; degenerate: ``4 g / kappa_a``.
    """
    if degenerate:
        return 4.0 * g_eff / kappa_a
    return 2.0 * g_eff / math.sqrt(kappa_a * kappa_b)


def reduced_coupling(model: AmplifierModel, drive: DriveConditions) -> float:
    """Undepleted reduced coupling rho^0 for the given pump amplitude."""
    g_eff = effective_coupling(model, drive)
    return rho_from_coupling(g_eff, model.signal.kappa, model.idler_kappa, model.degenerate)


def pump_amplitude_for_rho(model: AmplifierModel, rho0: float) -> float:
    """Incident pump amplitude |c_in| giving undepleted coupling ``rho0``."""
    ka, kc = model.signal.kappa, model.pump.kappa
    g = model.coupling
    if model.degenerate:
        return rho0 * ka * math.sqrt(kc) / (8.0 * g)
    return rho0 * math.sqrt(ka * model.idler.kappa * kc) / (4.0 * g)


def ideal_gain(rho: float) -> float:
    """Zero-detuning power gain ((1+rho^2)/(1-rho^2))^2.

    Raises
    ------
    StabilityViolation
        For ``rho >= 1`` (the amplifier would self-oscillate).
    """
    if rho < 0:
        raise ValueError("reduced coupling must be non-negative")
    if rho >= 1.0:
        raise StabilityViolation(f"rho = {rho} >= 1: parametric oscillation regime")
    r2 = rho * rho
    return ((1.0 + r2) / (1.0 - r2)) ** 2


def rho_for_gain(gain: float) -> float:
    """Inverse of :func:`ideal_gain`: rho^2 = (sqrt(G) - 1) / (sqrt(G) + 1)."""
    if gain < 1.0:
        raise ValueError("gain must be >= 1")
    s = math.sqrt(gain)
    return math.sqrt((s - 1.0) / (s + 1.0))


def db(x):
    return 10.0 * np.log10(x)


def from_db(x_db):
    return 10.0 ** (np.asarray(x_db) / 10.0)


def flux_to_dbm(flux, carrier):
    """Photon flux (photons/s) at angular frequency ``carrier`` to dBm.

    Zero flux maps to ``-inf``.
    """
    flux = np.asarray(flux, dtype=float)
    if np.any(flux < 0) or carrier <= 0:
        raise ValueError("flux must be >= 0 and carrier > 0")
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(constants.hbar * carrier * flux / MILLIWATT)
    return out[()] if out.ndim == 0 else out


def dbm_to_flux(p_dbm, carrier):
    """Inverse of :func:`flux_to_dbm`; ``-inf`` maps to zero flux."""
    if carrier <= 0:
        raise ValueError("carrier must be positive")
    out = MILLIWATT * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0) / (constants.hbar * carrier)
    return out[()] if out.ndim == 0 else out


def half_photon_flux(mode: ModeParams) -> float:
    """Half a photon per amplifier linewidth: (1/2) * kappa / (2 pi) photons/s."""
    return 0.5 * mode.kappa / TWO_PI
