"""Stiff-pump linear scattering of degenerate and non-degenerate amplifiers.

Matrices act on the frequency quartet ``(x[+w_S], x[-w_S], y[+w_I], y[-w_I])``
where ``x = a`` and ``y = b`` for the non-degenerate amplifier, and both are
the single mode ``a`` for the degenerate one. Negative-frequency rows are
stored explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import StabilityViolation, UnsupportedDetuning
from .model import AmplifierModel, RESONANCE_RTOL, inverse_susceptibility


class Basis(str, enum.Enum):
    FREQUENCY_QUARTET = "frequency-quartet"
    QUADRATURE_PAIR = "quadrature-pair"


@dataclass(frozen=True)
class ScatteringBlock:
    """Scattering matrix plus frequency bookkeeping.

    For the degenerate tuned case ``entries`` is still the 4x4 quartet
    matrix; ``m1``, ``m2`` and ``d`` keep the 2x2 sub-block factors and
    ``rho`` / ``theta`` the drive that produced them.
    """

    entries: np.ndarray
    signal_frequency: float
    idler_frequency: float
    basis: Basis
    rho: float
    theta: float
    m1: complex = None
    m2: complex = None
    d: complex = None

    @property
    def r_ss(self):
        return self.entries[0, 0]

    @property
    def s_si(self):
        return self.entries[0, 3]

    @property
    def s_is(self):
        return self.entries[3, 0]

    @property
    def r_ii(self):
        return self.entries[3, 3]

    def determinant(self) -> complex:
        return complex(np.linalg.det(self.entries))

    def sub_block(self) -> np.ndarray:
        """2x2 matrix mapping (a_in[+w_S], a_in[-w_I]) to the same outputs."""
        if self.m1 is None:
            raise ValueError("sub-block only defined for the tuned degenerate amplifier")
        return np.array([[self.m1, self.m2], [np.conj(self.m2), self.m1]]) / self.d


def _quartet(r_ss, s_si, s_is, r_ii):
    return np.array(
        [
            [r_ss, 0, 0, s_si],
            [0, np.conj(r_ss), np.conj(s_si), 0],
            [0, np.conj(s_is), np.conj(r_ii), 0],
            [s_is, 0, 0, r_ii],
        ],
        dtype=complex,
    )


def _check_rho(rho):
    if rho < 0:
        raise ValueError("reduced coupling must be non-negative")
    if rho >= 1.0:
        raise StabilityViolation(f"rho = {rho} >= 1")


def ndpa_scattering(model: AmplifierModel, g_ab, pump_frequency, theta, omega_s) -> ScatteringBlock:
    """Two-mode scattering matrix of the non-degenerate amplifier.

    Parameters
    ----------
    model : AmplifierModel
        Must be non-degenerate.
    g_ab : float
        Effective parametric coupling (rad/s).
    pump_frequency : float
        Pump angular frequency; the idler sits at ``pump_frequency - omega_s``.
    theta : float
        Pump phase.
    omega_s : float
        Signal angular frequency.
    """
    if model.degenerate:
        raise ValueError("ndpa_scattering needs a non-degenerate model")
    omega_i = pump_frequency - omega_s
    if omega_i <= 0:
        raise ValueError("idler frequency must be positive")
    rho = 2.0 * g_ab / math.sqrt(model.signal.kappa * model.idler.kappa)
    _check_rho(rho)
    xa = inverse_susceptibility(model.signal, omega_s)
    xb = inverse_susceptibility(model.idler, omega_i)
    r2 = rho * rho
    den = xa * np.conj(xb) - r2
    r_ss = (np.conj(xa) * np.conj(xb) + r2) / den
    r_ii = (xa * xb + r2) / den
    s_si = -2.0 * rho * np.exp(-1j * theta) / den
    s_is = -2.0 * rho * np.exp(1j * theta) / den
    return ScatteringBlock(
        entries=_quartet(r_ss, s_si, s_is, r_ii),
        signal_frequency=omega_s,
        idler_frequency=omega_i,
        basis=Basis.FREQUENCY_QUARTET,
        rho=rho,
        theta=theta,
    )


def dpa_scattering(model: AmplifierModel, g_aa, pump_frequency, theta, omega_s) -> ScatteringBlock:
    """Single-mode scattering of the degenerate amplifier, pump tuned to 2 w_a.

    Returns the full quartet (idler column built with chi_b = chi_a) and the
    sub-block factors M1 = |chi^-1|^2 + rho^2, M2 = -2 rho e^{-i theta},
    D = chi^-2 - rho^2.
    """
    if not model.degenerate:
        raise ValueError("dpa_scattering needs a degenerate model")
    target = 2.0 * model.signal.omega
    if abs(pump_frequency - target) > RESONANCE_RTOL * target:
        raise UnsupportedDetuning("only the pump tuned to twice the mode frequency is implemented")
    rho = 4.0 * g_aa / model.signal.kappa
    _check_rho(rho)
    omega_i = pump_frequency - omega_s
    x = inverse_susceptibility(model.signal, omega_s)
    xi = inverse_susceptibility(model.signal, omega_i)
    r2 = rho * rho
    den = x * np.conj(xi) - r2
    r_ss = (np.conj(x) * np.conj(xi) + r2) / den
    r_ii = (x * xi + r2) / den
    s_si = -2.0 * rho * np.exp(-1j * theta) / den
    s_is = -2.0 * rho * np.exp(1j * theta) / den
    return ScatteringBlock(
        entries=_quartet(r_ss, s_si, s_is, r_ii),
        signal_frequency=omega_s,
        idler_frequency=omega_i,
        basis=Basis.QUADRATURE_PAIR,
        rho=rho,
        theta=theta,
        m1=complex(abs(x) ** 2 + r2),
        m2=complex(-2.0 * rho * np.exp(-1j * theta)),
        d=complex(x * x - r2),
    )


def quadrature_gains(block: ScatteringBlock):
    """Power gains of the amplified and de-amplified quadratures.

    Lambda_par/perp = (|chi^-1|^2 +/- 2 rho + rho^2) / D. The denominator is
    the sub-block determinant D, whose modulus makes G_par * G_perp = 1.
    """
    if block.basis is not Basis.QUADRATURE_PAIR:
        raise ValueError("quadrature gains need a degenerate (quadrature) block")
    x2 = block.m1.real - block.rho ** 2
    lam_par = (x2 + 2.0 * block.rho + block.rho ** 2) / block.d
    lam_perp = (x2 - 2.0 * block.rho + block.rho ** 2) / block.d
    return abs(lam_par) ** 2, abs(lam_perp) ** 2


@dataclass(frozen=True)
class PhasePreservingOutput:
    gain_coefficient: float
    conjugate_coefficient: float
    added_noise: float

    def apply(self, a_in, b_in_conj):
        return self.gain_coefficient * a_in + self.conjugate_coefficient * b_in_conj


def phase_preserving_output(gain, a_in=None, b_in_conj=None):
    """Reflection amplifier with the idler port terminated in vacuum.

    ``a_out = sqrt(G) a_in + sqrt(G-1) b_in^dag``; the input-referred added
    noise is ``(1 - 1/G)/2`` quanta. If amplitudes are given the output
    amplitude is returned alongside.
    """
    if gain < 1.0:
        raise ValueError("gain must be >= 1")
    out = PhasePreservingOutput(
        gain_coefficient=math.sqrt(gain),
        conjugate_coefficient=math.sqrt(gain - 1.0),
        added_noise=0.5 * (1.0 - 1.0 / gain),
    )
    if a_in is None:
        return out
    return out, out.apply(a_in, 0.0 if b_in_conj is None else b_in_conj)


def added_noise_quanta(gain: float) -> float:
    return phase_preserving_output(gain).added_noise
