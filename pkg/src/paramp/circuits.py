"""Effective amplifier parameters of four Josephson circuit realizations.

* single junction driven on its own port (Duffing / Kerr oscillator),
* DC-SQUID with RF flux modulation (parametrically driven oscillator),
* two cavities sharing a junction, double-pumped (degenerate amplifier),
* Josephson ring modulator (three-wave mixer, non-degenerate amplifier).

Energies are in J, capacitances in F, inductances in H and every frequency
or rate in rad/s. Drive amplitudes are incident flux amplitudes in
sqrt(photons/s).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.constants import e as E_CHARGE, hbar as HBAR

from .errors import BistableDrive, FluxNearHalfQuantum, NoMatching

PHI_ZPF_WARN = 0.3
PHI_ZPF_MAX = 0.5
COS_GUARD = 0.05
EPS_WARN = 0.2
ROOT_IMAG_TOL = 1e-9


def phi_zpf(L_J, C_sigma):
    """Zero-point phase (2 e^2/hbar)^(1/2) (L_J/C_sigma)^(1/4)."""
    return math.sqrt(2.0 * E_CHARGE ** 2 / HBAR) * (L_J / C_sigma) ** 0.25


def _check_phi(name, phi):
    if not phi < PHI_ZPF_MAX:
        raise ValueError(f"{name} = {phi:.3g} >= {PHI_ZPF_MAX}: quartic expansion invalid")
    if phi > PHI_ZPF_WARN:
        warnings.warn(f"{name} = {phi:.3g} > {PHI_ZPF_WARN}: expansion is marginal", stacklevel=3)


# --------------------------------------------------------------------------
# single junction (Duffing)


@dataclass(frozen=True)
class JunctionParams:
    """Josephson junction shunted by a total capacitance.

    Parameters
    ----------
    E_J : float
        Josephson energy (J).
    C_sigma : float
        Junction plus external capacitance (F).
    """

    E_J: float
    C_sigma: float

    def __post_init__(self):
        if not (self.E_J > 0 and self.C_sigma > 0):
            raise ValueError("E_J and C_sigma must be positive")
        _check_phi("phi_zpf", self.phi_zpf)

    @classmethod
    def from_inductance(cls, L_J, C_sigma):
        return cls((HBAR / (2.0 * E_CHARGE)) ** 2 / L_J, C_sigma)

    @property
    def L_J(self) -> float:
        return (HBAR / (2.0 * E_CHARGE)) ** 2 / self.E_J

    @property
    def phi_zpf(self) -> float:
        return phi_zpf(self.L_J, self.C_sigma)

    @property
    def kerr(self) -> float:
        """Photon-number frequency shift K = -e^2/(2 hbar C_sigma), always negative."""
        return -E_CHARGE ** 2 / (2.0 * HBAR * self.C_sigma)

    @property
    def omega_tilde(self) -> float:
        """Small-amplitude mode frequency 1/sqrt(L_J C_sigma) + K."""
        return 1.0 / math.sqrt(self.L_J * self.C_sigma) + self.kerr


@dataclass(frozen=True)
class DuffingOperatingPoint:
    alpha: complex  # intracavity amplitude, sqrt(photons)
    photons: float
    omega_a: float  # shifted mode frequency
    g_aa: float
    theta: float
    pump_frequency: float  # Omega_aa = 2 Omega
    kerr: float
    omega_tilde: float


def _duffing_roots(p, delta):
    """Real non-negative roots x of x[(delta + x)^2 + 1/4] = p.

    ``x = n |K| / kappa`` and ``delta = (Omega - omega_tilde)/kappa``; the
    sign of K (negative) is already folded in.
    """
    coeffs = [1.0, 2.0 * delta, delta * delta + 0.25, -p]
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    real = np.sort(roots[np.abs(roots.imag) <= ROOT_IMAG_TOL * scale].real)
    real = real[real >= 0.0]
    poly = np.polynomial.Polynomial(coeffs[::-1])
    dpoly = poly.deriv()
    out = []
    for x in real:
        for _ in range(3):  # polish the companion-matrix root
            d = dpoly(x)
            if d == 0:
                break
            x = x - poly(x) / d
        out.append(float(x))
    return out


def _duffing_point(junction, alpha_in, drive_frequency, kappa, photons):
    K = junction.kerr
    wt = junction.omega_tilde
    alpha = 1j * math.sqrt(kappa) * alpha_in / (
        (drive_frequency - wt) + 0.5j * kappa - K * photons
    )
    coupling = 0.5 * K * np.conj(alpha) ** 2
    return DuffingOperatingPoint(
        alpha=complex(alpha),
        photons=float(photons),
        omega_a=wt + 2.0 * K * photons,
        g_aa=float(abs(coupling)),
        theta=float(np.angle(coupling)) if coupling != 0 else 0.0,
        pump_frequency=2.0 * drive_frequency,
        kerr=K,
        omega_tilde=wt,
    )


def duffing_alpha0(junction, alpha_in, drive_frequency, kappa):
    """Lowest-order (perturbative) intracavity amplitude.

    The Kerr term is evaluated with the photon number ``4|alpha_in|^2/kappa``
    of a resonantly driven linear cavity.
    """
    K = junction.kerr
    return 1j * math.sqrt(kappa) * alpha_in / (
        (drive_frequency - junction.omega_tilde) + 0.5j * kappa - 4.0 * K * abs(alpha_in) ** 2 / kappa
    )


def duffing_effective(junction: JunctionParams, alpha_in, drive_frequency, kappa) -> DuffingOperatingPoint:
    """Self-consistent Duffing operating point and effective pump parameters.

    Solves ``n [(Omega - omega_tilde - K n)^2 + kappa^2/4] = kappa |alpha_in|^2``
    for the intracavity photon number ``n`` and recovers the phase from
    ``alpha = i sqrt(kappa) alpha_in / (Omega - omega_tilde + i kappa/2 - K n)``.

    Parameters
    ----------
    alpha_in : complex
        Incident drive amplitude, sqrt(photons/s).
    drive_frequency : float
        Drive angular frequency Omega.
    kappa : float
        Port coupling rate of the mode.

    Returns
    -------
    DuffingOperatingPoint
        ``omega_a = omega_tilde + 2 K n``, ``g_aa e^{i theta} = K alpha*^2 / 2``
        and the degenerate pump frequency ``2 Omega``.

    Raises
    ------
    BistableDrive
        When the cubic has three real roots. ``branches`` carries every
        root as an operating point; none is selected.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    K = junction.kerr
    wt = junction.omega_tilde
    if not (abs(K) < kappa < wt):
        warnings.warn("hierarchy omega_tilde >> kappa >> |K| is violated", stacklevel=2)
    if alpha_in == 0:
        return _duffing_point(junction, 0.0, drive_frequency, kappa, 0.0)
    p = abs(K) * abs(alpha_in) ** 2 / kappa ** 2
    delta = (drive_frequency - wt) / kappa
    roots = _duffing_roots(p, delta)
    scale = kappa / abs(K)
    points = [_duffing_point(junction, alpha_in, drive_frequency, kappa, x * scale) for x in roots]
    if len(points) == 1:
        return points[0]
    if not points:
        raise RuntimeError("Duffing cubic has no non-negative real root")
    raise BistableDrive(
        f"drive lies in the bistable region ({len(points)} real photon-number roots)",
        branches=[
            {"photons": pt.photons, "alpha": pt.alpha, "omega_a": pt.omega_a, "point": pt}
            for pt in points
        ],
    )


def duffing_sweep(junction, alpha_in_values, drive_frequency, kappa):
    """Operating points along increasing drive; stops with BistableDrive."""
    return [duffing_effective(junction, a, drive_frequency, kappa) for a in alpha_in_values]


# --------------------------------------------------------------------------
# flux-pumped DC-SQUID


@dataclass(frozen=True)
class SquidParams:
    """DC-SQUID oscillator with an RF-modulated flux bias.

    Parameters
    ----------
    L_J : float
        Inductance of the junction pair at zero flux (H).
    C_sigma : float
        Shunt capacitance (F).
    flux_bias : float
        DC flux in units of the flux quantum. The modulation is
        ``Phi_ext = flux_bias * Phi_0 * (1 + eps cos(Omega t))``; the
        standard operating point is 1/4.
    modulation_depth : float
        Relative flux modulation eps.
    pump_frequency : float, optional
        Modulation frequency Omega; defaults to twice the bias-point resonance.
    """

    L_J: float
    C_sigma: float
    flux_bias: float = 0.25
    modulation_depth: float = 0.0
    pump_frequency: Optional[float] = None

    def __post_init__(self):
        if not (self.L_J > 0 and self.C_sigma > 0):
            raise ValueError("L_J and C_sigma must be positive")
        if self.modulation_depth < 0:
            raise ValueError("modulation depth must be non-negative")
        if self.modulation_depth > EPS_WARN:
            warnings.warn(f"modulation depth {self.modulation_depth} is not small", stacklevel=3)

    @property
    def cos_factor(self) -> float:
        return abs(math.cos(math.pi * self.flux_bias))

    @property
    def L_squid(self) -> float:
        c = self.cos_factor
        if c < COS_GUARD:
            raise FluxNearHalfQuantum(f"|cos(pi Phi/Phi0)| = {c:.3g} < {COS_GUARD}")
        return self.L_J / c


@dataclass(frozen=True)
class SquidEffective:
    omega0: float
    mu_r: float
    g_aa: float
    pump_frequency: float  # Omega_aa = Omega
    L_squid: float


def _flux_sensitivity(flux_bias):
    # relative change of 1/L_squid per relative flux change, normalized to 1 at 1/4;
    # tan(pi/4) is exactly 1, skip the one-ulp rounding of math.tan
    if flux_bias == 0.25:
        return 1.0
    return 4.0 * flux_bias * abs(math.tan(math.pi * flux_bias))


def squid_effective(squid: SquidParams) -> SquidEffective:
    """Parametric pump rate of the flux-modulated SQUID.

    ``omega0 = 1/sqrt(C_sigma L_squid)``, ``mu_r = pi eps/4`` at the quarter
    flux bias, ``g_aa = mu_r omega0 / 4`` and ``Omega_aa = Omega``.

    Raises
    ------
    FluxNearHalfQuantum
        If the bias makes ``|cos(pi Phi/Phi0)| < 0.05``.
    """
    L = squid.L_squid
    omega0 = 1.0 / math.sqrt(squid.C_sigma * L)
    mu_r = math.pi * squid.modulation_depth / 4.0 * _flux_sensitivity(squid.flux_bias)
    pump = 2.0 * omega0 if squid.pump_frequency is None else squid.pump_frequency
    return SquidEffective(omega0=omega0, mu_r=mu_r, g_aa=mu_r * omega0 / 4.0, pump_frequency=pump, L_squid=L)


# --------------------------------------------------------------------------
# double-pumped two-cavity device


@dataclass(frozen=True)
class DoublePumpParams:
    """Two cavity modes a, c coupled through a junction mode q.

    ``eps_p`` and ``eps_c`` are the pump and drive strengths on mode c, in rad/s.
    """

    phi_a: float
    phi_c: float
    phi_q: float
    E_J: float
    omega_a: float
    omega_c: float
    kappa_c: float
    eps_p: complex = 0.0
    eps_c: complex = 0.0

    def __post_init__(self):
        for name in ("phi_a", "phi_c", "phi_q"):
            _check_phi(name, getattr(self, name))
        if not (self.E_J > 0 and self.kappa_c > 0 and self.omega_a > 0 and self.omega_c > 0):
            raise ValueError("E_J, kappa_c and mode frequencies must be positive")

    @property
    def chi_aa(self):
        return self.E_J * self.phi_a ** 4 / (2.0 * HBAR)

    @property
    def chi_cc(self):
        return self.E_J * self.phi_c ** 4 / (2.0 * HBAR)

    @property
    def chi_ac(self):
        return self.E_J * self.phi_a ** 2 * self.phi_c ** 2 / HBAR

    def xi_p(self, omega_p):
        """Pump-induced displacement -i eps_p / (kappa_c/2 + i(omega_c - omega_p))."""
        return -1j * self.eps_p / (0.5 * self.kappa_c + 1j * (self.omega_c - omega_p))


@dataclass(frozen=True)
class DoublePumpEffective:
    g2: complex
    omega_p: float
    omega_d: float
    xi_p: complex
    chi_aa: float
    chi_cc: float
    chi_ac: float
    iterations: int
    residual: float

    @property
    def g2_modulus(self):
        return abs(self.g2)


def _matching_residual(params, omega_p, omega_d):
    xi2 = abs(params.xi_p(omega_p)) ** 2
    wa = params.omega_a - 0.5 * (omega_d + omega_p) - params.chi_aa - params.chi_ac * xi2
    wc = params.omega_c - omega_d - params.chi_cc - params.chi_cc * xi2
    return np.array([wa, wc])


def _matching_jacobian(params, omega_p):
    det = params.omega_c - omega_p
    den = 0.25 * params.kappa_c ** 2 + det ** 2
    # d|xi_p|^2 / d omega_p
    dxi2 = abs(params.eps_p) ** 2 * 2.0 * det / den ** 2
    return np.array(
        [
            [-0.5 - params.chi_ac * dxi2, -0.5],
            [-params.chi_cc * dxi2, -1.0],
        ]
    )


def double_pump_effective(params: DoublePumpParams, tol=1e-9, max_iter=50) -> DoublePumpEffective:
    """Kerr constants, pump frequencies and parametric rate of the double pump.

    Solves the frequency matching ``omega_a~ = omega_c~ = 0`` for the pump
    and drive frequencies by Newton iteration from the Kerr-free guess
    ``omega_d = omega_c``, ``omega_p = 2 omega_a - omega_c``; the equations
    couple through the Stark shifts ``|xi_p|^2``. ``tol`` is relative to
    ``omega_a``.

    Raises
    ------
    NoMatching
        If the iteration does not converge.
    """
    x = np.array([2.0 * params.omega_a - params.omega_c, params.omega_c])
    scale = params.omega_a
    res = _matching_residual(params, *x)
    it = 0
    while np.max(np.abs(res)) > tol * scale:
        if it >= max_iter:
            raise NoMatching(f"frequency matching did not converge, residual {np.max(np.abs(res)):.3g} rad/s")
        step = np.linalg.solve(_matching_jacobian(params, x[0]), -res)
        if not np.all(np.isfinite(step)):
            raise NoMatching("singular matching Jacobian")
        x = x + step
        res = _matching_residual(params, *x)
        it += 1
    omega_p, omega_d = (float(v) for v in x)
    xi = complex(params.xi_p(omega_p))
    return DoublePumpEffective(
        g2=complex(0.5 * params.chi_ac * np.conj(xi)),
        omega_p=omega_p,
        omega_d=omega_d,
        xi_p=xi,
        chi_aa=params.chi_aa,
        chi_cc=params.chi_cc,
        chi_ac=params.chi_ac,
        iterations=it,
        residual=float(np.max(np.abs(res))),
    )


# --------------------------------------------------------------------------
# Josephson ring modulator


@dataclass(frozen=True)
class JrmEffective:
    """Non-degenerate pump rate from the ring modulator.

    ``g_ab`` follows the circuit evaluation ``g3 |sqrt(kappa_c) alpha_in /
    (-i(Omega - omega_c) + kappa_c)|``. On pump resonance it is half the
    input-output rate ``2 g3 |c_in| / sqrt(kappa_c)`` used by the amplifier
    model; ``g_ab_input_output`` carries that convention.
    """

    g_ab: float
    theta: float
    pump_frequency: float
    g_ab_input_output: float = field(default=0.0)


def jrm_effective(
    g3,
    alpha_in,
    drive_frequency,
    omega_c,
    kappa_c,
    omega_a=None,
    omega_b=None,
    kappa_a=None,
    kappa_b=None,
) -> JrmEffective:
    """Effective coupling of the pumped three-wave mixer.

    The detuning in the pump-mode response is taken at the drive frequency
    Omega. Optional signal and idler mode data are only used to check the
    hierarchy ``omega_c >> omega_b > omega_a > kappa_c >> kappa_a ~ kappa_b >> g3``.
    """
    if not (g3 >= 0 and kappa_c > 0):
        raise ValueError("g3 must be non-negative and kappa_c positive")
    _check_hierarchy(g3, omega_c, kappa_c, omega_a, omega_b, kappa_a, kappa_b)
    z = math.sqrt(kappa_c) * alpha_in / (-1j * (drive_frequency - omega_c) + kappa_c)
    g_ab = g3 * abs(z)
    # g_ab cos(Omega t + theta) = g3 Re[z e^{-i Omega t}] fixes theta = -arg z
    theta = -float(np.angle(z)) + 0.0 if z != 0 else 0.0  # + 0.0 drops a negative zero
    return JrmEffective(g_ab=g_ab, theta=theta, pump_frequency=drive_frequency, g_ab_input_output=2.0 * g_ab)


def _check_hierarchy(g3, omega_c, kappa_c, omega_a, omega_b, kappa_a, kappa_b):
    msgs = []
    if omega_a is not None and not omega_a > kappa_c:
        msgs.append("omega_a > kappa_c")
    if omega_a is not None and omega_b is not None and not omega_c > omega_b > omega_a:
        msgs.append("omega_c > omega_b > omega_a")
    for k in (kappa_a, kappa_b):
        if k is not None and not kappa_c > k > g3:
            msgs.append("kappa_c > kappa_a,b > g3")
            break
    if msgs:
        warnings.warn("three-wave mixer hierarchy violated: " + "; ".join(msgs), stacklevel=3)


def degenerate_rho(g_aa, kappa_a):
    """Reduced coupling 4 g_aa / kappa_a of an effective degenerate amplifier."""
    return 4.0 * g_aa / kappa_a


def nondegenerate_rho(g_ab, kappa_a, kappa_b):
    """Reduced coupling 2 g_ab / sqrt(kappa_a kappa_b)."""
    return 2.0 * g_ab / math.sqrt(kappa_a * kappa_b)
