"""Mean-field pump depletion: self-consistent coupling, output power, 1 dB points.

Both topologies share the self-consistency relation

    rho = rho0 * | 1 - rho0 * rho/(1-rho^2)^2 * P_in/P_c - v * rho/(1-rho^2) |

with ``v = g / (2 sqrt(kappa_c) |c_in|)``; the second term is depletion by the
coherent signal and the third by amplified vacuum fluctuations. The
degenerate case differs only through the definition of ``rho0`` (which
absorbs the factor 2 on its signal term) and the output-power formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import AboveThreshold, NonConvergence, NotCompressed
from .model import (
    AmplifierModel,
    DriveConditions,
    dbm_to_flux,
    flux_to_dbm,
    ideal_gain,
    reduced_coupling,
)

DEFAULT_WINDOW_DBM = (-160.0, -50.0)
POINTS_PER_DECADE = 20


@dataclass(frozen=True)
class DepletedOperatingPoint:
    rho: float
    rho0: float
    gain: float
    p_out_total: float
    p_in_coh: float
    converged: bool
    iterations: int
    residual: float
    method: str = "fixed-point"


@dataclass(frozen=True)
class DepletionTerms:
    """Dimensionless inputs of the self-consistency map."""

    rho0: float
    signal_ratio: float  # P_in / P_c
    vacuum_coeff: float  # g / (2 sqrt(kappa_c) |c_in|)

    def rhs(self, rho):
        rho = np.asarray(rho, dtype=float)
        one_m = 1.0 - rho * rho
        inner = 1.0 - self.rho0 * rho / one_m ** 2 * self.signal_ratio - self.vacuum_coeff * rho / one_m
        return self.rho0 * np.abs(inner)

    def residual(self, rho):
        return rho - self.rhs(rho)


def depletion_terms(model: AmplifierModel, drive: DriveConditions) -> DepletionTerms:
    rho0 = reduced_coupling(model, drive)
    c_in = drive.pump_flux_amplitude
    if c_in <= 0:
        return DepletionTerms(0.0, 0.0, 0.0)
    return DepletionTerms(
        rho0=rho0,
        signal_ratio=drive.signal_flux / c_in ** 2,
        vacuum_coeff=model.coupling / (2.0 * math.sqrt(model.pump.kappa) * c_in),
    )


def vacuum_output_flux(kappa_a, gain, rho):
    """Amplified-vacuum output flux (kappa_a/sqrt(G)) (G-1) (1+rho^2)/8."""
    return kappa_a / math.sqrt(gain) * (gain - 1.0) * (1.0 + rho * rho) / 8.0


def _scan_grid(rho0):
    lin = np.linspace(0.0, rho0, 2001)
    tail = rho0 - rho0 * np.geomspace(1e-13, 1e-3, 200)
    return np.unique(np.concatenate([lin, tail]))


def smallest_root(terms: DepletionTerms):
    """Smallest root of rho - RHS(rho) on [0, rho0] (the continuous branch)."""
    if terms.rho0 == 0.0:
        return 0.0
    grid = _scan_grid(terms.rho0)
    vals = terms.residual(grid)
    idx = np.flatnonzero(vals >= 0.0)
    if idx.size == 0:
        raise NonConvergence("no root of the self-consistency relation on [0, rho0]", history=[])
    k = idx[0]
    if vals[k] == 0.0:
        return float(grid[k])
    return brentq(terms.residual, grid[k - 1], grid[k], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _fixed_point(terms, rho_init, damping, tol, max_iter, window=500):
    rho = rho_init
    history = []
    checkpoint = math.inf
    for k in range(1, max_iter + 1):
        new = (1.0 - damping) * rho + damping * float(terms.rhs(rho))
        new = min(max(new, 0.0), terms.rho0)
        step = abs(new - rho)
        rho = new
        if k % 50 == 0 or step < tol:
            history.append(step)
        if step < tol:
            return rho, k, history, True
        if k % window == 0:
            # no contraction over a window: the damped map does not converge here
            if step > 0.5 * checkpoint:
                return rho, k, history, False
            checkpoint = step
    return rho, max_iter, history, False


def solve_rho(model, drive, rho_init=None, damping=0.3, tol=1e-12, max_iter=100_000, method="auto"):
    """Self-consistent depleted coupling for either topology.

    Parameters
    ----------
    rho_init : float, optional
        Warm start (continuation); defaults to ``rho0``.
    damping : float
        Under-relaxation factor of the fixed-point map.
    method : {"auto", "fixed-point", "bracket"}
        ``auto`` runs the damped fixed-point iteration and falls back to a
        bracketed root search when it stalls or lands off the continuous
        branch. ``bracket`` goes straight to the bracketed search.

    Raises
    ------
    AboveThreshold
        If ``rho0 >= 1``.
    NonConvergence
        If neither strategy produces a root.
    """
    terms = depletion_terms(model, drive)
    if terms.rho0 >= 1.0:
        raise AboveThreshold(f"rho0 = {terms.rho0:.6g} >= 1, use the semiclassical solver")
    if method not in ("auto", "fixed-point", "bracket"):
        raise ValueError(f"unknown method {method!r}")
    rho, iters, history, ok, used = terms.rho0, 0, [], False, method
    if terms.rho0 == 0.0:
        rho, ok, used = 0.0, True, "fixed-point"
    elif method != "bracket":
        start = terms.rho0 if rho_init is None else float(rho_init)
        rho, iters, history, ok = _fixed_point(terms, start, damping, tol, max_iter)
        used = "fixed-point"
        if ok and method == "auto":
            root = smallest_root(terms)
            if abs(root - rho) > 1e-9:
                ok = False
    if not ok:
        if method == "fixed-point":
            raise NonConvergence("damped fixed-point iteration did not converge", history=history)
        rho = smallest_root(terms)
        used = "bracket"
    res = abs(float(terms.residual(rho)))
    gain = ideal_gain(rho)
    point = DepletedOperatingPoint(
        rho=rho,
        rho0=terms.rho0,
        gain=gain,
        p_out_total=0.0,
        p_in_coh=drive.signal_flux,
        converged=True,
        iterations=iters,
        residual=res,
        method=used,
    )
    return replace(point, p_out_total=output_power(model, point))


def solve_rho_ndpa(model, drive, **kw):
    if model.degenerate:
        raise ValueError("solve_rho_ndpa needs a non-degenerate model")
    return solve_rho(model, drive, **kw)


def solve_rho_dpa(model, drive, **kw):
    if not model.degenerate:
        raise ValueError("solve_rho_dpa needs a degenerate model")
    return solve_rho(model, drive, **kw)


def output_power(model: AmplifierModel, point: DepletedOperatingPoint) -> float:
    """Total output flux on the signal port (photons/s).

    Non-degenerate: ``G P_in + vac``; degenerate: ``(2G-1) P_in + vac``, with
    ``vac = (kappa_a/sqrt(G)) (G-1) (1+rho^2)/8``.
    """
    coh = (2.0 * point.gain - 1.0) if model.degenerate else point.gain
    return coh * point.p_in_coh + vacuum_output_flux(model.signal.kappa, point.gain, point.rho)


def sweep_signal(model, drive_template, p_in_fluxes, **kw):
    """Depleted operating points along increasing signal flux, with warm starts."""
    out = []
    rho = None
    for p in p_in_fluxes:
        pt = solve_rho(model, replace(drive_template, signal_flux=float(p)), rho_init=rho, **kw)
        rho = pt.rho
        out.append(pt)
    return out


@dataclass(frozen=True)
class CompressionPoint:
    p_in: float  # photons/s
    p_in_dbm: float
    gain: float  # linear gain at the point
    reference_gain: float

    @property
    def gain_db(self):
        return 10.0 * math.log10(self.gain)


def compression_point(
    model,
    drive_template,
    target_drop_db=1.0,
    reference="small-signal",
    window_dbm=DEFAULT_WINDOW_DBM,
    points_per_decade=POINTS_PER_DECADE,
    rtol=1e-6,
):
    """Signal flux at which the gain has dropped by ``target_drop_db``.

    Parameters
    ----------
    reference : {"small-signal", "undepleted"}
        Gain the drop is measured from: the depleted gain at zero signal
        (vacuum depletion included) or the stiff-pump gain ``G(rho0)``.
    window_dbm : (float, float)
        Sweep window for the incident signal power.

    Raises
    ------
    NotCompressed
        If the drop is not reached inside the window.
    """
    if target_drop_db < 0:
        raise ValueError("target_drop_db must be non-negative")
    carrier = drive_template.signal_frequency or model.signal.omega
    lo_dbm, hi_dbm = window_dbm
    n = max(2, int(round((hi_dbm - lo_dbm) / 10.0 * points_per_decade)) + 1)
    grid_dbm = np.linspace(lo_dbm, hi_dbm, n)
    if reference == "small-signal":
        g_ref = solve_rho(model, replace(drive_template, signal_flux=0.0)).gain
    elif reference == "undepleted":
        g_ref = ideal_gain(reduced_coupling(model, drive_template))
    else:
        raise ValueError(f"unknown reference {reference!r}")
    target = g_ref * 10.0 ** (-0.1 * target_drop_db)
    if target_drop_db == 0:
        p0 = float(dbm_to_flux(grid_dbm[0], carrier))
        g0 = solve_rho(model, replace(drive_template, signal_flux=p0)).gain
        return CompressionPoint(p0, float(grid_dbm[0]), g0, g_ref)

    def gain_at(p_dbm, rho_init=None):
        flux = float(dbm_to_flux(p_dbm, carrier))
        return solve_rho(model, replace(drive_template, signal_flux=flux), rho_init=rho_init)

    prev_dbm, prev_rho = None, None
    for p_dbm in grid_dbm:
        pt = gain_at(p_dbm, prev_rho)
        if pt.gain <= target:
            if prev_dbm is None:
                raise NotCompressed("gain already below target at the bottom of the sweep window")
            break
        prev_dbm, prev_rho = p_dbm, pt.rho
    else:
        raise NotCompressed(
            f"gain does not drop by {target_drop_db} dB for P_in <= {hi_dbm} dBm"
        )
    # bisection in log power; dBm is 10 log10 so this is bisection on log P_in
    xtol = 10.0 * math.log10(1.0 + rtol)
    p_star = brentq(lambda x: gain_at(x, prev_rho).gain - target, prev_dbm, p_dbm, xtol=xtol)
    final = gain_at(p_star, prev_rho)
    return CompressionPoint(float(dbm_to_flux(p_star, carrier)), float(p_star), final.gain, g_ref)


def compression_line(points):
    """Least-squares slope and intercept of gain (dB) versus P_1dB (dBm)."""
    x = np.array([p.p_in_dbm for p in points])
    y = np.array([p.gain_db for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def signal_dbm(model, flux):
    return flux_to_dbm(flux, model.signal.omega)
