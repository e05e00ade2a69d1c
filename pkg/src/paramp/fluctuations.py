"""Linearized Fokker-Planck analysis around classical steady states.

Fluctuations are measured in raw quadrature units (vacuum variance 1/4) and
obey ``dx = -A x dt + sqrt(2 D) dW`` so that the stationary covariance solves
``A S + S A^T = 2 diag(D)``. With real steady amplitudes the problem splits
into two independent blocks, one per quadrature ``j = 1, 2`` (real and
imaginary parts). Coordinates are ordered block by block:

* degenerate: ``(z1, u1, z2, u2)``
* non-degenerate: ``(z1, w1, u1, z2, w2, u2)``

where z, w, u are the signal, idler and pump fluctuations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridTooNarrow, MarginallyStable, PhaseConventionUnavailable
from .model import AmplifierModel
from .semiclassical import SteadyState, np_threshold_photons  # noqa: F401 (re-export)

REAL_TOL = 1e-9
MARGINAL_TOL = 1e-12
MIN_GRID_MASS = 0.999


@dataclass(frozen=True)
class FluctuationState:
    """Drift, diffusion and (optionally) stationary covariance.

    ``phases`` are the per-mode frame rotations that made the steady
    amplitudes real: lab-frame fluctuation ``z`` maps to ``z * exp(1j*phase)``.
    ``means`` are the rotated steady amplitudes in scaled units.
    """

    drift: np.ndarray
    diffusion: np.ndarray
    covariance: Optional[np.ndarray] = None
    labels: tuple = ()
    phases: np.ndarray = field(default_factory=lambda: np.zeros(0))
    means: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n(self):
        return self.drift.shape[0]

    def lyapunov_residual(self, covariance=None):
        S = self.covariance if covariance is None else covariance
        R = self.drift @ S + S @ self.drift.T - 2.0 * np.diag(self.diffusion)
        return float(np.max(np.abs(R)))


def _real_frame(scaled, degenerate):
    """Frame rotation making the steady amplitudes real.

    Returns per-mode phases ``phi`` such that ``scaled * exp(1j*phi)`` is
    real, respecting the symmetry of the equations.
    """
    z = np.asarray(scaled, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.all(np.abs(z.imag) <= REAL_TOL * scale):
        return np.zeros(len(z))
    if degenerate:
        a, c = z
        if abs(a) > REAL_TOL * scale:
            pa = -np.angle(a)
        else:
            pa = -0.5 * np.angle(c)
        phases = np.array([pa, 2.0 * pa])
    else:
        a, b, c = z
        pa = -np.angle(a) if abs(a) > REAL_TOL * scale else 0.0
        if abs(b) > REAL_TOL * scale:
            pb = -np.angle(b)
        else:
            pb = -np.angle(c) - pa
        phases = np.array([pa, pb, pa + pb])
    rot = z * np.exp(1j * phases)
    if np.any(np.abs(rot.imag) > REAL_TOL * scale):
        raise PhaseConventionUnavailable(
            "steady amplitudes cannot be rotated real by the symmetry of the equations"
        )
    return phases


def _dpa_block(j, ka, kc, a0, c0):
    sgn = (-1.0) ** j
    A = np.array(
        [
            [0.5 * ka * (1.0 - sgn * c0), 0.5 * ka * a0],
            [-0.5 * ka * a0, 0.5 * kc],
        ]
    )
    return A, np.array([ka / 8.0, kc / 8.0])


def _ndpa_block(j, ka, kb, kc, a0, b0, c0):
    s = math.sqrt(ka * kb)
    sgn = (-1.0) ** j
    A = np.array(
        [
            [0.5 * ka, -sgn * 0.5 * s * c0, 0.5 * s * b0],
            [-sgn * 0.5 * s * c0, 0.5 * kb, 0.5 * s * a0],
            [-0.5 * s * b0, -0.5 * s * a0, 0.5 * kc],
        ]
    )
    return A, np.array([ka / 8.0, kb / 8.0, kc / 8.0])


def assemble_fokker_planck(model: AmplifierModel, steady: SteadyState) -> FluctuationState:
    """Factorized drift and diffusion around a steady state.

    Raises
    ------
    PhaseConventionUnavailable
        If the steady amplitudes cannot be rotated real.
    """
    phases = _real_frame(steady.scaled, model.degenerate)
    z = (np.asarray(steady.scaled) * np.exp(1j * phases)).real
    ka, kc = model.signal.kappa, model.pump.kappa
    n = 2 if model.degenerate else 3
    A = np.zeros((2 * n, 2 * n))
    D = np.zeros(2 * n)
    for j in (1, 2):
        if model.degenerate:
            blk, dif = _dpa_block(j, ka, kc, z[0], z[1])
        else:
            blk, dif = _ndpa_block(j, ka, model.idler.kappa, kc, z[0], z[1], z[2])
        sl = slice((j - 1) * n, j * n)
        A[sl, sl] = blk
        D[sl] = dif
    names = ("z", "u") if model.degenerate else ("z", "w", "u")
    labels = tuple(f"{v}{j}" for j in (1, 2) for v in names)
    return FluctuationState(drift=A, diffusion=D, labels=labels, phases=phases, means=z)


def lyapunov_solve(A, d):
    """Solve ``A S + S A^T = 2 diag(d)`` by the vectorized (Kronecker) system."""
    n = A.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, A) + np.kron(A, eye)
    rhs = (2.0 * np.diag(d)).reshape(-1, order="F")
    S = np.linalg.solve(K, rhs).reshape(n, n, order="F")
    return 0.5 * (S + S.T)


def steady_covariance(fluc: FluctuationState) -> np.ndarray:
    """Stationary covariance of the linearized fluctuations.

    Raises
    ------
    MarginallyStable
        If a drift eigenvalue has real part <= 1e-12 * max rate; the
        linear theory does not apply there and the Monte Carlo sampler
        (``paramp.wigner_mc``) should be used instead.
    """
    eigs = np.linalg.eigvals(fluc.drift)
    scale = float(np.max(np.abs(np.diag(fluc.drift))))
    if np.min(eigs.real) <= MARGINAL_TOL * scale:
        raise MarginallyStable(
            f"drift eigenvalue with real part {np.min(eigs.real):.3g}; "
            "use the truncated-Wigner sampler for this operating point"
        )
    return lyapunov_solve(fluc.drift, fluc.diffusion)


def with_covariance(fluc: FluctuationState) -> FluctuationState:
    from dataclasses import replace

    return replace(fluc, covariance=steady_covariance(fluc))


def quadrature_coordinates(fluc: FluctuationState, amplitudes):
    """Map lab-frame complex amplitudes (..., n_modes) into the factorized
    real coordinates of ``fluc`` (same rotation, same ordering)."""
    z = np.asarray(amplitudes, dtype=complex) * np.exp(1j * fluc.phases)
    return np.concatenate([z.real, z.imag], axis=-1)


def gaussian_wigner_grid(covariance, means, coords, grid):
    """Two-dimensional Gaussian marginal on a rectangular grid.

    Parameters
    ----------
    covariance : (N, N) array
    means : (N,) array
    coords : (int, int)
        Indices of the two coordinates kept.
    grid : (x, y)
        1-D axes; the result has shape ``(len(y), len(x))``.

    Raises
    ------
    GridTooNarrow
        If the grid captures less than 99.9 % of the probability.
    """
    i, k = coords
    S = np.asarray(covariance)[np.ix_([i, k], [i, k])]
    mu = np.asarray(means, dtype=float)[[i, k]]
    x, y = (np.asarray(g, dtype=float) for g in grid)
    X, Y = np.meshgrid(x - mu[0], y - mu[1])
    P = np.linalg.inv(S)
    q = P[0, 0] * X * X + 2.0 * P[0, 1] * X * Y + P[1, 1] * Y * Y
    W = np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(np.linalg.det(S)))
    mass = np.trapezoid(np.trapezoid(W, x, axis=1), y)
    if mass < MIN_GRID_MASS:
        raise GridTooNarrow(f"grid captures only {mass:.6f} of the probability mass")
    return W / mass
