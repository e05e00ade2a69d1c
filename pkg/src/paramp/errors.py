"""Exception types raised by the solvers.

Every error derives from :class:`ParampError` so callers (and the CLI) can
catch the whole family at once.
"""


class ParampError(Exception):
    """Base class for all package errors."""


class StabilityViolation(ParampError):
    """Reduced coupling at or above the parametric-oscillation ceiling."""


class UnsupportedDetuning(ParampError):
    """Degenerate pump not tuned to twice the mode frequency."""


class AboveThreshold(ParampError):
    """Undepleted coupling already at or above threshold."""


class NonConvergence(ParampError):
    """Iterative solver exhausted its budget.

    Attributes
    ----------
    history : list of float
        Residual history of the failed iteration.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class NotCompressed(ParampError):
    """Gain never dropped by the requested amount inside the sweep window."""


class SolverExhausted(ParampError):
    """Multi-start root search gave inconsistent root counts."""


class Inconclusive(ParampError):
    """Threshold search hit the pump cap without a definite answer."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NoThreshold(ParampError):
    """No oscillation threshold exists below the pump-power cap."""


class MarginallyStable(ParampError):
    """Drift matrix has an eigenvalue with (numerically) zero real part.

    The linearized Gaussian theory does not apply; use the stochastic
    sampler in :mod:`paramp.wigner_mc` instead.
    """


class PhaseConventionUnavailable(ParampError):
    """Steady amplitudes cannot be rotated onto the real axis."""


class GridTooNarrow(ParampError):
    """Evaluation grid captures too little of the probability mass."""


class StepInstability(ParampError):
    """A stochastic trajectory blew up.

    Attributes
    ----------
    trajectory : int
        Index of the first offending trajectory.
    """

    def __init__(self, message, trajectory=-1):
        super().__init__(message)
        self.trajectory = trajectory


class InsufficientSamples(ParampError):
    """Too few effective samples for a statistical estimate."""


class BistableDrive(ParampError):
    """Duffing drive lies in the bistable region; all branches attached.

    Attributes
    ----------
    branches : list of dict
        One entry per real root of the cubic in the photon number.
    """

    def __init__(self, message, branches=None):
        super().__init__(message)
        self.branches = list(branches or [])


class FluxNearHalfQuantum(ParampError):
    """SQUID flux bias too close to half a flux quantum."""


class NoMatching(ParampError):
    """Frequency-matching Newton iteration failed."""


class ConfigError(ParampError):
    """Invalid experiment configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
