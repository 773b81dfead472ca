"""Exception hierarchy and warning categories.

CLI exit-code mapping: ConfigError -> 2, NumericalError subtree -> 3,
OSError -> 4, anything clean -> 0.
"""

from __future__ import annotations

__all__ = [
    "HitlabError",
    "ConfigError",
    "InvalidRangeError",
    "LengthMismatchError",
    "OutOfRangeError",
    "DegenerateSpectrumError",
    "TriangleError",
    "QuadratureError",
    "NumericalError",
    "StepInstabilityError",
    "BalanceError",
    "NonConvergenceError",
    "NoSignChangeError",
    "TransientError",
    "InsufficientSpanError",
    "UnderResolvedError",
    "EmptyWindowError",
    "TimeStepError",
    "AliasingWarning",
    "InconsistentFlowWarning",
    "NonStationaryWarning",
]


class HitlabError(Exception):
    """Base class for all package errors."""


class ConfigError(HitlabError):
    """Invalid run configuration; carries the offending key path."""

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalError(HitlabError):
    """Base class for numerical failures (CLI exit code 3)."""


class InvalidRangeError(ConfigError):
    """Domain bounds or counts violate their preconditions."""


class LengthMismatchError(HitlabError):
    """Sample array length does not match the grid."""


class OutOfRangeError(HitlabError):
    """A wavenumber or scale falls outside the grid range."""


class DegenerateSpectrumError(NumericalError):
    """Operation undefined on an all-zero (or negative-energy) spectrum."""


class TriangleError(NumericalError):
    """Wavenumber triple does not satisfy the triangle inequality."""


class QuadratureError(NumericalError):
    """Triad quadrature produced a non-finite or negative memory time."""


class StepInstabilityError(NumericalError):
    """A time step clipped more negative energy than the tolerance allows."""


class BalanceError(NumericalError):
    """Discrete energy balance residual exceeded its per-step bound."""


class NonConvergenceError(NumericalError):
    """Iteration reached its limit without meeting the convergence test."""


class NoSignChangeError(NumericalError):
    """Transfer density has no interior zero crossing."""


class TransientError(NumericalError):
    """Decay record has not reached its power-law regime at the fiducial time."""


class InsufficientSpanError(NumericalError):
    """Too few points or too little dynamic range for a meaningful fit."""


class UnderResolvedError(NumericalError):
    """Synthetic time series too short or too coarsely sampled."""


class EmptyWindowError(NumericalError):
    """Rescaled spectra share no overlapping wavenumber window."""


class TimeStepError(NumericalError):
    """Finite-difference spacing too coarse for the requested estimate."""


class AliasingWarning(UserWarning):
    """Separation requested outside the band resolved by the grid."""


class InconsistentFlowWarning(UserWarning):
    """Supplied flow rate disagrees with the profile's own bulk velocity."""


class NonStationaryWarning(UserWarning):
    """A sweep member failed to reach stationarity and was excluded."""
