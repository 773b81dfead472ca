"""Spectral state, canonical initial spectra, and scalar diagnostics.

Conventions (isotropic, 3-D):
    total energy      E_tot = integral E(k) dk
    dissipation       eps   = integral 2 nu k^2 E(k) dk
    rms velocity      U     = sqrt(2 E_tot / 3)            (one component)
    integral scale    L     = (3 pi / 4) integral k^-1 E dk / E_tot
    Reynolds numbers  R_L = U L / nu,   R_lambda = U^2 sqrt(15 / (nu eps))
    dissipation k     k_d = (eps / nu^3)^{1/4}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (DegenerateSpectrumError, InvalidRangeError,
                     LengthMismatchError, OutOfRangeError)
from .grid import WavenumberGrid

__all__ = [
    "SpectralState",
    "ScalarDiagnostics",
    "initial_spectrum",
    "total_energy",
    "dissipation_rate",
    "diagnostics",
    "spectral_density",
]


@dataclass(frozen=True)
class SpectralState:
    """Energy spectrum ``E(k) >= 0`` on a grid, with viscosity and time."""

    grid: WavenumberGrid
    E: np.ndarray
    nu: float
    t: float = 0.0

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        if E.shape != (self.grid.n_bins,):
            raise LengthMismatchError(
                f"spectrum length {E.shape} != {self.grid.n_bins} bins")
        if not np.all(np.isfinite(E)):
            raise DegenerateSpectrumError("spectrum contains non-finite values")
        if np.any(E < 0.0):
            raise DegenerateSpectrumError("spectrum has negative bins")
        if not (self.nu > 0.0 and math.isfinite(self.nu)):
            raise InvalidRangeError(f"viscosity must be positive, got {self.nu}")
        if self.t < 0.0:
            raise InvalidRangeError(f"time must be non-negative, got {self.t}")
        object.__setattr__(self, "E", E)
        E.setflags(write=False)

    def with_spectrum(self, E, t=None) -> "SpectralState":
        return replace(self, E=np.array(E, dtype=float),
                       t=self.t if t is None else float(t))


@dataclass(frozen=True)
class ScalarDiagnostics:
    total_energy: float
    dissipation: float
    rms_velocity: float
    integral_scale: float
    reynolds_L: float
    taylor_reynolds: float
    kolmogorov_wavenumber: float


def total_energy(state: SpectralState) -> float:
    return state.grid.integrate(state.E)


def dissipation_rate(state: SpectralState) -> float:
    k = state.grid.nodes
    return state.grid.integrate(2.0 * state.nu * k * k * state.E)


def diagnostics(state: SpectralState) -> ScalarDiagnostics:
    """Scalar summary of a state; raises on a zero spectrum."""
    e_tot = total_energy(state)
    if e_tot <= 0.0:
        raise DegenerateSpectrumError("diagnostics undefined for zero energy")
    eps = dissipation_rate(state)
    k = state.grid.nodes
    u = math.sqrt(2.0 * e_tot / 3.0)
    length = 0.75 * math.pi * state.grid.integrate(state.E / k) / e_tot
    r_l = u * length / state.nu
    r_lam = u * u * math.sqrt(15.0 / (state.nu * eps)) if eps > 0 else math.inf
    k_d = (eps / state.nu**3) ** 0.25
    return ScalarDiagnostics(
        total_energy=e_tot,
        dissipation=eps,
        rms_velocity=u,
        integral_scale=length,
        reynolds_L=r_l,
        taylor_reynolds=r_lam,
        kolmogorov_wavenumber=k_d,
    )


def initial_spectrum(grid: WavenumberGrid, peak_wavenumber: float,
                     energy: float, nu: float, low_k_exponent: int = 4,
                     t: float = 0.0) -> SpectralState:
    """Canonical low-k power law with a Gaussian roll-off.

    ``E(k) = C k^s exp(-2 (k / k_p)^2)`` with s = 4 (default) or 2; C is set
    numerically so the discrete total energy equals ``energy`` exactly.
    """
    if low_k_exponent not in (2, 4):
        raise InvalidRangeError(
            f"low_k_exponent must be 2 or 4, got {low_k_exponent}")
    if not (grid.k_min < peak_wavenumber < grid.k_max):
        raise OutOfRangeError(
            f"peak wavenumber {peak_wavenumber} outside grid range")
    if energy <= 0.0:
        raise InvalidRangeError(f"energy must be positive, got {energy}")
    k = grid.nodes
    shape = k**low_k_exponent * np.exp(-2.0 * (k / peak_wavenumber) ** 2)
    norm = grid.integrate(shape)
    if norm <= 0.0:
        raise DegenerateSpectrumError("spectrum shape integrates to zero")
    return SpectralState(grid=grid, E=shape * (energy / norm), nu=nu, t=t)


def spectral_density(state: SpectralState) -> np.ndarray:
    """Three-dimensional density C(k) with E(k) = 4 pi k^2 C(k)."""
    k = state.grid.nodes
    return state.E / (4.0 * math.pi * k * k)
