"""Closed-form laminar channel results used as trust anchors.

Plane Poiseuille flow driven by a constant pressure gradient admits exact
expressions for the velocity profile, the viscous dissipation per unit
wall area, and the pressure work; the test suite leans on these as
machine-precision oracles.  All formulas use the dynamic viscosity mu;
spectral modules use the kinematic nu.  The dissipation wavenumber table
isolates the fixed-dissipation, vanishing-viscosity limit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentFlowWarning, OutOfRangeError

__all__ = [
    "ChannelFlowCase",
    "poiseuille_profile",
    "poiseuille_dissipation",
    "pressure_work",
    "batchelor_limit_table",
]


@dataclass(frozen=True)
class ChannelFlowCase:
    """Plane channel of half-height h under pressure gradient P.

    P is the magnitude of the streamwise pressure gradient (force per
    volume), mu the dynamic viscosity, U the bulk (channel-averaged)
    velocity.  The laminar balance ties them: U = P h^2 / (3 mu).
    """

    pressure_gradient: float
    dynamic_viscosity: float
    half_height: float
    bulk_velocity: float

    def __post_init__(self):
        for name in ("pressure_gradient", "dynamic_viscosity",
                     "half_height", "bulk_velocity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        implied = self.pressure_gradient * self.half_height ** 2 / (3.0 * self.dynamic_viscosity)
        if abs(self.bulk_velocity - implied) > 1e-9 * implied:
            raise ValueError(
                f"bulk velocity {self.bulk_velocity} inconsistent with "
                f"P h^2 / (3 mu) = {implied}")

    @staticmethod
    def _require_positive(**fields) -> None:
        for name, v in fields.items():
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def from_pressure_gradient(cls, P: float, mu: float, h: float) -> "ChannelFlowCase":
        cls._require_positive(P=P, mu=mu, h=h)
        return cls(P, mu, h, P * h * h / (3.0 * mu))

    @classmethod
    def from_bulk_velocity(cls, U: float, mu: float, h: float) -> "ChannelFlowCase":
        cls._require_positive(U=U, mu=mu, h=h)
        return cls(3.0 * mu * U / (h * h), mu, h, U)

    @property
    def flow_rate(self) -> float:
        """Volumetric rate per unit width, Q = 2 h U."""
        return 2.0 * self.half_height * self.bulk_velocity


def poiseuille_profile(case: ChannelFlowCase, y):
    """Laminar profile u(y) = (P / 2 mu)(h^2 - y^2) = (3U / 2h^2)(h^2 - y^2)."""
    y_arr = np.asarray(y, dtype=float)
    h = case.half_height
    if np.any(np.abs(y_arr) > h * (1.0 + 1e-15)):
        raise OutOfRangeError(f"|y| exceeds the half height {h}")
    gap = h * h - np.minimum(y_arr * y_arr, h * h)
    u_grad = 0.5 * case.pressure_gradient / case.dynamic_viscosity * gap
    u_bulk = 1.5 * case.bulk_velocity / (h * h) * gap
    # the two closed forms are one identity apart; drift means a broken case
    scale = 1.5 * case.bulk_velocity
    if np.any(np.abs(u_grad - u_bulk) > 1e-14 * scale):
        raise ValueError("pressure-gradient and bulk-velocity forms disagree")
    return u_bulk if isinstance(y, np.ndarray) else float(np.asarray(u_bulk))


def poiseuille_dissipation(case: ChannelFlowCase) -> float:
    """Viscous dissipation per unit wall area: 6 mu U^2 / h."""
    return 6.0 * case.dynamic_viscosity * case.bulk_velocity ** 2 / case.half_height


def pressure_work(case: ChannelFlowCase, Q: float) -> float:
    """Pressure work rate Q P; equals the dissipation for a consistent Q."""
    if Q < 0.0 or not math.isfinite(Q):
        raise ValueError(f"flow rate must be non-negative and finite, got {Q!r}")
    Q_ref = case.flow_rate
    if abs(Q - Q_ref) > 1e-9 * Q_ref:
        warnings.warn(
            f"flow rate {Q} differs from the consistent value {Q_ref}; "
            "work will not match the dissipation",
            InconsistentFlowWarning, stacklevel=2)
    return Q * case.pressure_gradient


def batchelor_limit_table(eps_fixed: float, nu_list) -> list:
    """k_d = (eps / nu^3)^(1/4) per viscosity, at fixed dissipation.

    Rows are (nu, k_d) for descending positive nu; the table exhibits the
    divergence of the dissipation wavenumber as nu -> 0.
    """
    if not (math.isfinite(eps_fixed) and eps_fixed > 0.0):
        raise ValueError(f"dissipation must be positive, got {eps_fixed!r}")
    nus = [float(v) for v in nu_list]
    if not nus or any(v <= 0.0 or not math.isfinite(v) for v in nus):
        raise ValueError("viscosities must be positive and finite")
    if any(b >= a for a, b in zip(nus, nus[1:])):
        raise ValueError("viscosities must be strictly descending")
    return [(nu, (eps_fixed / nu ** 3) ** 0.25) for nu in nus]
