"""Real-space structure functions and the Karman-Howarth balance.

Spectral states are mapped onto second- and third-order structure functions
through the standard isotropic transform kernels, and the four-term
Karman-Howarth identity is checked term by term on a geometric separation
grid.  All transforms are plain quadratures over the wavenumber grid, so
they inherit its accuracy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AliasingWarning, DegenerateSpectrumError, TimeStepError
from .grid import WavenumberGrid
from .spectra import SpectralState, diagnostics
from .closure import TransferResult
from .evolve import ForcingSpec, forcing_profile

__all__ = [
    "StructureFunctions",
    "KheResidualReport",
    "DimensionlessStructure",
    "default_r_nodes",
    "resolved_mask",
    "s2_from_spectrum",
    "s3_from_transfer",
    "structure_functions",
    "khe_residual",
    "dimensionless_structure",
]

# Below this argument the closed kernel forms lose digits to cancellation,
# so truncated Taylor series are used instead.
_SERIES_CUT = 0.05


def _iso_weight(x: np.ndarray) -> np.ndarray:
    """(sin x - x cos x) / x^3, the isotropic correlation weight.

    Tends to 1/3 as x -> 0.  Series used below the cutover keeps full
    precision where the closed form cancels.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUT
    xs = x[small]
    x2 = xs * xs
    out[small] = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
    xl = x[~small]
    out[~small] = (np.sin(xl) - xl * np.cos(xl)) / xl ** 3
    return out


def _increment_kernel(x: np.ndarray) -> np.ndarray:
    """1/3 - _iso_weight(x); the weight of E(k) in S2(r) up to a factor 4."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUT
    xs = x[small]
    x2 = xs * xs
    out[small] = x2 / 30.0 - x2 * x2 / 840.0 + x2 * x2 * x2 / 45360.0
    out[~small] = 1.0 / 3.0 - _iso_weight(x[~small])
    return out


def _third_order_kernel(x: np.ndarray) -> np.ndarray:
    """(3 sin x - 3x cos x - x^2 sin x) / x^4; weight of T(k)/k in S3(r).

    Antiderivative identity: d/dx [x^4 G(x)] = x^4 * _iso_weight'(x)... the
    kernel integrates x^4 (sin x - x cos x)/x^3 from 0, divided by x^4.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUT
    xs = x[small]
    x2 = xs * xs
    out[small] = xs / 15.0 - xs * x2 / 210.0 + xs * x2 * x2 / 7560.0
    xl = x[~small]
    out[~small] = (3.0 * np.sin(xl) - 3.0 * xl * np.cos(xl) - xl * xl * np.sin(xl)) / xl ** 4
    return out


@dataclass(frozen=True)
class StructureFunctions:
    """Second- and third-order structure functions on a separation grid."""

    r: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    dS2_dt: np.ndarray | None = None

    def __post_init__(self):
        for name in ("r", "S2", "S3"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)
        if self.dS2_dt is not None:
            a = np.asarray(self.dS2_dt, dtype=float)
            object.__setattr__(self, "dS2_dt", a)
            a.setflags(write=False)


@dataclass(frozen=True)
class KheResidualReport:
    """Signed Karman-Howarth terms per separation and their residual.

    The identity checked is
        0 = -(2/3) dE_tot/dt + (1/2) dS2/dt + DIV - VISC - input
    with DIV the S3 divergence term and VISC the viscous term.  ``input``
    is the forcing contribution (zero in decay); ``residual`` is the sum
    of the four signed terms minus ``input``.
    """

    r: np.ndarray
    term_energy: np.ndarray
    term_ds2dt: np.ndarray
    term_s3: np.ndarray
    term_viscous: np.ndarray
    forcing_input: np.ndarray
    residual: np.ndarray
    residual_norm: float
    dt: float

    def __post_init__(self):
        for name in ("r", "term_energy", "term_ds2dt", "term_s3",
                     "term_viscous", "forcing_input", "residual"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)


@dataclass(frozen=True)
class DimensionlessStructure:
    """S_n scaled by U^n against x = r/L at a reference time.

    For a single state ``f`` has shape (n_r,) and ``t_tilde`` is None.
    For a sequence of decay states ``f`` has one row per state and
    ``t_tilde`` holds (t - t_ref) / (L_ref / U_ref).
    """

    n: int
    x: np.ndarray
    f: np.ndarray
    t_tilde: np.ndarray | None = None


def default_r_nodes(grid: WavenumberGrid, per_decade: int = 48) -> np.ndarray:
    """Geometric separation grid spanning [0.02/k_max, 20/k_min]."""
    r_lo = 0.02 / grid.k_max
    r_hi = 20.0 / grid.k_min
    n = max(2, int(round(per_decade * np.log10(r_hi / r_lo))) + 1)
    return np.exp(np.linspace(np.log(r_lo), np.log(r_hi), n))


def resolved_mask(grid: WavenumberGrid, r: np.ndarray) -> np.ndarray:
    """True where the separation lies inside the resolved band [1/k_max, 1/k_min]."""
    r = np.asarray(r, dtype=float)
    return (r >= 1.0 / grid.k_max) & (r <= 1.0 / grid.k_min)


def _check_r(grid: WavenumberGrid, r_nodes) -> np.ndarray:
    r = np.asarray(r_nodes, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("r_nodes must be a non-empty 1-d array")
    if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
        raise ValueError("separations must be positive and finite")
    n_out = int(np.count_nonzero(~resolved_mask(grid, r)))
    if n_out:
        warnings.warn(
            f"{n_out} of {r.size} separations fall outside the resolved band "
            f"[{1.0 / grid.k_max:.3g}, {1.0 / grid.k_min:.3g}]",
            AliasingWarning, stacklevel=3)
    return r


def s2_from_spectrum(state: SpectralState, r_nodes) -> np.ndarray:
    """S2(r) = 4 * integral E(k) [1/3 - (sin kr - kr cos kr)/(kr)^3] dk."""
    r = _check_r(state.grid, r_nodes)
    x = np.outer(r, state.grid.nodes)
    return 4.0 * (_increment_kernel(x) @ (state.grid.weights * state.E))


def s3_from_transfer(transfer: TransferResult, grid: WavenumberGrid, r_nodes) -> np.ndarray:
    """S3(r) = 12 * integral (T(k)/k) G3(kr) dk.

    The kernel is fixed by requiring that (1/(6 r^4)) d(r^4 S3)/dr equals
    2 * integral T(k) _iso_weight(kr) dk, which is the transfer term of the
    Karman-Howarth identity written in k space.
    """
    if transfer.grid is not grid and not (
            transfer.grid.n_bins == grid.n_bins
            and np.array_equal(transfer.grid.nodes, grid.nodes)):
        raise ValueError("transfer was computed on a different grid")
    r = _check_r(grid, r_nodes)
    x = np.outer(r, grid.nodes)
    return 12.0 * (_third_order_kernel(x) @ (grid.weights * transfer.T / grid.nodes))


def structure_functions(state: SpectralState, transfer: TransferResult | None = None,
                        r_nodes=None) -> StructureFunctions:
    """Convenience wrapper returning S2 and S3 on one separation grid."""
    if r_nodes is None:
        r_nodes = default_r_nodes(state.grid)
    r = np.asarray(r_nodes, dtype=float)
    S2 = s2_from_spectrum(state, r)
    if transfer is None:
        S3 = np.zeros_like(r)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasingWarning)
            S3 = s3_from_transfer(transfer, state.grid, r)
    return StructureFunctions(r=r, S2=S2, S3=S3)


def _log_derivative(u_spacing: float, f: np.ndarray) -> np.ndarray:
    """Second-order d f/d u on a uniform grid in u = ln r."""
    df = np.empty_like(f)
    df[1:-1] = (f[2:] - f[:-2]) / (2.0 * u_spacing)
    df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * u_spacing)
    df[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * u_spacing)
    return df


def _check_geometric(r: np.ndarray) -> float:
    if r.size < 3:
        raise ValueError("need at least 3 separation nodes for derivatives")
    u = np.log(r)
    du = np.diff(u)
    if not np.allclose(du, du[0], rtol=1e-8, atol=0.0):
        raise ValueError("khe_residual requires a geometric separation grid")
    return float(du[0])


def khe_residual(state_a: SpectralState, state_b: SpectralState,
                 transfer: TransferResult, r_nodes,
                 forcing: ForcingSpec | None = None) -> KheResidualReport:
    """Evaluate the four Karman-Howarth terms between two consecutive states.

    Time derivatives are centered differences over the step, so the
    remaining terms are evaluated on the midpoint spectrum.  The S3 term
    is differentiated numerically from s3_from_transfer output, keeping the
    k-space and r-space routes independent.
    """
    grid = state_a.grid
    if state_b.grid is not grid and not np.array_equal(state_b.grid.nodes, grid.nodes):
        raise ValueError("states live on different grids")
    dt = state_b.t - state_a.t
    if dt <= 0.0:
        raise ValueError("states must be time-ordered with distinct times")
    r = _check_r(grid, r_nodes)
    du = _check_geometric(r)

    w = grid.weights
    E_mid = 0.5 * (state_a.E + state_b.E)
    mid = state_a.with_spectrum(E_mid, t=state_a.t + 0.5 * dt)

    # d/dt terms, centered at the midpoint
    dEtot_dt = (float(np.dot(w, state_b.E)) - float(np.dot(w, state_a.E))) / dt
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        S2_a = s2_from_spectrum(state_a, r)
        S2_b = s2_from_spectrum(state_b, r)
        S2_mid = s2_from_spectrum(mid, r)
        S3 = s3_from_transfer(transfer, grid, r)
    dS2_dt = (S2_b - S2_a) / dt

    term_energy = np.full_like(r, -(2.0 / 3.0) * dEtot_dt)
    term_ds2dt = 0.5 * dS2_dt

    # (1/(6 r^4)) d(r^4 S3)/dr, with d/dr = (1/r) d/du on the geometric grid
    term_s3 = _log_derivative(du, r ** 4 * S3) / (6.0 * r ** 5)

    # (nu/r^4) d(r^4 dS2/dr)/dr from nested log-grid stencils
    dS2_dr = _log_derivative(du, S2_mid) / r
    visc = state_a.nu * _log_derivative(du, r ** 4 * dS2_dr) / r ** 5
    term_viscous = -visc

    if forcing is None:
        f_input = np.zeros_like(r)
    else:
        F = forcing_profile(mid, forcing)
        x = np.outer(r, grid.nodes)
        f_input = -2.0 * (_iso_weight(x) @ (w * F))

    residual = term_energy + term_ds2dt + term_s3 + term_viscous - f_input
    scale = max(np.max(np.abs(term_energy)), np.max(np.abs(term_ds2dt)),
                np.max(np.abs(term_s3)), np.max(np.abs(term_viscous)))
    if scale == 0.0:
        norm = 0.0
    else:
        norm = float(np.max(np.abs(residual)) / scale)

    # crude truncation estimate for the centered differences: one more
    # halving would change the derivative by ~ (dt/tau)^2 of the term size
    E_tot = float(np.dot(w, E_mid))
    if E_tot > 0.0 and abs(dEtot_dt) > 0.0:
        tau = E_tot / abs(dEtot_dt)
        fd_err = (dt / tau) ** 2 * max(np.max(np.abs(term_energy)),
                                       np.max(np.abs(term_ds2dt)))
        floors = [np.max(np.abs(t)) for t in
                  (term_energy, term_ds2dt, term_s3, term_viscous)]
        floors = [f for f in floors if f > 0.0]
        if floors and fd_err > 0.1 * min(floors):
            raise TimeStepError(
                f"dt={dt:.3g} too large for finite differencing: estimated "
                f"error {fd_err:.3g} exceeds 10% of the smallest term")

    return KheResidualReport(r=r, term_energy=term_energy, term_ds2dt=term_ds2dt,
                             term_s3=term_s3, term_viscous=term_viscous,
                             forcing_input=f_input, residual=residual,
                             residual_norm=norm, dt=float(dt))


def dimensionless_structure(states, n: int, reference_time: float,
                            transfers=None, r_nodes=None) -> DimensionlessStructure:
    """Normalize S_n by U^n of the reference state against x = r/L.

    A single state yields f_n(x).  A sequence yields g_n(x, t_tilde) with
    all rows scaled by the reference-time U and L, and
    t_tilde = (t - t_ref)/(L_ref/U_ref).
    """
    if n not in (2, 3):
        raise ValueError("structure-function order must be 2 or 3")
    if isinstance(states, SpectralState):
        states = [states]
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    if n == 3:
        if transfers is None:
            raise ValueError("third-order scaling needs a transfer per state")
        transfers = list(transfers)
        if len(transfers) != len(states):
            raise ValueError("one transfer per state required")

    times = np.array([s.t for s in states])
    i_ref = int(np.argmin(np.abs(times - reference_time)))
    ref = states[i_ref]
    d = diagnostics(ref)
    U, L = d.rms_velocity, d.integral_scale
    if U <= 0.0 or L <= 0.0:
        raise DegenerateSpectrumError("reference state has degenerate scales")

    if r_nodes is None:
        r_nodes = default_r_nodes(ref.grid)
    r = np.asarray(r_nodes, dtype=float)
    x = r / L

    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        for i, s in enumerate(states):
            if n == 2:
                rows.append(s2_from_spectrum(s, r) / U ** 2)
            else:
                rows.append(s3_from_transfer(transfers[i], s.grid, r) / U ** 3)

    if len(states) == 1:
        return DimensionlessStructure(n=n, x=x, f=rows[0], t_tilde=None)
    t_tilde = (times - ref.t) / (L / U)
    return DimensionlessStructure(n=n, x=x, f=np.vstack(rows), t_tilde=t_tilde)
