"""Time integration of the spectral energy balance.

    dE(k,t)/dt = T(k,t) + F(k) - 2 nu k^2 E(k,t)

The viscous term is applied through its exact integrating factor
``exp(-2 nu k^2 dt)``; transfer and forcing advance with a two-stage
predictor-corrector (Heun) so pure viscous decay is reproduced exactly when
the closure is off. Forcing injects energy at a constant total rate eps_W
over a wavenumber band, distributed proportionally to E(k) (uniformly while
the band is empty); the discrete injected power equals eps_W identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closure import ClosureParams, TransferResult, transfer_spectrum
from .errors import (BalanceError, InvalidRangeError, OutOfRangeError,
                     StepInstabilityError)
from .flux import flux_profile
from .grid import WavenumberGrid
from .spectra import SpectralState, diagnostics, dissipation_rate, total_energy

__all__ = [
    "ForcingSpec",
    "StepInfo",
    "Sample",
    "RunRecord",
    "forcing_profile",
    "suggest_dt",
    "step",
    "run_decay",
    "run_forced",
]

_EMPTY_BAND_FLOOR = 1e-300


@dataclass(frozen=True)
class ForcingSpec:
    """Constant-rate spectral injection over the band [band_bottom, band_top].

    The default band_bottom of 0 forces everything below band_top.  A
    positive bottom edge leaves the wavenumbers below it free, so the
    large scales equilibrate by transfer alone; sweeps aimed at the
    dissipation-law asymptote rely on that to keep the integral scale
    tied to the forcing band instead of the grid boundary.
    """

    band_top: float
    injection_rate: float
    band_bottom: float = 0.0

    def __post_init__(self):
        if not (self.injection_rate >= 0.0
                and math.isfinite(self.injection_rate)):
            raise InvalidRangeError(
                f"injection rate must be >= 0, got {self.injection_rate}")
        if not (self.band_top > 0.0 and math.isfinite(self.band_top)):
            raise InvalidRangeError(
                f"band top must be positive, got {self.band_top}")
        if not (0.0 <= self.band_bottom < self.band_top):
            raise InvalidRangeError(
                f"band bottom must sit in [0, band_top), got {self.band_bottom}")


def forcing_profile(state: SpectralState,
                    forcing: ForcingSpec | None) -> np.ndarray:
    """F(k) with ``grid.integrate(F) == injection_rate`` to rounding."""
    grid = state.grid
    if forcing is None or forcing.injection_rate == 0.0:
        return np.zeros(grid.n_bins)
    if not (grid.k_min <= forcing.band_top <= grid.k_max):
        raise OutOfRangeError(
            f"forcing band top {forcing.band_top} outside the grid")
    band = (grid.nodes >= forcing.band_bottom) & (grid.nodes <= forcing.band_top)
    if not band.any():
        band[grid.nearest_index(forcing.band_top)] = True
    F = np.zeros(grid.n_bins)
    band_energy = float(np.dot(grid.weights[band], state.E[band]))
    if band_energy > _EMPTY_BAND_FLOOR:
        F[band] = forcing.injection_rate * state.E[band] / band_energy
    else:
        F[band] = forcing.injection_rate / grid.weights[band].sum()
    return F


@dataclass(frozen=True)
class StepInfo:
    dt: float
    balance_residual: float
    clipped_energy: float
    transfer_start: TransferResult | None
    transfer_predictor: TransferResult | None


def suggest_dt(state: SpectralState, params: ClosureParams | None,
               forcing: ForcingSpec | None = None,
               transfer: TransferResult | None = None,
               safety: float = 0.25) -> float:
    """Stable step from per-bin viscous and transfer rates.

    Bins holding less than 1e-10 of the peak spectrum are excluded from the
    transfer-rate part. A zero spectrum under forcing falls back to the
    forcing time scale ``(eps_W k_f^2)^{-1/3}``.
    """
    grid = state.grid
    k2 = grid.nodes**2
    if total_energy(state) <= 0.0:
        if forcing is not None and forcing.injection_rate > 0.0:
            return safety * (forcing.injection_rate
                             * forcing.band_top**2) ** (-1.0 / 3.0)
        return safety / (2.0 * state.nu * k2[-1])

    rates = 2.0 * state.nu * k2
    if params is not None:
        if transfer is None:
            transfer = transfer_spectrum(state, params)
        live = state.E > 1e-10 * state.E.max()
        rates = np.array(rates)
        rates[live] += np.abs(transfer.T[live]) / state.E[live]
    return safety / float(rates.max())


def step(state: SpectralState, params: ClosureParams | None,
         forcing: ForcingSpec | None, dt: float,
         transfer: TransferResult | None = None,
         clip_tol: float = 1e-10,
         balance_tol: float = 0.01) -> tuple[SpectralState, StepInfo]:
    """One integrating-factor Heun step of length ``dt``.

    Passing ``params=None`` turns the closure off (pure viscous decay plus
    forcing). A precomputed ``transfer`` for the input state avoids one
    kernel evaluation. Negative output bins are clipped to zero; clipping
    more than ``clip_tol`` of the total energy raises StepInstabilityError,
    and a discrete energy-balance residual above ``balance_tol`` of the
    dissipation scale raises BalanceError.
    """
    if dt <= 0.0 or not math.isfinite(dt):
        raise InvalidRangeError(f"dt must be positive, got {dt}")
    grid = state.grid
    k2 = grid.nodes**2
    ef = np.exp(-2.0 * state.nu * k2 * dt)

    tr1 = transfer
    if params is not None and tr1 is None:
        tr1 = transfer_spectrum(state, params)
    T1 = tr1.T if tr1 is not None else np.zeros(grid.n_bins)
    F1 = forcing_profile(state, forcing)
    g1 = T1 + F1

    e_pred = np.maximum((state.E + dt * g1) * ef, 0.0)
    pred = state.with_spectrum(e_pred, t=state.t + dt)
    tr2 = transfer_spectrum(pred, params) if params is not None else None
    T2 = tr2.T if tr2 is not None else np.zeros(grid.n_bins)
    F2 = forcing_profile(pred, forcing)
    g2 = T2 + F2

    e_raw = state.E * ef + 0.5 * dt * (g1 * ef + g2)
    clipped = grid.integrate(np.maximum(-e_raw, 0.0))
    e_new = np.maximum(e_raw, 0.0)

    e_tot0 = total_energy(state)
    if clipped > clip_tol * max(e_tot0, _EMPTY_BAND_FLOOR):
        raise StepInstabilityError(
            f"clipped energy {clipped:.3e} exceeds {clip_tol:.1e} of total "
            f"{e_tot0:.3e} at t={state.t:.6g} (dt={dt:.3e})")

    new_state = state.with_spectrum(e_new, t=state.t + dt)

    eps1 = dissipation_rate(state)
    eps2 = dissipation_rate(pred)
    d1 = grid.integrate(T1)
    d2 = grid.integrate(T2)
    eps_w = forcing.injection_rate if forcing is not None else 0.0
    expected = eps_w - 0.5 * (eps1 + eps2) + 0.5 * (d1 + d2)
    residual = abs((total_energy(new_state) - e_tot0) / dt - expected)
    scale = max(eps1, eps_w)
    if scale > 0.0 and residual > balance_tol * scale:
        raise BalanceError(
            f"energy balance residual {residual:.3e} exceeds "
            f"{balance_tol:.0%} of {scale:.3e} at t={state.t:.6g}")

    info = StepInfo(dt=float(dt), balance_residual=float(residual),
                    clipped_energy=float(clipped),
                    transfer_start=tr1, transfer_predictor=tr2)
    return new_state, info


@dataclass(frozen=True)
class Sample:
    t: float
    total_energy: float
    dissipation: float
    flux_max: float
    taylor_reynolds: float
    c_epsilon: float


@dataclass
class RunRecord:
    """Sampled history of one run plus the final state."""

    grid: WavenumberGrid
    nu: float
    samples: list[Sample] = field(default_factory=list)
    spectra: list[SpectralState] = field(default_factory=list)
    final_state: SpectralState | None = None
    stationarity_flag: bool = False
    stationary_time: float | None = None
    clipped_energy: float = 0.0
    n_steps: int = 0
    aborted: str | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def validate(self):
        t = self.times
        if t.size > 1 and not np.all(np.diff(t) > 0.0):
            raise InvalidRangeError("sample timestamps must strictly increase")


def _sample_state(state, transfer) -> Sample:
    e_tot = total_energy(state)
    eps = dissipation_rate(state)
    flux_max = 0.0
    if transfer is not None:
        flux_max = flux_profile(transfer).flux_max
    if e_tot > 0.0:
        d = diagnostics(state)
        r_lam = d.taylor_reynolds
        c_eps = (eps * d.integral_scale / d.rms_velocity**3
                 if d.rms_velocity > 0.0 else math.nan)
    else:
        r_lam = math.nan
        c_eps = math.nan
    return Sample(t=state.t, total_energy=e_tot, dissipation=eps,
                  flux_max=flux_max, taylor_reynolds=r_lam, c_epsilon=c_eps)


def _run(state, params, forcing, *, t_end, safety, sample_every,
         keep_spectra, stationarity_rtol=None, max_steps=2_000_000):
    record = RunRecord(grid=state.grid, nu=state.nu)

    def push(st, tr):
        record.samples.append(_sample_state(st, tr))
        if keep_spectra:
            # states are immutable; keeping them is alias-safe
            record.spectra.append(st)

    tr = transfer_spectrum(state, params) if params is not None else None
    push(state, tr)
    steps = 0
    try:
        while state.t < t_end and steps < max_steps:
            dt = suggest_dt(state, params, forcing, transfer=tr, safety=safety)
            dt = min(dt, t_end - state.t)
            state, info = step(state, params, forcing, dt, transfer=tr)
            record.clipped_energy += info.clipped_energy
            steps += 1
            tr = transfer_spectrum(state, params) if params is not None else None
            if steps % sample_every == 0 or state.t >= t_end:
                push(state, tr)
            if stationarity_rtol is not None and steps % sample_every == 0:
                if _is_stationary(record, stationarity_rtol):
                    record.stationarity_flag = True
                    record.stationary_time = state.t
                    break
    except (StepInstabilityError, BalanceError) as exc:
        record.aborted = str(exc)
        record.final_state = state
        record.n_steps = steps
        exc.partial_record = record
        raise
    record.final_state = state
    record.n_steps = steps
    record.validate()
    return record


def _is_stationary(record: RunRecord, rtol: float) -> bool:
    """dE_tot/dt within rtol of eps over a full and half eddy turnover."""
    last = record.samples[-1]
    if not (last.total_energy > 0.0 and last.dissipation > 0.0):
        return False
    u = math.sqrt(2.0 * last.total_energy / 3.0)
    # turnover from the sampled scalars: L = C_eps * u^3 / eps
    if not math.isfinite(last.c_epsilon) or last.c_epsilon <= 0.0:
        return False
    turnover = last.c_epsilon * u * u / last.dissipation * u
    window = 2.0 * turnover
    t_now = last.t
    times = record.times
    if t_now - times[0] < window:
        return False
    energies = np.array([s.total_energy for s in record.samples])
    for span in (window, 0.5 * window):
        i = int(np.searchsorted(times, t_now - span))
        i = min(i, times.size - 2)
        secant = (last.total_energy - energies[i]) / (t_now - times[i])
        if abs(secant) > rtol * last.dissipation:
            return False
    return True


def run_decay(initial: SpectralState, params: ClosureParams | None,
              t_end: float, *, safety: float = 0.25, sample_every: int = 5,
              keep_spectra: bool = True) -> RunRecord:
    """Freely decaying run up to ``t_end``."""
    if t_end <= initial.t:
        raise InvalidRangeError("t_end must exceed the initial time")
    return _run(initial, params, None, t_end=t_end, safety=safety,
                sample_every=sample_every, keep_spectra=keep_spectra)


def run_forced(initial: SpectralState, params: ClosureParams | None,
               forcing: ForcingSpec, *, max_time: float,
               stationarity_rtol: float = 0.01, safety: float = 0.25,
               sample_every: int = 5, keep_spectra: bool = True) -> RunRecord:
    """Forced run until stationarity (or max_time, flagged non-stationary)."""
    if max_time <= initial.t:
        raise InvalidRangeError("max_time must exceed the initial time")
    return _run(initial, params, forcing, t_end=max_time, safety=safety,
                sample_every=sample_every, keep_spectra=keep_spectra,
                stationarity_rtol=stationarity_rtol)
