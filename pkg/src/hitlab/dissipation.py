"""Reynolds-number sweeps and the dimensionless-dissipation asymptote.

A sweep runs one forced case per viscosity on a shared low-wavenumber node
ladder (so the forcing band sees identical nodes in every run), collects
C_eps = eps L / U^3 per stationary state, and fits
C_eps = C_inf + C / R_L by ordinary least squares.  The decay variant
evaluates C_eps at an evolved reference time and estimates the unsteady
coefficient from the dimensionless second-order structure function.
"""
from __future__ import annotations

import multiprocessing
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateSpectrumError, InsufficientSpanError,
                     NonConvergenceError, NonStationaryWarning, TransientError)
from .grid import make_grid, WavenumberGrid
from .spectra import SpectralState, diagnostics, initial_spectrum
from .closure import ClosureParams, transfer_spectrum
from .evolve import ForcingSpec, RunRecord, run_forced
from .flux import flux_profile
from . import realspace

__all__ = [
    "SweepBase",
    "SweepRow",
    "SweepRecord",
    "FitResult",
    "DecayCoefficient",
    "ladder_grid",
    "dimensionless_dissipation",
    "run_sweep",
    "fit_asymptote",
    "fit_line",
    "decay_dissipation_coefficient",
]


def dimensionless_dissipation(state: SpectralState) -> float:
    """C_eps = eps * L / U^3 from the state's scalar diagnostics."""
    d = diagnostics(state)
    if d.rms_velocity <= 0.0 or d.integral_scale <= 0.0:
        raise DegenerateSpectrumError("C_eps needs positive U and L")
    return d.dissipation * d.integral_scale / d.rms_velocity ** 3


@dataclass(frozen=True)
class SweepBase:
    """Configuration shared by every run of a sweep.

    Grids are built on a fixed logarithmic ladder anchored at k_min with
    nodes_per_decade spacing; each run extends the ladder to
    kmax_over_kd times its own Kolmogorov wavenumber.  This keeps the
    forced band numerically identical across runs.
    """

    k_min: float = 0.02
    band_top: float = 0.16
    band_bottom: float = 0.1
    injection_rate: float = 1.0
    nodes_per_decade: int = 32
    kmax_over_kd: float = 2.5
    initial_energy: float = 0.5
    initial_peak: float = 0.12
    damping_constant: float = 0.36
    safety: float = 0.25
    max_time: float = 400.0
    stationarity_rtol: float = 0.01
    sample_every: int = 10

    def __post_init__(self):
        if self.k_min <= 0 or self.band_top < self.k_min:
            raise ValueError("band must sit inside the grid: 0 < k_min <= band_top")
        if not (0.0 <= self.band_bottom < self.band_top):
            raise ValueError("band_bottom must sit in [0, band_top)")
        if self.injection_rate <= 0 or self.kmax_over_kd <= 1:
            raise ValueError("injection_rate must be positive, kmax_over_kd > 1")
        if self.nodes_per_decade < 4:
            raise ValueError("nodes_per_decade too coarse")


def ladder_grid(k_min: float, nodes_per_decade: int, k_top: float) -> WavenumberGrid:
    """Smallest grid on the fixed log ladder anchored at k_min reaching k_top.

    Snapping k_max up the ladder keeps low-wavenumber nodes identical
    across runs that differ only in viscosity, so band-averaged
    quantities vary smoothly along a sweep.
    """
    h = np.log(10.0) / nodes_per_decade
    n = int(np.ceil(np.log(k_top / k_min) / h - 1e-12))
    n = max(n, 2)
    return make_grid(k_min, k_min * np.exp(n * h), n + 1)


@dataclass(frozen=True)
class SweepRow:
    nu: float
    eps_w: float
    R_L: float
    R_lambda: float
    C_eps: float
    Pi_max_over_eps: float
    stationarity_flag: bool
    n_bins: int
    k_max: float
    t_end: float


@dataclass(frozen=True)
class SweepRecord:
    base: SweepBase
    rows: tuple
    states: tuple            # final SpectralState per retained row

    def validate(self) -> None:
        if not self.rows:
            raise NonConvergenceError("sweep record holds no rows")
        if not all(r.stationarity_flag for r in self.rows):
            raise NonConvergenceError("sweep record holds non-stationary rows")
        rl = [r.R_L for r in self.rows]
        if any(b <= a for a, b in zip(rl, rl[1:])):
            raise NonConvergenceError("R_L is not strictly increasing across the sweep")


def _sweep_worker(args):
    nu, base = args
    k_d_guess = (base.injection_rate / nu ** 3) ** 0.25
    grid = ladder_grid(base.k_min, base.nodes_per_decade,
                       base.kmax_over_kd * k_d_guess)
    state = initial_spectrum(grid, peak_wavenumber=base.initial_peak,
                             energy=base.initial_energy, nu=nu)
    params = ClosureParams(damping_constant=base.damping_constant)
    forcing = ForcingSpec(band_top=base.band_top, injection_rate=base.injection_rate,
                          band_bottom=base.band_bottom)
    rec = run_forced(state, params, forcing, max_time=base.max_time,
                     safety=base.safety, sample_every=base.sample_every,
                     stationarity_rtol=base.stationarity_rtol, keep_spectra=False)
    st = rec.final_state
    d = diagnostics(st)
    fl = flux_profile(transfer_spectrum(st, params))
    row = SweepRow(nu=nu, eps_w=base.injection_rate, R_L=d.reynolds_L,
                   R_lambda=d.taylor_reynolds,
                   C_eps=d.dissipation * d.integral_scale / d.rms_velocity ** 3,
                   Pi_max_over_eps=fl.flux_max / d.dissipation,
                   stationarity_flag=rec.stationarity_flag,
                   n_bins=grid.n_bins, k_max=grid.k_max, t_end=st.t)
    return row, st


def run_sweep(base: SweepBase, nu_list, workers: int = 1) -> SweepRecord:
    """One stationary forced run per viscosity, assembled by descending nu.

    Non-stationary runs are dropped with a NonStationaryWarning.  Results
    are deterministic for any worker count: jobs are independent and the
    record is assembled in nu order.
    """
    nu_list = [float(v) for v in nu_list]
    if not nu_list or any(v <= 0 for v in nu_list):
        raise ValueError("nu_list must hold positive viscosities")
    if any(b >= a for a, b in zip(nu_list, nu_list[1:])):
        raise ValueError("nu_list must be strictly descending (R_L increasing)")
    jobs = [(nu, base) for nu in nu_list]
    if workers > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            results = pool.map(_sweep_worker, jobs)
    else:
        results = [_sweep_worker(j) for j in jobs]
    rows, states = [], []
    for (row, st), nu in zip(results, nu_list):
        if not row.stationarity_flag:
            warnings.warn(f"run at nu={nu:g} did not reach stationarity; excluded",
                          NonStationaryWarning, stacklevel=2)
            continue
        rows.append(row)
        states.append(st)
    if not rows:
        raise NonConvergenceError("no sweep run reached stationarity")
    return SweepRecord(base=base, rows=tuple(rows), states=tuple(states))


@dataclass(frozen=True)
class FitResult:
    C_eps_inf: float
    C_slope: float
    covariance: np.ndarray
    stderr: tuple
    r_squared: float
    residuals: np.ndarray
    n_points: int
    quadratic: float | None = None

    def __post_init__(self):
        for name in ("covariance", "residuals"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)

    def predict(self, R_L) -> np.ndarray:
        x = 1.0 / np.asarray(R_L, dtype=float)
        y = self.C_eps_inf + self.C_slope * x
        if self.quadratic is not None:
            y = y + self.quadratic * x * x
        return y


def fit_asymptote(sweep: SweepRecord, quadratic: bool = False) -> FitResult:
    """OLS fit of C_eps against 1/R_L, optionally with a 1/R_L^2 term."""
    sweep.validate()
    rows = sweep.rows
    if len(rows) < 4:
        raise InsufficientSpanError(f"need >= 4 stationary rows, have {len(rows)}")
    R = np.array([r.R_L for r in rows])
    if R.max() / R.min() < 8.0:
        raise InsufficientSpanError(
            f"R_L span factor {R.max() / R.min():.2f} < 8 is too narrow to fit")
    y = np.array([r.C_eps for r in rows])
    x = 1.0 / R
    cols = [np.ones_like(x), x] + ([x * x] if quadratic else [])
    X = np.column_stack(cols)
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = len(y) - X.shape[1]
    ssr = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0.0 else max(0.0, 1.0 - ssr / sst)
    sigma2 = ssr / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return FitResult(C_eps_inf=float(beta[0]), C_slope=float(beta[1]),
                     covariance=cov, stderr=tuple(np.sqrt(np.diag(cov))),
                     r_squared=float(r2), residuals=resid, n_points=len(y),
                     quadratic=float(beta[2]) if quadratic else None)


def fit_line(fit: FitResult, R_L_min: float, R_L_max: float, n: int = 100):
    """(R_L, C_eps) samples of the fitted curve for plotting."""
    inv = np.linspace(1.0 / R_L_max, 1.0 / R_L_min, n)
    return 1.0 / inv, fit.predict(1.0 / inv)


@dataclass(frozen=True)
class DecayCoefficient:
    C_eps: float
    B2_estimate: float
    t_e: float
    R_L: float
    decay_exponent: float


def _select_te(times: np.ndarray, energies: np.ndarray, rtol: float = 0.02):
    """Earliest time where d log E / d log t is flat to rtol over half a decade."""
    pos = times > 0.0
    t, E = times[pos], energies[pos]
    if t.size < 8:
        raise TransientError("too few samples to locate the evolved regime")
    lt, lE = np.log(t), np.log(E)
    slope = np.gradient(lE, lt)
    half = 0.5 * np.log(10.0)
    for i in range(t.size):
        j = np.searchsorted(lt, lt[i] + half)
        if j >= t.size:
            break
        window = slope[i:j + 1]
        mid = np.median(window)
        if mid != 0.0 and np.max(np.abs(window - mid)) <= rtol * abs(mid):
            return float(t[i]), float(mid)
    raise TransientError("decay never settled onto a power law over half a time-decade")


def decay_dissipation_coefficient(record: RunRecord, t_e: float | None = None,
                                  params: ClosureParams | None = None) -> DecayCoefficient:
    """C_eps at the evolved time t_e plus the unsteady coefficient estimate.

    B2 = (3/4) dg2/dt_tilde at fixed inertial x, by centered differencing of
    the dimensionless second-order structure function between the snapshots
    bracketing t_e.  Requires the record to keep spectra.
    """
    if not record.spectra:
        raise ValueError("decay record must keep spectra")
    times = np.array([s.t for s in record.samples])
    energies = np.array([s.total_energy for s in record.samples])
    exponent = np.nan
    if t_e is None:
        t_e, exponent = _select_te(times, energies)
    else:
        t_sel, exponent = _select_te(times, energies)
        if t_e < t_sel:
            raise TransientError(
                f"t_e={t_e:g} precedes the evolved regime starting at {t_sel:g}")

    snap_times = np.array([s.t for s in record.spectra])
    i_ref = int(np.argmin(np.abs(snap_times - t_e)))
    if i_ref == 0 or i_ref == len(record.spectra) - 1:
        raise TransientError("t_e lacks bracketing snapshots for differencing")
    ref = record.spectra[i_ref]
    d = diagnostics(ref)
    C_eps = d.dissipation * d.integral_scale / d.rms_velocity ** 3

    trio = [record.spectra[i_ref - 1], ref, record.spectra[i_ref + 1]]
    dim = realspace.dimensionless_structure(trio, n=2, reference_time=ref.t)
    # centered dg2/dt_tilde at fixed x, taken over an inertial x band
    dg = (dim.f[2] - dim.f[0]) / (dim.t_tilde[2] - dim.t_tilde[0])
    r = dim.x * d.integral_scale
    k_d = d.kolmogorov_wavenumber
    band = (r > 20.0 / k_d) & (dim.x < 0.5) & (r > 1.0 / ref.grid.k_max) \
        & (r < 1.0 / ref.grid.k_min)
    if not np.any(band):
        band = (dim.x > 0.02) & (dim.x < 0.5)
    B2 = 0.75 * float(np.median(dg[band]))
    return DecayCoefficient(C_eps=float(C_eps), B2_estimate=B2, t_e=float(t_e),
                            R_L=float(d.reynolds_L), decay_exponent=float(exponent))
