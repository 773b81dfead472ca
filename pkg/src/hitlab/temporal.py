"""Kinematic Monte Carlo for Eulerian frequency spectra.

Synthesizes single-point velocity signals from a model inertial-range
spectrum under two decorrelation hypotheses and measures the resulting
frequency spectrum:

* ``kolmogorov``: each mode's phase advances at mean rate 1/tau_k with an
  Ornstein-Uhlenbeck-perturbed rate of correlation time
  tau_k = C eps^(-1/3) k^(-2/3); predicts phi ~ omega^-2.
* ``sweeping``: a frozen mode field advected past the probe at a Gaussian
  random velocity drawn once per realization; predicts phi ~ omega^-5/3
  when E(k) has a -5/3 band.

Everything is seeded per realization with a spawn key, so results are
bit-identical for any worker partitioning.
"""
from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .errors import InsufficientSpanError, OutOfRangeError, UnderResolvedError

__all__ = [
    "SyntheticEnsemble",
    "TimeSeriesEnsemble",
    "FrequencySpectrum",
    "SlopeFit",
    "inertial_band_modes",
    "synthesize",
    "frequency_spectrum",
    "ensemble_spectrum",
    "slope_fit",
]

MIN_PERIODS = 100          # duration precondition, in periods of the slowest mode
DEFAULT_NPERSEG = 16384


@dataclass(frozen=True)
class SyntheticEnsemble:
    """Mode table plus decorrelation model and sampling parameters."""

    k: np.ndarray
    amplitudes: np.ndarray
    decorrelation_model: str
    sweep_velocity: float
    seed: int
    n_realizations: int
    sample_rate: float          # samples per unit time, = 1/dt
    duration: float
    epsilon: float = 1.0
    broadening: float = 1.0
    fixed_velocity: bool = False

    def __post_init__(self):
        for name in ("k", "amplitudes"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)
        if self.decorrelation_model not in ("kolmogorov", "sweeping"):
            raise ValueError("decorrelation_model must be 'kolmogorov' or 'sweeping'")
        if self.k.size == 0 or np.any(self.k <= 0):
            raise ValueError("mode wavenumbers must be positive")
        if self.n_realizations < 1 or self.sample_rate <= 0 or self.duration <= 0:
            raise ValueError("need realizations, sample_rate and duration positive")

    @property
    def variance_target(self) -> float:
        """Single-point variance of the construction, sum a_m^2 / 2."""
        return float(0.5 * np.sum(self.amplitudes ** 2))

    def mode_rates(self) -> np.ndarray:
        """Characteristic angular rate per mode under the active model."""
        if self.decorrelation_model == "kolmogorov":
            return self.epsilon ** (1.0 / 3.0) * self.k ** (2.0 / 3.0)
        return self.k * self.sweep_velocity

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


def inertial_band_modes(mode: str, k_lo: float = 1.0, k_hi: float = 316.23,
                        n_modes: int = 36, epsilon: float = 1.0,
                        kolmogorov_const: float = 1.62, sweep_velocity: float = 1.0,
                        n_realizations: int = 64, seed: int = 0,
                        duration: float | None = None,
                        sample_rate: float | None = None,
                        broadening: float = 1.0,
                        fixed_velocity: bool = False) -> SyntheticEnsemble:
    """Modes sampled from E(k) = C eps^(2/3) k^(-5/3) on geometric cells.

    Amplitudes use the exact cell integrals of the model spectrum, so the
    variance budget matches the band energy to machine precision.
    """
    if not (0 < k_lo < k_hi):
        raise ValueError("need 0 < k_lo < k_hi")
    edges = np.exp(np.linspace(np.log(k_lo), np.log(k_hi), n_modes + 1))
    k = np.sqrt(edges[:-1] * edges[1:])
    c = kolmogorov_const * epsilon ** (2.0 / 3.0)
    cell = 1.5 * c * (edges[:-1] ** (-2.0 / 3.0) - edges[1:] ** (-2.0 / 3.0))
    amps = np.sqrt(2.0 * cell)

    if mode == "kolmogorov":
        rate_min = epsilon ** (1.0 / 3.0) * k_lo ** (2.0 / 3.0)
        rate_max = epsilon ** (1.0 / 3.0) * k_hi ** (2.0 / 3.0)
        nyquist_margin = 8.0
    elif mode == "sweeping":
        rate_min = k_lo * sweep_velocity
        rate_max = k_hi * sweep_velocity
        nyquist_margin = 10.0     # covers the Gaussian tail of the sweep speed
    else:
        raise ValueError("mode must be 'kolmogorov' or 'sweeping'")
    if duration is None:
        duration = MIN_PERIODS * 2.0 * np.pi / rate_min
    if sample_rate is None:
        sample_rate = nyquist_margin * rate_max / np.pi
    return SyntheticEnsemble(k=k, amplitudes=amps, decorrelation_model=mode,
                             sweep_velocity=sweep_velocity, seed=seed,
                             n_realizations=n_realizations, sample_rate=sample_rate,
                             duration=duration, epsilon=epsilon,
                             broadening=broadening, fixed_velocity=fixed_velocity)


@dataclass(frozen=True)
class TimeSeriesEnsemble:
    u: np.ndarray               # (n_realizations, n_samples)
    dt: float
    variance_target: float | None = None

    def __post_init__(self):
        a = np.asarray(self.u, dtype=float)
        if a.ndim != 2:
            raise ValueError("ensemble array must be 2-d (realization, time)")
        object.__setattr__(self, "u", a)


def _check_duration(config: SyntheticEnsemble) -> None:
    slowest = float(np.min(config.mode_rates()))
    if slowest <= 0.0:
        raise ValueError("mode rates must be positive")
    need = MIN_PERIODS * 2.0 * np.pi / slowest
    if config.duration < need * (1.0 - 1e-9):
        raise UnderResolvedError(
            f"duration {config.duration:.3g} < {MIN_PERIODS} periods of the "
            f"slowest mode ({need:.3g})")


def _realization(config: SyntheticEnsemble, r: int) -> np.ndarray:
    """One realization of u(t).  Draw order is fixed: phases, then model draws."""
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(r,))))
    n = config.n_samples
    dt = 1.0 / config.sample_rate
    n_modes = config.k.size
    phi0 = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)

    if config.decorrelation_model == "sweeping":
        if config.fixed_velocity:
            V = config.sweep_velocity
        else:
            V = rng.normal(0.0, config.sweep_velocity)
        t = dt * np.arange(n)
        theta = np.outer(config.k * V, t) + phi0[:, None]
        return config.amplitudes @ np.cos(theta)

    # kolmogorov: rate = mean rate + OU perturbation, then integrate
    rates = config.mode_rates()
    tau = 1.0 / rates
    sigma = config.broadening * rates
    rho = np.exp(-dt / tau)
    b0 = rng.normal(0.0, 1.0, size=n_modes) * sigma
    w = rng.standard_normal(size=(n_modes, n))
    scale = sigma * np.sqrt(1.0 - rho * rho)
    b = np.empty_like(w)
    for m in range(n_modes):
        # b[i] = rho*b[i-1] + scale*w[i], seeded from the stationary draw
        b[m] = _signal.lfilter([scale[m]], [1.0, -rho[m]], w[m], zi=[rho[m] * b0[m]])[0]
    theta = np.cumsum((rates[:, None] + b) * dt, axis=1) + phi0[:, None]
    return config.amplitudes @ np.cos(theta)


def synthesize(config: SyntheticEnsemble) -> TimeSeriesEnsemble:
    """Full ensemble, realizations stacked in index order."""
    _check_duration(config)
    rows = [_realization(config, r) for r in range(config.n_realizations)]
    return TimeSeriesEnsemble(u=np.vstack(rows), dt=1.0 / config.sample_rate,
                              variance_target=config.variance_target)


@dataclass(frozen=True)
class FrequencySpectrum:
    omega: np.ndarray
    phi: np.ndarray
    variance_integral: float
    variance_target: float
    variance_check: float       # relative mismatch of the two

    def __post_init__(self):
        for name in ("omega", "phi"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)


def _welch_psd(u: np.ndarray, dt: float, window: str, nperseg: int | None):
    n = u.shape[-1]
    if nperseg is None:
        nperseg = min(DEFAULT_NPERSEG, n)
    noverlap = None if window != "boxcar" else 0
    f, pxx = _signal.welch(u, fs=1.0 / dt, window=window, nperseg=min(nperseg, n),
                           noverlap=noverlap, detrend=False, scaling="density",
                           return_onesided=True)
    return f, pxx


def frequency_spectrum(ensemble: TimeSeriesEnsemble, window: str = "hann",
                       nperseg: int | None = None) -> FrequencySpectrum:
    """Welch spectrum averaged over realizations, one-sided in omega.

    Normalized so that the omega integral equals the signal variance.
    ``window='boxcar'``, nperseg covering the full record, reduces to the
    plain periodogram whose integral is the discrete Parseval sum.
    """
    u = ensemble.u
    if u.shape[0] < 16:
        raise UnderResolvedError(f"need >= 16 realizations, have {u.shape[0]}")
    f, pxx = _welch_psd(u, ensemble.dt, window, nperseg)
    pxx = np.mean(pxx, axis=0)
    omega = 2.0 * np.pi * f
    phi = pxx / (2.0 * np.pi)
    # bin sum, not trapezoid: density bins satisfy sum(phi) * domega = <u^2>
    integral = float(np.sum(phi) * (omega[1] - omega[0]))
    target = ensemble.variance_target
    if target is None:
        target = float(np.mean(u * u))
    check = abs(integral - target) / target if target > 0 else np.inf
    return FrequencySpectrum(omega=omega, phi=phi, variance_integral=integral,
                             variance_target=float(target), variance_check=float(check))


def _psd_worker(args):
    config, r, window, nperseg = args
    u = _realization(config, r)
    _, pxx = _welch_psd(u[None, :], 1.0 / config.sample_rate, window, nperseg)
    return r, pxx[0]


def ensemble_spectrum(config: SyntheticEnsemble, window: str = "hann",
                      nperseg: int | None = None, workers: int = 1) -> FrequencySpectrum:
    """Fused synthesize + Welch path that never stores the full ensemble.

    Bit-identical to frequency_spectrum(synthesize(config), ...) for any
    worker count: per-realization seeding plus index-ordered averaging.
    """
    _check_duration(config)
    if config.n_realizations < 16:
        raise UnderResolvedError(f"need >= 16 realizations, have {config.n_realizations}")
    jobs = [(config, r, window, nperseg) for r in range(config.n_realizations)]
    if workers > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            results = pool.map(_psd_worker, jobs)
    else:
        results = [_psd_worker(j) for j in jobs]
    results.sort(key=lambda t: t[0])
    stack = np.vstack([p for _, p in results])
    # mean in fixed order, matching np.mean over the stacked ensemble
    pxx = np.mean(stack, axis=0)
    n = config.n_samples
    eff_nperseg = min(DEFAULT_NPERSEG if nperseg is None else nperseg, n)
    f = np.fft.rfftfreq(eff_nperseg, d=1.0 / config.sample_rate)
    omega = 2.0 * np.pi * f
    phi = pxx / (2.0 * np.pi)
    integral = float(np.sum(phi) * (omega[1] - omega[0]))
    target = config.variance_target
    check = abs(integral - target) / target if target > 0 else np.inf
    return FrequencySpectrum(omega=omega, phi=phi, variance_integral=integral,
                             variance_target=float(target), variance_check=float(check))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    window: tuple
    n_points: int


def slope_fit(spectrum: FrequencySpectrum, omega_window) -> SlopeFit:
    """Least-squares exponent of log phi against log omega over the window."""
    lo, hi = float(omega_window[0]), float(omega_window[1])
    if not (0.0 < lo < hi):
        raise ValueError("window must satisfy 0 < lo < hi")
    support = spectrum.omega[spectrum.phi > 0.0]
    if support.size == 0 or lo < support.min() or hi > support.max():
        raise OutOfRangeError(
            f"window [{lo:g}, {hi:g}] exceeds spectral support "
            f"[{support.min() if support.size else np.nan:g}, "
            f"{support.max() if support.size else np.nan:g}]")
    if np.log10(hi / lo) < 1.0 - 1e-9:
        raise InsufficientSpanError("slope window must span at least one decade")
    sel = (spectrum.omega >= lo) & (spectrum.omega <= hi) & (spectrum.phi > 0.0)
    if np.count_nonzero(sel) < 8:
        raise InsufficientSpanError("too few spectral points inside the window")
    x = np.log(spectrum.omega[sel])
    y = np.log(spectrum.phi[sel])
    X = np.column_stack([np.ones_like(x), x])
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = len(y) - 2
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return SlopeFit(slope=float(beta[1]), stderr=float(np.sqrt(cov[1, 1])),
                    window=(lo, hi), n_points=int(np.count_nonzero(sel)))
