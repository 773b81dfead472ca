"""Kinematic frequency-spectrum Monte Carlo: construction and estimator."""
import dataclasses

import numpy as np
import pytest

from hitlab import presets
from hitlab.errors import (InsufficientSpanError, OutOfRangeError,
                           UnderResolvedError)
from hitlab.temporal import (FrequencySpectrum, SyntheticEnsemble,
                             TimeSeriesEnsemble, ensemble_spectrum,
                             frequency_spectrum, inertial_band_modes,
                             slope_fit, synthesize)


def test_mode_table_matches_band_energy():
    cfg = inertial_band_modes("kolmogorov", k_lo=1.0, k_hi=316.23, n_modes=36,
                              epsilon=1.0, kolmogorov_const=1.62)
    # cell-exact amplitudes: sum a^2/2 equals the band integral of C k^(-5/3)
    band = 1.5 * 1.62 * (1.0 - 316.23 ** (-2.0 / 3.0))
    assert cfg.variance_target == pytest.approx(band, rel=1e-12)
    assert cfg.k.size == 36
    assert cfg.k[0] > 1.0 and cfg.k[-1] < 316.23
    steps = np.diff(np.log(cfg.k))
    assert np.allclose(steps, steps[0], rtol=1e-10)


def test_mode_rates_scaling():
    cfg = inertial_band_modes("kolmogorov", epsilon=8.0)
    assert np.allclose(cfg.mode_rates(), 2.0 * cfg.k ** (2.0 / 3.0), rtol=1e-12)
    swept = inertial_band_modes("sweeping", sweep_velocity=3.0)
    assert np.allclose(swept.mode_rates(), 3.0 * swept.k, rtol=1e-12)


def test_variance_target_definition():
    cfg = SyntheticEnsemble(k=[1.0, 2.0], amplitudes=[0.3, 0.4],
                            decorrelation_model="sweeping", sweep_velocity=1.0,
                            seed=0, n_realizations=16, sample_rate=10.0,
                            duration=700.0)
    assert cfg.variance_target == pytest.approx(0.125, rel=1e-15)


def test_construction_validation():
    good = dict(k=[1.0], amplitudes=[1.0], decorrelation_model="sweeping",
                sweep_velocity=1.0, seed=0, n_realizations=16,
                sample_rate=10.0, duration=700.0)
    with pytest.raises(ValueError):
        SyntheticEnsemble(**{**good, "decorrelation_model": "brownian"})
    with pytest.raises(ValueError):
        SyntheticEnsemble(**{**good, "k": []})
    with pytest.raises(ValueError):
        SyntheticEnsemble(**{**good, "k": [-1.0]})
    with pytest.raises(ValueError):
        SyntheticEnsemble(**{**good, "n_realizations": 0})
    with pytest.raises(ValueError):
        inertial_band_modes("kolmogorov", k_lo=5.0, k_hi=2.0)
    with pytest.raises(ValueError):
        inertial_band_modes("brownian")
    with pytest.raises(ValueError):
        TimeSeriesEnsemble(u=np.zeros(8), dt=0.1)  # needs 2-d stack


def test_duration_precondition():
    cfg = inertial_band_modes("kolmogorov", n_realizations=16)
    short = dataclasses.replace(cfg, duration=cfg.duration / 10.0)
    with pytest.raises(UnderResolvedError):
        synthesize(short)
    with pytest.raises(UnderResolvedError):
        ensemble_spectrum(short)


def test_minimum_realizations():
    cfg = inertial_band_modes("kolmogorov", k_hi=31.62, n_modes=8,
                              n_realizations=8, seed=0)
    with pytest.raises(UnderResolvedError):
        ensemble_spectrum(cfg)
    u = np.zeros((8, 128)) + 1.0
    with pytest.raises(UnderResolvedError):
        frequency_spectrum(TimeSeriesEnsemble(u=u, dt=0.1))


def test_single_mode_is_a_line():
    one = SyntheticEnsemble(k=[5.0], amplitudes=[0.8],
                            decorrelation_model="sweeping", sweep_velocity=2.0,
                            seed=1, n_realizations=16, sample_rate=32.0,
                            duration=100 * 2 * np.pi / 10.0,
                            fixed_velocity=True)
    sp = frequency_spectrum(synthesize(one))
    dw = sp.omega[1] - sp.omega[0]
    pk = int(np.argmax(sp.phi))
    assert abs(sp.omega[pk] - 5.0 * 2.0) <= dw
    assert sp.variance_integral == pytest.approx(0.32, rel=1e-9)
    near = float(np.sum(sp.phi[max(pk - 5, 0):pk + 6]) * dw)
    assert near >= 0.999 * sp.variance_integral
    assert sp.variance_check < 1e-12


def test_taylor_frozen_flow_mapping():
    # fixed advection velocity: each mode's spectral mass appears at k V
    cfg = inertial_band_modes("sweeping", k_lo=2.0, k_hi=40.0, n_modes=8,
                              sweep_velocity=1.5, n_realizations=16, seed=2,
                              fixed_velocity=True)
    sp = frequency_spectrum(synthesize(cfg))
    dw = sp.omega[1] - sp.omega[0]
    tones = cfg.k * cfg.sweep_velocity
    cuts = np.sqrt(tones[:-1] * tones[1:])
    cuts = np.concatenate(([tones[0] / 2], cuts, [tones[-1] * 2]))
    for m, (lo, hi) in enumerate(zip(cuts[:-1], cuts[1:])):
        sel = (sp.omega >= lo) & (sp.omega < hi)
        mass = float(np.sum(sp.phi[sel]) * dw)
        assert mass == pytest.approx(0.5 * cfg.amplitudes[m] ** 2, rel=1e-5)
    assert sp.variance_check < 1e-6


def test_white_noise_is_flat():
    rng = np.random.default_rng(42)
    u = rng.standard_normal((16, 8192))
    ens = TimeSeriesEnsemble(u=u, dt=1.0)
    sp = frequency_spectrum(ens, nperseg=512)
    flat = float(np.mean(u * u)) / np.pi  # one-sided band is [0, pi]
    edges = np.geomspace(0.1, 3.0, 6)
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (sp.omega >= lo) & (sp.omega < hi)
        assert np.mean(sp.phi[sel]) == pytest.approx(flat, rel=0.1)
    assert sp.variance_check < 0.01


def test_boxcar_parseval_identity():
    rng = np.random.default_rng(42)
    u = rng.standard_normal((16, 8192))
    ens = TimeSeriesEnsemble(u=u, dt=1.0)
    sp = frequency_spectrum(ens, window="boxcar", nperseg=u.shape[1])
    var = float(np.mean(u * u))
    assert abs(sp.variance_integral - var) / var < 1e-3


@pytest.fixture(scope="module")
def kol16():
    cfg = inertial_band_modes("kolmogorov", n_realizations=16, seed=0)
    return cfg, synthesize(cfg)


@pytest.fixture(scope="module")
def swp16():
    cfg = inertial_band_modes("sweeping", n_realizations=16, seed=0)
    return cfg, synthesize(cfg)


def test_sample_variance_budget(kol16, swp16):
    for cfg, ens in (kol16, swp16):
        err = abs(float(np.mean(ens.u ** 2)) - cfg.variance_target)
        assert err / cfg.variance_target < 0.01


def test_kolmogorov_slope(kol16):
    cfg, ens = kol16
    sp = frequency_spectrum(ens)
    assert np.all(sp.phi >= 0.0)
    fit = slope_fit(sp, presets.temporal_window("kolmogorov", cfg.mode_rates()))
    assert fit.slope == pytest.approx(-2.0, abs=0.08)
    assert fit.stderr < 0.02
    assert sp.variance_check < 0.05


def test_sweeping_slope(swp16):
    cfg, ens = swp16
    sp = frequency_spectrum(ens)
    fit = slope_fit(sp, presets.temporal_window("sweeping", cfg.mode_rates()))
    assert fit.slope == pytest.approx(-5.0 / 3.0, abs=0.2)
    assert sp.variance_check < 0.02


def test_fused_path_matches_and_is_worker_invariant(kol16):
    cfg_small = inertial_band_modes("kolmogorov", k_hi=31.62, n_modes=12,
                                    n_realizations=16, seed=3)
    sp1 = frequency_spectrum(synthesize(cfg_small))
    sp2 = ensemble_spectrum(cfg_small)
    sp3 = ensemble_spectrum(cfg_small, workers=2)
    assert np.array_equal(sp1.omega, sp2.omega)
    assert np.array_equal(sp1.phi, sp2.phi)
    assert np.array_equal(sp2.phi, sp3.phi)
    assert sp1.variance_integral == sp2.variance_integral == sp3.variance_integral


def test_synthesis_is_reproducible(kol16):
    cfg, ens = kol16
    small = dataclasses.replace(cfg, n_realizations=2)
    a = synthesize(small)
    b = synthesize(small)
    assert np.array_equal(a.u, b.u)
    # realization r is independent of how many others are generated
    assert np.array_equal(a.u, ens.u[:2])


def _power_spectrum(n=500, exponent=-1.5):
    omega = np.geomspace(0.5, 200.0, n)
    phi = 2.3 * omega ** exponent
    return FrequencySpectrum(omega=omega, phi=phi, variance_integral=1.0,
                             variance_target=1.0, variance_check=0.0)


def test_slope_fit_recovers_power_law():
    fit = slope_fit(_power_spectrum(), (1.0, 50.0))
    assert fit.slope == pytest.approx(-1.5, abs=1e-9)
    assert fit.stderr < 1e-9
    assert fit.window == (1.0, 50.0)
    assert fit.n_points > 100


def test_slope_fit_guards():
    sp = _power_spectrum()
    with pytest.raises(ValueError):
        slope_fit(sp, (5.0, 5.0))
    with pytest.raises(OutOfRangeError):
        slope_fit(sp, (0.01, 0.2))  # below support
    with pytest.raises(InsufficientSpanError):
        slope_fit(sp, (1.0, 5.0))  # under a decade
    with pytest.raises(InsufficientSpanError):
        slope_fit(_power_spectrum(n=12), (1.0, 50.0))  # too few points
    dead = FrequencySpectrum(omega=sp.omega, phi=np.zeros_like(sp.phi),
                             variance_integral=0.0, variance_target=0.0,
                             variance_check=0.0)
    with pytest.raises(OutOfRangeError):
        slope_fit(dead, (1.0, 50.0))
