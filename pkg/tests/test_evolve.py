"""Integrator contracts: exact viscous factor, Heun order, forcing, runs."""
import math

import numpy as np
import pytest

from hitlab.closure import ClosureParams, transfer_spectrum
from hitlab.errors import (BalanceError, InvalidRangeError, OutOfRangeError,
                           StepInstabilityError)
from hitlab.evolve import (ForcingSpec, forcing_profile, run_decay,
                           run_forced, step, suggest_dt)
from hitlab.spectra import (SpectralState, diagnostics, dissipation_rate,
                            initial_spectrum, total_energy)


def test_pure_viscous_decay_is_exact(decaying_state):
    st = decaying_state
    rec = run_decay(st, None, t_end=0.7, sample_every=3)
    exact = st.E * np.exp(-2.0 * st.nu * st.grid.nodes ** 2 * 0.7)
    assert np.allclose(rec.final_state.E, exact, rtol=1e-12, atol=1e-300)
    assert rec.final_state.t == pytest.approx(0.7, abs=1e-12)
    assert rec.aborted is None


def test_heun_second_order(decaying_state):
    p = ClosureParams()

    def advance(dt, t_end=0.2):
        st = decaying_state
        n = int(round(t_end / dt))
        for _ in range(n):
            st, _ = step(st, p, None, dt)
        return st.E

    ref = advance(0.0125)
    e1 = np.max(np.abs(advance(0.1) - ref))
    e2 = np.max(np.abs(advance(0.05) - ref))
    assert 2.5 < e1 / e2 < 7.0


def test_forcing_profile_contract(grid64):
    st = initial_spectrum(grid64, peak_wavenumber=0.3, energy=2.0, nu=0.05)
    f = ForcingSpec(band_top=0.4, injection_rate=1.7, band_bottom=0.1)
    F = forcing_profile(st, f)
    band = (grid64.nodes >= 0.1) & (grid64.nodes <= 0.4)
    assert np.all(F[~band] == 0.0)
    assert grid64.integrate(F) == pytest.approx(1.7, rel=1e-12)
    # proportional to E inside the band
    ratios = F[band] / st.E[band]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)


def test_forcing_profile_empty_band_is_uniform(grid64):
    E = np.where(grid64.nodes > 1.0, np.exp(-grid64.nodes), 0.0)
    st = SpectralState(grid=grid64, E=E, nu=0.05, t=0.0)
    f = ForcingSpec(band_top=0.4, injection_rate=0.9, band_bottom=0.1)
    F = forcing_profile(st, f)
    band = (grid64.nodes >= 0.1) & (grid64.nodes <= 0.4)
    assert grid64.integrate(F) == pytest.approx(0.9, rel=1e-12)
    assert np.allclose(F[band], F[band][0], rtol=1e-12)


def test_forcing_profile_band_between_nodes(grid64):
    st = initial_spectrum(grid64, peak_wavenumber=0.3, energy=1.0, nu=0.05)
    # no node inside [0.0580, 0.0585]; everything lands on the nearest node
    f = ForcingSpec(band_top=0.0585, injection_rate=1.0, band_bottom=0.0580)
    F = forcing_profile(st, f)
    assert np.count_nonzero(F) == 1
    assert grid64.integrate(F) == pytest.approx(1.0, rel=1e-12)


def test_forcing_profile_edges(grid64, decaying_state):
    assert np.all(forcing_profile(decaying_state, None) == 0.0)
    zero = ForcingSpec(band_top=0.4, injection_rate=0.0)
    assert np.all(forcing_profile(decaying_state, zero) == 0.0)
    with pytest.raises(OutOfRangeError):
        forcing_profile(decaying_state, ForcingSpec(band_top=1e4,
                                                    injection_rate=1.0))


def test_forcing_spec_validation():
    with pytest.raises(InvalidRangeError):
        ForcingSpec(band_top=0.4, injection_rate=-1.0)
    with pytest.raises(InvalidRangeError):
        ForcingSpec(band_top=0.0, injection_rate=1.0)
    with pytest.raises(InvalidRangeError):
        ForcingSpec(band_top=0.4, injection_rate=1.0, band_bottom=0.4)


def test_step_info_and_precomputed_transfer(decaying_state):
    p = ClosureParams()
    tr = transfer_spectrum(decaying_state, p)
    s1, i1 = step(decaying_state, p, None, 0.01, transfer=tr)
    s2, i2 = step(decaying_state, p, None, 0.01)
    assert np.array_equal(s1.E, s2.E)
    assert i1.clipped_energy == 0.0
    assert i1.dt == 0.01
    assert i1.transfer_start is tr
    assert i1.transfer_predictor is not None
    with pytest.raises(InvalidRangeError):
        step(decaying_state, p, None, 0.0)
    with pytest.raises(InvalidRangeError):
        step(decaying_state, p, None, -0.1)


def test_step_rejects_wild_dt(decaying_state):
    with pytest.raises((StepInstabilityError, BalanceError)):
        st = decaying_state
        for _ in range(40):
            st, _ = step(st, ClosureParams(), None, 5.0)


def test_suggest_dt(decaying_state, grid64):
    p = ClosureParams()
    dt = suggest_dt(decaying_state, p)
    assert dt > 0.0
    assert suggest_dt(decaying_state, p, safety=0.125) == pytest.approx(
        0.5 * dt, rel=1e-12)

    # pure viscous limit is exactly safety / (2 nu k_max^2)
    got = suggest_dt(decaying_state, None)
    assert got == pytest.approx(
        0.25 / (2.0 * decaying_state.nu * decaying_state.grid.k_max ** 2),
        rel=1e-12)

    zero = SpectralState(grid=grid64, E=np.zeros(grid64.n_bins), nu=0.01, t=0.0)
    f = ForcingSpec(band_top=0.4, injection_rate=2.0)
    assert suggest_dt(zero, p, forcing=f) == pytest.approx(
        0.25 * (2.0 * 0.4 ** 2) ** (-1.0 / 3.0), rel=1e-12)


def test_run_decay_record(decaying_state):
    rec = run_decay(decaying_state, ClosureParams(), t_end=0.3, sample_every=2)
    assert rec.final_state.t == pytest.approx(0.3, abs=1e-12)
    assert rec.n_steps > 0 and rec.aborted is None
    t = rec.times
    assert np.all(np.diff(t) > 0.0)
    e = np.array([s.total_energy for s in rec.samples])
    assert np.all(np.diff(e) < 0.0)
    assert len(rec.spectra) == len(rec.samples)
    # sampled energy drop tracks the sampled dissipation history
    drop = e[0] - e[-1]
    sink = np.trapezoid([s.dissipation for s in rec.samples], t)
    assert drop == pytest.approx(sink, rel=0.02)
    with pytest.raises(InvalidRangeError):
        run_decay(decaying_state, None, t_end=0.0)


def test_run_forced_reaches_stationarity(stationary_run):
    rec, _forcing = stationary_run
    assert rec.stationarity_flag
    assert rec.stationary_time is not None
    st = rec.final_state
    eps = dissipation_rate(st)
    assert eps == pytest.approx(1.0, rel=0.05)
    last = rec.samples[-1]
    assert last.flux_max <= eps * (1.0 + 1e-6)
    d = diagnostics(st)
    assert last.c_epsilon == pytest.approx(
        eps * d.integral_scale / d.rms_velocity ** 3, rel=1e-9)
    with pytest.raises(InvalidRangeError):
        run_forced(st, ClosureParams(), ForcingSpec(band_top=0.16,
                   injection_rate=1.0), max_time=0.0)


def test_forced_energy_budget(grid64):
    # short forced burst: dE/dt == eps_W - eps + transfer integral (~0)
    st = initial_spectrum(grid64, peak_wavenumber=0.3, energy=0.5, nu=0.05)
    f = ForcingSpec(band_top=0.4, injection_rate=1.3, band_bottom=0.1)
    p = ClosureParams()
    el, dl, tl = [], [], []
    cur = st
    for _ in range(60):
        dt = suggest_dt(cur, p, forcing=f)
        cur, info = step(cur, p, f, dt)
        el.append(total_energy(cur))
        dl.append(dissipation_rate(cur))
        tl.append(cur.t)
    drop = el[-1] - total_energy(st)
    expect = np.trapezoid(1.3 - np.array(dl), np.array(tl) - st.t)
    assert drop == pytest.approx(expect, rel=0.02)
