"""Structure-function transforms and the Karman-Howarth balance."""
import numpy as np
import pytest

from hitlab.closure import ClosureParams, TransferResult, transfer_spectrum
from hitlab.errors import AliasingWarning, TimeStepError
from hitlab.evolve import run_decay, step
from hitlab.grid import make_grid
from hitlab.realspace import (default_r_nodes, dimensionless_structure,
                              khe_residual, resolved_mask, s2_from_spectrum,
                              s3_from_transfer, structure_functions)
from hitlab.spectra import (SpectralState, diagnostics, dissipation_rate,
                            total_energy)


def test_s2_small_r_is_dissipative_range(decaying_state):
    st = decaying_state
    eps = dissipation_rate(st)
    r = np.array([0.1 / st.grid.k_max])
    with pytest.warns(AliasingWarning):
        s2 = s2_from_spectrum(st, r)
    assert s2[0] == pytest.approx(eps * r[0] ** 2 / (15.0 * st.nu), rel=1e-3)


def test_s2_large_r_saturates(decaying_state):
    st = decaying_state
    r = np.array([20.0 / st.grid.k_min])
    with pytest.warns(AliasingWarning):
        s2 = s2_from_spectrum(st, r)
    assert s2[0] == pytest.approx((4.0 / 3.0) * total_energy(st), rel=0.02)
    assert np.all(s2 >= 0.0)


def test_four_fifths_law_from_delta_transfer():
    """Constant-flux transfer between two remote nodes gives S3 = -4/5 eps r."""
    g = make_grid(1e-3, 1e3, 32 * 6 + 1)
    eps = 2.3
    ia, ib = g.nearest_index(0.01), g.nearest_index(200.0)
    T = np.zeros(g.n_bins)
    T[ia] = -eps / g.weights[ia]
    T[ib] = +eps / g.weights[ib]
    tr = TransferResult(grid=g, T=T, S=np.zeros((2, 2)),
                        conservation_defect=0.0, gain=np.zeros(g.n_bins),
                        sink_rate=np.zeros(g.n_bins), epsilon=0.0)
    r = np.geomspace(0.2, 1.0, 9)
    s3 = s3_from_transfer(tr, g, r)
    assert np.allclose(s3, -0.8 * eps * r, rtol=2e-3)


def test_khe_residual_closes_in_decay(decaying_state):
    p = ClosureParams()
    # spin up a short tail so the spectrum is dynamically consistent
    a = run_decay(decaying_state, p, t_end=0.5, sample_every=10**9,
                  keep_spectra=False).final_state
    b, _ = step(a, p, None, 0.004)
    mid = a.with_spectrum(0.5 * (a.E + b.E), t=0.5 * (a.t + b.t))
    tr = transfer_spectrum(mid, p)
    r = np.geomspace(1.2 / a.grid.k_max, 0.8 / a.grid.k_min, 193)
    rep = khe_residual(a, b, tr, r)
    assert rep.residual_norm <= 0.015
    assert rep.dt == pytest.approx(0.004, rel=1e-12)
    assert np.all(rep.forcing_input == 0.0)
    # residual really is the signed sum
    total = (rep.term_energy + rep.term_ds2dt + rep.term_s3
             + rep.term_viscous - rep.forcing_input)
    assert np.array_equal(total, rep.residual)


def test_khe_residual_closes_when_forced(stationary_run):
    rec, forcing = stationary_run
    p = ClosureParams()
    a = rec.final_state
    b, _ = step(a, p, forcing, 0.003)
    mid = a.with_spectrum(0.5 * (a.E + b.E), t=0.5 * (a.t + b.t))
    tr = transfer_spectrum(mid, p)
    r = np.geomspace(1.2 / a.grid.k_max, 0.8 / a.grid.k_min, 193)
    rep = khe_residual(a, b, tr, r, forcing=forcing)
    assert rep.residual_norm <= 0.015
    assert np.max(np.abs(rep.forcing_input)) > 0.0


def test_khe_rejects_coarse_dt(stationary_run):
    rec, _forcing = stationary_run
    p = ClosureParams()
    a = rec.final_state
    b = run_decay(a, p, t_end=a.t + 6.0, sample_every=10**9,
                  keep_spectra=False).final_state
    tr = transfer_spectrum(a, p)
    r = np.geomspace(1.2 / a.grid.k_max, 0.8 / a.grid.k_min, 49)
    with pytest.raises(TimeStepError):
        khe_residual(a, b, tr, r)


def test_khe_input_validation(decaying_state):
    p = ClosureParams()
    a = decaying_state
    b, _ = step(a, p, None, 0.01)
    tr = transfer_spectrum(a, p)
    good = np.geomspace(0.1, 1.0, 16)
    with pytest.raises(ValueError):
        khe_residual(b, a, tr, good)          # reversed times
    with pytest.raises(ValueError):
        khe_residual(a, b, tr, np.array([0.1, 0.2, 0.35]))  # not geometric
    with pytest.raises(ValueError):
        khe_residual(a, b, tr, good[:2])      # too short for stencils
    with pytest.raises(ValueError):
        s2_from_spectrum(a, np.array([]))
    with pytest.raises(ValueError):
        s2_from_spectrum(a, np.array([-0.1, 0.2]))


def test_s3_grid_mismatch_rejected(decaying_state):
    tr = transfer_spectrum(decaying_state, ClosureParams())
    other = make_grid(0.05, 50.0, 48)
    with pytest.raises(ValueError):
        s3_from_transfer(tr, other, np.geomspace(0.1, 1.0, 8))


def test_default_r_nodes_and_mask(grid64):
    r = default_r_nodes(grid64)
    assert r[0] == pytest.approx(0.02 / grid64.k_max, rel=1e-12)
    assert r[-1] == pytest.approx(20.0 / grid64.k_min, rel=1e-12)
    ratios = r[1:] / r[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-10)
    m = resolved_mask(grid64, r)
    assert not m[0] and not m[-1]
    assert m[np.searchsorted(r, 1.0)]


def test_structure_functions_wrapper(decaying_state):
    p = ClosureParams()
    tr = transfer_spectrum(decaying_state, p)
    sf = structure_functions(decaying_state, transfer=tr)
    assert sf.r.shape == sf.S2.shape == sf.S3.shape
    bare = structure_functions(decaying_state)
    assert np.all(bare.S3 == 0.0)
    with pytest.raises(ValueError):
        sf.S2[0] = 1.0


def test_dimensionless_structure(decaying_state):
    p = ClosureParams()
    rec = run_decay(decaying_state, p, t_end=0.4, sample_every=20)
    states = rec.spectra
    d = dimensionless_structure(states, 2, reference_time=states[0].t)
    ref = diagnostics(states[0])
    r = default_r_nodes(states[0].grid)
    assert np.allclose(d.x, r / ref.integral_scale, rtol=1e-12)
    direct = s2_from_spectrum(states[0], r) / ref.rms_velocity ** 2
    assert np.allclose(d.f[0], direct, rtol=1e-12)
    tt = (np.array([s.t for s in states]) - states[0].t) / (
        ref.integral_scale / ref.rms_velocity)
    assert np.allclose(d.t_tilde, tt, rtol=1e-12)

    single = dimensionless_structure(states[0], 2, reference_time=0.0)
    assert single.t_tilde is None and single.f.ndim == 1

    with pytest.raises(ValueError):
        dimensionless_structure(states, 4, reference_time=0.0)
    with pytest.raises(ValueError):
        dimensionless_structure(states, 3, reference_time=0.0)  # no transfers
    with pytest.raises(ValueError):
        dimensionless_structure([], 2, reference_time=0.0)
