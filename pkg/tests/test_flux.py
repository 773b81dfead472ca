"""Flux-profile identities and the transfer band split."""
import numpy as np
import pytest

from hitlab.closure import ClosureParams, TransferResult, transfer_spectrum
from hitlab.errors import NoSignChangeError
from hitlab.flux import flux_profile, partitioned_transfer, zero_crossing


def _fake_transfer(grid, T):
    n = grid.n_bins
    return TransferResult(grid=grid, T=np.asarray(T, dtype=float),
                          S=np.zeros((n, n)), conservation_defect=0.0,
                          gain=np.zeros(n), sink_rate=np.zeros(n),
                          epsilon=1.0)


def test_flux_endpoints_and_forms(stationary_transfer):
    fl = flux_profile(stationary_transfer)
    eps = stationary_transfer.epsilon
    assert fl.Pi[0] == 0.0
    assert abs(fl.Pi[-1]) <= 1e-8 * eps
    scale = max(eps, float(np.abs(fl.Pi).max()))
    assert np.max(np.abs(fl.Pi - fl.Pi_forward)) <= 1e-8 * scale
    assert np.max(np.abs(fl.Pi - fl.Pi_minus_plus)) <= 1e-8 * scale
    assert fl.kappa.shape == (stationary_transfer.grid.n_bins + 1,)


def test_flux_peak_and_zero_crossing(stationary_transfer):
    fl = flux_profile(stationary_transfer)
    eps = stationary_transfer.epsilon
    assert 0.0 < fl.flux_max <= eps * (1.0 + 1e-6)
    assert fl.k_star is not None
    # two-sided band [0.1, 0.16]: sink/source boundaries at both edges
    assert fl.k_star_multiplicity == 2
    assert 0.06 <= fl.k_star <= 0.6
    assert 0.1 <= fl.flux_max_kappa <= 0.3


def test_flux_at_node_indexing(stationary_transfer):
    fl = flux_profile(stationary_transfer)
    g = stationary_transfer.grid
    w = g.weights
    for idx in (0, 10, g.n_bins - 1):
        direct = -float(np.dot(w[:idx + 1], stationary_transfer.T[:idx + 1]))
        assert fl.at_node(idx) == pytest.approx(direct, rel=1e-12, abs=1e-15)


def test_partitioned_transfer_identities(stationary_transfer):
    tr = stationary_transfer
    g = tr.grid
    w = g.weights
    eps = tr.epsilon
    fl = flux_profile(tr)
    for kappa in (0.05, 0.17, 1.0, g.k_max):
        part = partitioned_transfer(tr, kappa)
        idx = part.index
        # reassembly
        assert np.allclose(part.low_band + part.high_band, tr.T,
                           rtol=1e-12, atol=1e-13 * eps)
        # the low-band transfer moves no energy across the cutoff
        low_int = float(np.dot(w[:idx + 1], part.low_band[:idx + 1]))
        assert abs(low_int) <= 1e-10 * eps
        # flux equals the high-band contribution below the cutoff
        high_int = -float(np.dot(w[:idx + 1], tr.T[:idx + 1]))
        mp_int = float(np.dot(w[:idx + 1], part.high_band[:idx + 1]))
        assert high_int == pytest.approx(-mp_int, rel=1e-9, abs=1e-12 * eps)
        assert fl.at_node(idx) == pytest.approx(high_int, rel=1e-12,
                                                abs=1e-15)


def test_zero_crossing_synthetic(grid64):
    n = grid64.n_bins
    T = np.ones(n)
    T[:20] = -1.0
    tr = _fake_transfer(grid64, T)
    k_star, mult = zero_crossing(tr)
    assert mult == 1
    expected = np.exp(0.5 * (np.log(grid64.nodes[19])
                             + np.log(grid64.nodes[20])))
    assert k_star == pytest.approx(expected, rel=1e-12)

    # rounding noise deep in the tail must not add crossings
    T2 = np.array(T)
    T2[-6:] = [1e-12, -1e-12, 1e-12, -1e-12, 1e-12, -1e-12]
    k2, mult2 = zero_crossing(_fake_transfer(grid64, T2))
    assert mult2 == 1
    assert k2 == pytest.approx(k_star, rel=1e-12)


def test_zero_crossing_errors(grid64):
    with pytest.raises(NoSignChangeError):
        zero_crossing(_fake_transfer(grid64, np.zeros(grid64.n_bins)))
    with pytest.raises(NoSignChangeError):
        zero_crossing(_fake_transfer(grid64, np.ones(grid64.n_bins)))


def test_decaying_flux_is_forward(random_states):
    # single-signed hump: net forward cascade through the middle
    tr = transfer_spectrum(random_states[0], ClosureParams())
    fl = flux_profile(tr)
    assert fl.flux_max > 0.0
    mid = slice(10, 50)
    assert np.all(fl.Pi[mid] > -1e-8 * fl.flux_max)
