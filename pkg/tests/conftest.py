"""Shared fixtures: small grids and a moderately turbulent stationary state.

Expensive runs are session scoped so the identity checks in several test
modules can share them.
"""
import numpy as np
import pytest

from hitlab.closure import ClosureParams, transfer_spectrum
from hitlab.dissipation import ladder_grid
from hitlab.evolve import ForcingSpec, run_forced
from hitlab.grid import make_grid
from hitlab.spectra import SpectralState, initial_spectrum


@pytest.fixture(scope="session")
def grid64():
    return make_grid(0.05, 50.0, 64)


@pytest.fixture(scope="session")
def decaying_state(grid64):
    return initial_spectrum(grid64, peak_wavenumber=0.5, energy=1.0, nu=0.01)


@pytest.fixture(scope="session")
def random_states(grid64):
    """Seeded batch of positive random spectra for invariant checks."""
    rng = np.random.default_rng(7)
    states = []
    for _ in range(4):
        shape = grid64.nodes ** 2 * np.exp(-grid64.nodes / 3.0)
        noise = rng.lognormal(0.0, 0.5, size=grid64.n_bins)
        states.append(SpectralState(grid=grid64, E=shape * noise, nu=0.02, t=0.0))
    return states


@pytest.fixture(scope="session")
def stationary_run():
    """Forced run to stationarity, cheap enough for the unit suite."""
    grid = ladder_grid(0.02, 32, 2.5 * (1.0 / 0.3 ** 3) ** 0.25)
    state = initial_spectrum(grid, peak_wavenumber=0.12, energy=0.5, nu=0.3)
    forcing = ForcingSpec(band_top=0.16, injection_rate=1.0, band_bottom=0.1)
    record = run_forced(state, ClosureParams(), forcing,
                        max_time=200.0, safety=0.25, sample_every=10)
    assert record.stationarity_flag
    return record, forcing


@pytest.fixture(scope="session")
def stationary_transfer(stationary_run):
    record, _ = stationary_run
    return transfer_spectrum(record.final_state, ClosureParams())
