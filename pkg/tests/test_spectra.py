"""Spectrum container, scalar diagnostics, and their closed-form values."""
import numpy as np
import pytest

from hitlab.errors import (DegenerateSpectrumError, InvalidRangeError,
                           LengthMismatchError)
from hitlab.grid import make_grid
from hitlab.spectra import (SpectralState, diagnostics, dissipation_rate,
                            initial_spectrum, spectral_density, total_energy)


@pytest.fixture(scope="module")
def fine_grid():
    return make_grid(1e-3, 60.0, 48 * 5 + 1)


def test_initial_spectrum_energy_is_exact(fine_grid):
    st = initial_spectrum(fine_grid, peak_wavenumber=0.7, energy=2.5, nu=0.01)
    assert total_energy(st) == pytest.approx(2.5, rel=1e-13)


def test_initial_spectrum_peak_location(fine_grid):
    # d/dk [k^4 exp(-2 k^2/kp^2)] = 0 at k = kp
    st = initial_spectrum(fine_grid, peak_wavenumber=0.7, energy=1.0, nu=0.01)
    k_at_max = fine_grid.nodes[np.argmax(st.E)]
    assert k_at_max == pytest.approx(0.7, rel=0.03)


def test_low_k_exponent_two(fine_grid):
    st = initial_spectrum(fine_grid, peak_wavenumber=1.0, energy=1.0, nu=0.01,
                          low_k_exponent=2)
    lo = fine_grid.nodes < 0.05
    slope = np.polyfit(np.log(fine_grid.nodes[lo]), np.log(st.E[lo]), 1)[0]
    assert slope == pytest.approx(2.0, abs=1e-3)


def test_diagnostics_closed_forms(fine_grid):
    """E(k) = A k^4 exp(-2k^2): moments reduce to Gaussian integrals."""
    k = fine_grid.nodes
    A, nu = 0.9, 0.013
    st = SpectralState(grid=fine_grid, E=A * k ** 4 * np.exp(-2.0 * k * k),
                       nu=nu, t=0.0)
    d = diagnostics(st)

    # int_0^inf k^n exp(-2k^2) dk via gamma: I_n = Gamma((n+1)/2) / (2 * 2^((n+1)/2))
    from math import gamma, pi, sqrt
    def mom(n):
        return A * gamma((n + 1) / 2.0) / (2.0 * 2.0 ** ((n + 1) / 2.0))

    E_tot = mom(4)
    eps = 2.0 * nu * mom(6)
    U = sqrt(2.0 * E_tot / 3.0)
    L = 3.0 * pi / 4.0 * mom(3) / E_tot
    assert d.total_energy == pytest.approx(E_tot, rel=1e-7)
    assert d.dissipation == pytest.approx(eps, rel=1e-7)
    assert d.rms_velocity == pytest.approx(U, rel=1e-7)
    assert d.integral_scale == pytest.approx(L, rel=1e-7)
    assert d.reynolds_L == pytest.approx(U * L / nu, rel=1e-7)
    assert d.taylor_reynolds == pytest.approx(U * U * sqrt(15.0 / (nu * eps)),
                                              rel=1e-7)
    assert d.kolmogorov_wavenumber == pytest.approx((eps / nu ** 3) ** 0.25,
                                                    rel=1e-7)


def test_spectral_density_conversion(fine_grid):
    st = initial_spectrum(fine_grid, peak_wavenumber=0.5, energy=1.0, nu=0.02)
    C = spectral_density(st)
    assert np.allclose(st.E, 4.0 * np.pi * fine_grid.nodes ** 2 * C, rtol=1e-12)


def test_with_spectrum_returns_new_state(fine_grid):
    st = initial_spectrum(fine_grid, peak_wavenumber=0.5, energy=1.0, nu=0.02)
    st2 = st.with_spectrum(2.0 * st.E, t=3.0)
    assert st2.t == 3.0 and st.t == 0.0
    assert total_energy(st2) == pytest.approx(2.0 * total_energy(st), rel=1e-13)


def test_state_validation(fine_grid):
    n = fine_grid.n_bins
    with pytest.raises(LengthMismatchError):
        SpectralState(grid=fine_grid, E=np.ones(n - 1), nu=0.1, t=0.0)
    with pytest.raises(DegenerateSpectrumError):
        SpectralState(grid=fine_grid, E=-np.ones(n), nu=0.1, t=0.0)
    with pytest.raises(DegenerateSpectrumError):
        bad = np.ones(n); bad[3] = np.nan
        SpectralState(grid=fine_grid, E=bad, nu=0.1, t=0.0)
    with pytest.raises(InvalidRangeError):
        SpectralState(grid=fine_grid, E=np.ones(n), nu=0.0, t=0.0)


def test_spectrum_write_protected(fine_grid):
    st = initial_spectrum(fine_grid, peak_wavenumber=0.5, energy=1.0, nu=0.02)
    with pytest.raises(ValueError):
        st.E[0] = 1.0


def test_zero_spectrum_dissipation(fine_grid):
    st = SpectralState(grid=fine_grid, E=np.zeros(fine_grid.n_bins),
                       nu=0.1, t=0.0)
    assert dissipation_rate(st) == 0.0
