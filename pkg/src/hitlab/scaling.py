"""Kolmogorov-variable rescaling and spectrum-collapse measurement.

States from runs at different Reynolds numbers are mapped into
dissipation-range variables (k/k_d, E/(eps nu^5)^(1/4)) and compared on a
shared logarithmic window.  The external-scale variant multiplies the
rescaled spectrum by (k L_ext)^mu, which breaks the collapse whenever the
member states disagree on L_ext; it exists to quantify that breakage.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, EmptyWindowError
from .spectra import SpectralState, diagnostics

__all__ = [
    "RescaledSpectrum",
    "CollapseReport",
    "kolmogorov_rescale",
    "k62_rescale",
    "physical_from_rescaled",
    "collapse_error",
]

# collapse metric only looks at the dissipation + upper inertial range;
# below this the energy-containing scales are not expected to be universal
WINDOW_FLOOR = 0.05
GRID_PER_DECADE = 25
MIN_WINDOW_DECADES = 0.5


@dataclass(frozen=True)
class RescaledSpectrum:
    """Dimensionless spectrum table with the scales used to build it."""

    k_hat: np.ndarray
    E_hat: np.ndarray
    k_d: float
    amplitude: float            # (eps * nu^5)^(1/4)
    mode: str = "K41"
    mu: float = 0.0
    external_scale: float | None = None

    def __post_init__(self):
        for name in ("k_hat", "E_hat"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            a.setflags(write=False)


@dataclass(frozen=True)
class CollapseReport:
    labels: tuple
    mode: str
    mu: float
    window: tuple               # (k_hat_lo, k_hat_hi)
    pairwise: tuple             # ((label_a, label_b, distance), ...)
    collapse_error: float
    void: bool = False

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "mu": self.mu,
            "window": [self.window[0], self.window[1]],
            "pairwise": [[a, b, d] for a, b, d in self.pairwise],
            "collapse_error": self.collapse_error,
            "void": self.void,
            "labels": list(self.labels),
        }


def kolmogorov_rescale(state: SpectralState, epsilon: float | None = None) -> RescaledSpectrum:
    """Rescale to (k/k_d, E/(eps nu^5)^(1/4)).

    ``epsilon`` overrides the measured dissipation rate; it exists so that
    sensitivity tests can mis-scale deliberately.
    """
    d = diagnostics(state)
    eps = d.dissipation if epsilon is None else float(epsilon)
    if eps <= 0.0 or not np.isfinite(eps):
        raise DegenerateSpectrumError("dissipation rate must be positive to rescale")
    k_d = (eps / state.nu ** 3) ** 0.25
    amp = (eps * state.nu ** 5) ** 0.25
    return RescaledSpectrum(k_hat=state.grid.nodes / k_d, E_hat=state.E / amp,
                            k_d=k_d, amplitude=amp)


def k62_rescale(state: SpectralState, mu: float = 0.1,
                external_scale: float | None = None) -> RescaledSpectrum:
    """Kolmogorov rescale times (k L_ext)^mu.

    mu = 0 reduces exactly to kolmogorov_rescale.  The default external
    scale is the box scale 2 pi / k_min.
    """
    if mu < 0.0:
        raise ValueError("mu must be non-negative")
    base = kolmogorov_rescale(state)
    L_ext = 2.0 * np.pi / state.grid.k_min if external_scale is None else float(external_scale)
    if L_ext <= 0.0:
        raise ValueError("external scale must be positive")
    factor = (state.grid.nodes * L_ext) ** mu
    return RescaledSpectrum(k_hat=base.k_hat, E_hat=base.E_hat * factor,
                            k_d=base.k_d, amplitude=base.amplitude,
                            mode="K62", mu=float(mu), external_scale=L_ext)


def physical_from_rescaled(table: RescaledSpectrum) -> tuple:
    """Invert kolmogorov_rescale back to (k, E).  Exact for K41 tables."""
    if table.mode != "K41":
        raise ValueError("only K41 tables invert without the external-scale factor")
    return table.k_hat * table.k_d, table.E_hat * table.amplitude


def _pair_distance(table_a: RescaledSpectrum, table_b: RescaledSpectrum,
                   k_lo: float, k_hi: float) -> float:
    n = max(2, int(round(GRID_PER_DECADE * np.log10(k_hi / k_lo))) + 1)
    shared = np.linspace(np.log10(k_lo), np.log10(k_hi), n)
    vals = []
    for t in (table_a, table_b):
        pos = t.E_hat > 0.0
        if np.count_nonzero(pos) < 2:
            raise EmptyWindowError("rescaled spectrum has no positive support")
        vals.append(np.interp(shared, np.log10(t.k_hat[pos]), np.log10(t.E_hat[pos])))
    diff = vals[0] - vals[1]
    return float(np.sqrt(np.mean(diff * diff)))


def collapse_error(states, mode: str = "K41", mu: float = 0.1,
                   external_scales=None, labels=None) -> CollapseReport:
    """Max pairwise RMS log10 distance between rescaled spectra.

    The common window is the intersection of the members' dimensionless
    ranges, cut below WINDOW_FLOOR.  Windows shorter than half a decade
    mark the report void (the number is still computed when possible).
    """
    states = list(states)
    if len(states) < 2:
        raise ValueError("collapse needs at least two states")
    if mode not in ("K41", "K62"):
        raise ValueError("mode must be 'K41' or 'K62'")
    if labels is None:
        labels = tuple(f"run{i}" for i in range(len(states)))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(states):
            raise ValueError("one label per state required")

    if mode == "K41":
        tables = [kolmogorov_rescale(s) for s in states]
        mu_used = 0.0
    else:
        if external_scales is None:
            external_scales = [None] * len(states)
        tables = [k62_rescale(s, mu=mu, external_scale=L)
                  for s, L in zip(states, external_scales)]
        mu_used = float(mu)

    k_lo = max(WINDOW_FLOOR, max(t.k_hat[0] for t in tables))
    k_hi = min(t.k_hat[-1] for t in tables)
    if not (k_hi > k_lo):
        raise EmptyWindowError(
            f"no common dimensionless window above {WINDOW_FLOOR} "
            f"(lo={k_lo:.3g}, hi={k_hi:.3g})")
    void = np.log10(k_hi / k_lo) < MIN_WINDOW_DECADES

    pairwise = []
    worst = 0.0
    for i in range(len(tables)):
        for j in range(i + 1, len(tables)):
            dist = _pair_distance(tables[i], tables[j], k_lo, k_hi)
            pairwise.append((labels[i], labels[j], dist))
            worst = max(worst, dist)

    return CollapseReport(labels=labels, mode=mode, mu=mu_used,
                          window=(float(k_lo), float(k_hi)),
                          pairwise=tuple(pairwise), collapse_error=worst,
                          void=bool(void))
