"""Spectral energy flux and transfer partitioning.

The flux through a cutoff is accumulated on the grid's cell interfaces, so
the profile starts at exactly zero at k_min and returns to the conservation
defect (~ machine zero) at k_max:

    Pi[m]  = - sum_{j < m} w_j T_j      (energy leaving modes below interface m)

Both defining forms (minus the lower partial integral, plus the upper one)
are computed independently and must agree at conservation precision. The
low/high-band split of the transfer at a node cutoff satisfies the exact
identities T^{--} + T^{-+} = T, integral_0^kappa T^{--} dk = 0 and
Pi(kappa) = Pi^{-+}(kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .closure import TransferResult
from .errors import NoSignChangeError, QuadratureError
from .grid import WavenumberGrid

__all__ = [
    "FluxProfile",
    "PartitionedTransfer",
    "flux_profile",
    "zero_crossing",
    "partitioned_transfer",
]


class PartitionedTransfer(NamedTuple):
    """Transfer split by input band relative to a node cutoff."""

    kappa: float
    index: int
    low_band: np.ndarray   # T^{--}: contributions from j <= kappa
    high_band: np.ndarray  # T^{-+}: contributions from j > kappa


@dataclass(frozen=True)
class FluxProfile:
    """Flux sampled on the n_bins + 1 cell interfaces."""

    grid: WavenumberGrid
    kappa: np.ndarray
    Pi: np.ndarray
    Pi_forward: np.ndarray
    Pi_minus_plus: np.ndarray
    T: np.ndarray
    epsilon: float
    flux_max: float
    flux_max_kappa: float
    k_star: float | None
    k_star_multiplicity: int

    def __post_init__(self):
        for name in ("kappa", "Pi", "Pi_forward", "Pi_minus_plus", "T"):
            getattr(self, name).setflags(write=False)

    def at_node(self, index: int) -> float:
        """Flux through the cutoff at grid node ``index`` (inclusive)."""
        return float(self.Pi[index + 1])


def zero_crossing(transfer: TransferResult, rel_floor: float = 1e-9):
    """Interpolated zero of T(k) between its sink and source ranges.

    Sign changes are located between consecutive *significant* nodes
    (|T| > rel_floor * max|T|); rounding noise deep in the dissipation tail
    is ignored. Returns ``(k_star, multiplicity)`` where multiplicity counts
    all significant crossings and k_star interpolates (linearly in log k)
    the one with the largest swing |T_a - T_b|.
    """
    T = transfer.T
    k = transfer.grid.nodes
    scale = float(np.abs(T).max())
    if scale <= 0.0:
        raise NoSignChangeError("transfer is identically zero")
    sig = np.flatnonzero(np.abs(T) > rel_floor * scale)
    if sig.size < 2:
        raise NoSignChangeError("no significant transfer values")

    crossings = []
    for a, b in zip(sig[:-1], sig[1:]):
        if T[a] * T[b] < 0.0:
            crossings.append((int(a), int(b)))
    if not crossings:
        raise NoSignChangeError("transfer does not change sign")

    def interpolate(pair):
        a, b = pair
        frac = -T[a] / (T[b] - T[a])
        return math.exp(math.log(k[a])
                        + frac * (math.log(k[b]) - math.log(k[a])))

    best = max(crossings, key=lambda ab: abs(T[ab[0]] - T[ab[1]]))
    return interpolate(best), len(crossings)


def partitioned_transfer(transfer: TransferResult,
                         kappa: float) -> PartitionedTransfer:
    """Split T(k) by input wavenumber relative to a node cutoff.

    The cutoff snaps to the nearest node; the lower band is inclusive.
    """
    grid = transfer.grid
    idx = grid.nearest_index(kappa)
    w = grid.weights
    S = transfer.S
    low = S[:, :idx + 1] @ w[:idx + 1]
    high = S[:, idx + 1:] @ w[idx + 1:]
    return PartitionedTransfer(kappa=float(grid.nodes[idx]), index=idx,
                               low_band=low, high_band=high)


def flux_profile(transfer: TransferResult) -> FluxProfile:
    """Flux profile on cell interfaces with the band-split diagnostics."""
    grid = transfer.grid
    w = grid.weights
    T = transfer.T
    wT = w * T

    pi = np.concatenate(([0.0], -np.cumsum(wT)))
    pi_fwd = np.concatenate((np.cumsum(wT[::-1])[::-1], [0.0]))

    eps = transfer.epsilon
    scale = max(eps, float(np.abs(wT).sum()))
    if scale > 0.0 and float(np.abs(pi - pi_fwd).max()) > 1e-8 * scale:
        raise QuadratureError("backward and forward flux forms disagree")

    # Pi^{-+} on interfaces: at interface m the lower band is nodes < m.
    n = grid.n_bins
    pi_mp = np.empty(n + 1)
    pi_mp[0] = 0.0
    high_flux = transfer.S @ w  # running complement, recomputed cumulatively
    # T^{-+}(.; node idx) = sum_{j > idx} w_j S_ij; accumulate by peeling
    # columns off the full transfer so each interface costs O(n).
    running = np.array(high_flux)  # equals T with empty lower band
    for m in range(1, n + 1):
        running -= w[m - 1] * transfer.S[:, m - 1]
        pi_mp[m] = -float(np.dot(w[:m], running[:m]))

    try:
        k_star, multiplicity = zero_crossing(transfer)
    except NoSignChangeError:
        k_star, multiplicity = None, 0

    i_max = int(np.argmax(pi))
    return FluxProfile(
        grid=grid,
        kappa=np.array(grid.cell_edges),
        Pi=pi,
        Pi_forward=pi_fwd,
        Pi_minus_plus=pi_mp,
        T=np.array(T),
        epsilon=eps,
        flux_max=float(pi[i_max]),
        flux_max_kappa=float(grid.cell_edges[i_max]),
        k_star=k_star,
        k_star_multiplicity=multiplicity,
    )
