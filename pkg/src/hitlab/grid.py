"""Geometric wavenumber mesh and its quadrature rule.

Nodes are log-uniform between ``k_min`` and ``k_max``. Integrals over the
resolved band are discrete weighted sums: composite Simpson in log-k with the
node Jacobian, rescaled so the weights sum to exactly ``k_max - k_min``. The
rule is positive, exact for constants, and better than second order for smooth
spectra (power laws are plain exponentials in log-k).

Partial integrals split the snapped node's weight through a precomputed "left
share" so that a partial integral and its complement always reassemble the
full integral exactly, and partial integrals of constants are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidRangeError, LengthMismatchError, OutOfRangeError

__all__ = ["WavenumberGrid", "PartialIntegral", "make_grid"]


class PartialIntegral(NamedTuple):
    """Result of a lower partial integral with the snapped cutoff reported."""

    value: float
    kappa: float
    index: int


@dataclass(frozen=True)
class WavenumberGrid:
    """Immutable log-uniform wavenumber mesh with quadrature weights.

    Attributes
    ----------
    nodes : ndarray
        Wavenumber samples, strictly increasing, ``nodes[0] == k_min`` and
        ``nodes[-1] == k_max``.
    weights : ndarray
        Positive quadrature weights; ``weights.sum() == k_max - k_min`` to
        rounding.
    cell_edges : ndarray
        ``n_bins + 1`` cell boundaries at geometric midpoints between nodes,
        pinned to ``k_min`` and ``k_max`` at the ends. Used for clipped triad
        quadrature and as flux interface positions.
    left_share : ndarray
        Portion of each node's weight assigned below the node by
        ``partial_integrate``; ``0 <= left_share <= weights``.
    """

    k_min: float
    k_max: float
    n_bins: int
    nodes: np.ndarray
    weights: np.ndarray
    cell_edges: np.ndarray
    left_share: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "weights", "cell_edges", "left_share"):
            getattr(self, name).setflags(write=False)

    @property
    def log_spacing(self) -> float:
        """Uniform spacing of the nodes in log-k."""
        return math.log(self.k_max / self.k_min) / max(self.n_bins - 1, 1)

    @property
    def prefix_weights(self) -> np.ndarray:
        """Cumulative weight strictly below each node (length n_bins)."""
        out = np.concatenate(([0.0], np.cumsum(self.weights)[:-1]))
        out.setflags(write=False)
        return out

    def _check_length(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (self.n_bins,):
            raise LengthMismatchError(
                f"expected {self.n_bins} samples, got {samples.shape}")
        return samples

    def integrate(self, samples) -> float:
        """Quadrature of ``integral f(k) dk`` over [k_min, k_max]."""
        samples = self._check_length(samples)
        return float(np.dot(self.weights, samples))

    def nearest_index(self, kappa: float) -> int:
        """Index of the node nearest ``kappa`` in log distance."""
        if not (self.k_min <= kappa <= self.k_max):
            raise OutOfRangeError(
                f"kappa={kappa!r} outside [{self.k_min}, {self.k_max}]")
        pos = math.log(kappa / self.k_min) / self.log_spacing
        idx = int(round(pos))
        return min(max(idx, 0), self.n_bins - 1)

    def partial_integrate(self, samples, kappa: float) -> PartialIntegral:
        """Quadrature of ``integral f(k) dk`` over [k_min, kappa].

        ``kappa`` is snapped to the nearest node; the snapped value is
        reported. The complement over [kappa, k_max] computed with the
        remaining weights reassembles ``integrate`` exactly.
        """
        samples = self._check_length(samples)
        idx = self.nearest_index(kappa)
        value = float(np.dot(self.weights[:idx], samples[:idx])
                      + self.left_share[idx] * samples[idx])
        return PartialIntegral(value, float(self.nodes[idx]), idx)

    def upper_integrate(self, samples, kappa: float) -> PartialIntegral:
        """Complement of :meth:`partial_integrate` over [kappa, k_max]."""
        samples = self._check_length(samples)
        idx = self.nearest_index(kappa)
        right = self.weights[idx] - self.left_share[idx]
        value = float(np.dot(self.weights[idx + 1:], samples[idx + 1:])
                      + right * samples[idx])
        return PartialIntegral(value, float(self.nodes[idx]), idx)

    def cumulative_lower(self, samples) -> np.ndarray:
        """Partial integral up to every node at once (same split rule)."""
        samples = self._check_length(samples)
        contrib = self.weights * samples
        prefix = np.concatenate(([0.0], np.cumsum(contrib)[:-1]))
        return prefix + self.left_share * samples


def _simpson_log_weights(n: int, spacing: float) -> np.ndarray:
    # Composite Simpson on the uniform log mesh; a trailing odd interval is
    # closed with a trapezoid panel.
    w = np.zeros(n)
    n_int = n - 1
    pairs = n_int // 2
    for p in range(pairs):
        i = 2 * p
        w[i] += spacing / 3.0
        w[i + 1] += 4.0 * spacing / 3.0
        w[i + 2] += spacing / 3.0
    if n_int % 2 == 1:
        w[n - 2] += spacing / 2.0
        w[n - 1] += spacing / 2.0
    return w


def make_grid(k_min: float, k_max: float, n_bins: int) -> WavenumberGrid:
    """Build a log-uniform grid with normalized Simpson-in-log weights.

    Raises
    ------
    InvalidRangeError
        If ``k_min <= 0``, ``k_max <= k_min`` or ``n_bins < 2``.
    """
    if not (math.isfinite(k_min) and math.isfinite(k_max)):
        raise InvalidRangeError("grid bounds must be finite")
    if k_min <= 0.0:
        raise InvalidRangeError(f"k_min must be positive, got {k_min}")
    if k_max <= k_min:
        raise InvalidRangeError(f"need k_max > k_min, got [{k_min}, {k_max}]")
    if n_bins < 2:
        raise InvalidRangeError(f"need n_bins >= 2, got {n_bins}")

    log_nodes = np.linspace(math.log(k_min), math.log(k_max), n_bins)
    nodes = np.exp(log_nodes)
    nodes[0] = k_min
    nodes[-1] = k_max

    span = k_max - k_min
    if n_bins == 2:
        weights = np.array([span / 2.0, span / 2.0])
    else:
        spacing = math.log(k_max / k_min) / (n_bins - 1)
        weights = _simpson_log_weights(n_bins, spacing) * nodes
        weights *= span / weights.sum()

    edges = np.empty(n_bins + 1)
    edges[0] = k_min
    edges[-1] = k_max
    edges[1:-1] = np.sqrt(nodes[:-1] * nodes[1:])

    prefix = np.concatenate(([0.0], np.cumsum(weights)[:-1]))
    share = (nodes - k_min) - prefix
    share[0] = 0.0
    share[-1] = weights[-1]
    # The share stays inside the node weight for any log-uniform mesh; guard
    # against rounding at the boundaries.
    share = np.clip(share, 0.0, weights)

    return WavenumberGrid(
        k_min=float(k_min),
        k_max=float(k_max),
        n_bins=int(n_bins),
        nodes=nodes,
        weights=weights,
        cell_edges=edges,
        left_share=share,
    )
