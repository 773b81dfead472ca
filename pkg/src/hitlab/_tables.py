"""Precomputed triad geometry for the closure transfer.

For a pair of output/input wavenumbers (k_i, k_j) the third leg q of an
admissible triangle runs over [|k_j - k_i|, k_j + k_i]. That interval is
covered by the grid's cells (geometric-midpoint boundaries); boundary cells
are clipped linearly. Each retained cell m contributes one entry

    g[i, j, m] = overlap(m) * (x*y + z^3) / k_m

where x, y, z are the interior-angle cosines opposite k_i, k_j and q = k_m.
The factor (x*y + z^3)/q is symmetric under i <-> j, which is what makes the
assembled transfer density antisymmetric by construction. It vanishes at the
degenerate (collinear) edges, so nodes of partially clipped cells that sit
just outside the admissible interval are handled by clamping the cosines to
[-1, 1].

Tables depend only on the grid and are cached per grid signature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import WavenumberGrid

__all__ = ["TriadTables", "build_triad_tables", "tables_for"]


@dataclass(frozen=True)
class TriadTables:
    """Ragged per-pair geometry entries in CSR-like layout.

    Pairs are enumerated row-major over i < j. ``offsets`` has length
    ``n_pairs + 1``; entries for pair p live at ``values[offsets[p]:
    offsets[p+1]]`` and correspond to consecutive q nodes starting at
    ``m_start[p]``.
    """

    n: int
    pair_i: np.ndarray   # int32 (n_pairs,)
    pair_j: np.ndarray   # int32 (n_pairs,)
    m_start: np.ndarray  # int32 (n_pairs,)
    offsets: np.ndarray  # int64 (n_pairs + 1,)
    values: np.ndarray   # float64 flat geometry entries
    flat_pair: np.ndarray  # int32, pair id of every flat entry
    flat_m: np.ndarray     # int32, q-node of every flat entry

    def __post_init__(self):
        for name in ("pair_i", "pair_j", "m_start", "offsets", "values",
                     "flat_pair", "flat_m"):
            getattr(self, name).setflags(write=False)

    def pair_index(self, i: int, j: int) -> int:
        """Pair id for i < j in the row-major enumeration."""
        if not 0 <= i < j < self.n:
            raise IndexError(f"need 0 <= i < j < {self.n}, got ({i}, {j})")
        return i * self.n - (i * (i + 1)) // 2 + (j - i - 1)


def build_triad_tables(grid: WavenumberGrid) -> TriadTables:
    k = grid.nodes
    edges = grid.cell_edges
    n = grid.n_bins
    k2 = k * k

    pair_i, pair_j, m_start = [], [], []
    counts, chunks = [], []

    for i in range(n):
        ki, ki2 = k[i], k2[i]
        for j in range(i + 1, n):
            kj, kj2 = k[j], k2[j]
            lo = max(kj - ki, edges[0])
            hi = min(kj + ki, edges[-1])
            m0 = int(np.searchsorted(edges, lo, side="right")) - 1
            m1 = int(np.searchsorted(edges, hi, side="left"))
            m0 = min(max(m0, 0), n - 1)
            m1 = min(max(m1, m0 + 1), n)

            q = k[m0:m1]
            q2 = k2[m0:m1]
            overlap = (np.minimum(edges[m0 + 1:m1 + 1], hi)
                       - np.maximum(edges[m0:m1], lo))
            np.clip(overlap, 0.0, None, out=overlap)
            x = np.clip((kj2 + q2 - ki2) / (2.0 * kj * q), -1.0, 1.0)
            y = np.clip((ki2 + q2 - kj2) / (2.0 * ki * q), -1.0, 1.0)
            z = np.clip((ki2 + kj2 - q2) / (2.0 * ki * kj), -1.0, 1.0)
            geom = (x * y + z * z * z) / q
            np.clip(geom, 0.0, None, out=geom)

            pair_i.append(i)
            pair_j.append(j)
            m_start.append(m0)
            counts.append(m1 - m0)
            chunks.append(overlap * geom)

    values = np.concatenate(chunks) if chunks else np.zeros(0)
    offsets = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    flat_pair = np.repeat(np.arange(len(counts), dtype=np.int32),
                          np.asarray(counts))
    m_start_arr = np.asarray(m_start, dtype=np.int32)
    flat_m = (np.concatenate([np.arange(c, dtype=np.int32) for c in counts])
              + np.repeat(m_start_arr, np.asarray(counts))) if counts else \
        np.zeros(0, dtype=np.int32)

    return TriadTables(
        n=n,
        pair_i=np.asarray(pair_i, dtype=np.int32),
        pair_j=np.asarray(pair_j, dtype=np.int32),
        m_start=m_start_arr,
        offsets=offsets,
        values=values,
        flat_pair=flat_pair,
        flat_m=flat_m,
    )


_CACHE: dict[tuple, TriadTables] = {}


def tables_for(grid: WavenumberGrid) -> TriadTables:
    key = (grid.k_min, grid.k_max, grid.n_bins)
    tables = _CACHE.get(key)
    if tables is None:
        tables = build_triad_tables(grid)
        _CACHE[key] = tables
    return tables
