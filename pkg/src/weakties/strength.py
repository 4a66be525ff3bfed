"""Neighborhood-overlap tie strength.

For an edge ``(i, j)`` with ``c`` common neighbors,
``w = c / (k_i - 1 + k_j - 1 - c)``.  An isolated dyad (both degrees 1) has a
zero denominator; it gets ``w = 0`` and is flagged degenerate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from ._accel import USE_NUMBA, njit
from .graph import Graph, gather_neighbors


@dataclass(frozen=True, eq=False)
class StrengthTable:
    """Per-edge strengths aligned with ``graph.edges``."""

    common: np.ndarray
    denominator: np.ndarray
    strength: np.ndarray
    degenerate: np.ndarray

    def __len__(self) -> int:
        return len(self.strength)

    def restrict(self, keep) -> "StrengthTable":
        """Rows for a subset of edge ids, in edge-id order."""
        keep = np.asarray(keep)
        if keep.dtype != bool:
            keep = np.unique(keep)
        return StrengthTable(self.common[keep], self.denominator[keep],
                             self.strength[keep], self.degenerate[keep])


class EdgeStrength(NamedTuple):
    strength: float
    common: int
    degenerate: bool


def _ratio(common, denominator):
    common = np.asarray(common, dtype=np.int64)
    denominator = np.asarray(denominator, dtype=np.int64)
    degenerate = denominator == 0
    w = np.zeros(common.shape, dtype=np.float64)
    np.divide(common, denominator, out=w, where=~degenerate)
    return w, degenerate


def edge_strength(graph: Graph, u: int, v: int) -> EdgeStrength:
    """Strength of a single edge; raises ``ValueError`` if ``(u, v)`` is not an edge."""
    graph.edge_index(u, v)
    c = len(np.intersect1d(graph.adjacency(u), graph.adjacency(v), assume_unique=True))
    deg = graph.degrees
    denom = int(deg[u]) + int(deg[v]) - 2 - c
    if denom == 0:
        return EdgeStrength(0.0, c, True)
    return EdgeStrength(c / denom, c, False)


@njit
def _common_kernel(indptr, indices, eu, ev):
    m = eu.shape[0]
    out = np.zeros(m, dtype=np.int64)
    for e in range(m):
        a, a_end = indptr[eu[e]], indptr[eu[e] + 1]
        b, b_end = indptr[ev[e]], indptr[ev[e] + 1]
        c = 0
        while a < a_end and b < b_end:
            x = indices[a]
            y = indices[b]
            if x == y:
                c += 1
                a += 1
                b += 1
            elif x < y:
                a += 1
            else:
                b += 1
        out[e] = c
    return out


def _common_numpy(graph: Graph, chunk: int = 1 << 22) -> np.ndarray:
    # membership test of (b, w) for every neighbor w of the lower-degree endpoint a
    n = max(graph.node_count, 1)
    deg = graph.degrees
    src = np.repeat(np.arange(graph.node_count, dtype=np.int64), deg)
    keys = src * n + graph.indices
    eu, ev = graph.edges[:, 0], graph.edges[:, 1]
    swap = deg[eu] > deg[ev]
    a = np.where(swap, ev, eu)
    b = np.where(swap, eu, ev)
    out = np.zeros(len(eu), dtype=np.int64)
    load = np.cumsum(deg[a])
    start = 0
    while start < len(eu):
        stop = int(np.searchsorted(load, (load[start - 1] if start else 0) + chunk, side="right"))
        stop = max(stop, start + 1)
        aa, bb = a[start:stop], b[start:stop]
        counts = deg[aa]
        nbrs = gather_neighbors(graph, aa)
        q = np.repeat(bb, counts) * n + nbrs
        pos = np.searchsorted(keys, q)
        hit = keys[np.minimum(pos, len(keys) - 1)] == q
        owner = np.repeat(np.arange(stop - start), counts)
        out[start:stop] = np.bincount(owner, weights=hit, minlength=stop - start).astype(np.int64)
        start = stop
    return out


def common_neighbor_counts(graph: Graph) -> np.ndarray:
    if graph.edge_count == 0:
        return np.zeros(0, dtype=np.int64)
    if USE_NUMBA:
        return _common_kernel(graph.indptr, graph.indices, graph.edges[:, 0], graph.edges[:, 1])
    return _common_numpy(graph)


def all_strengths(graph: Graph) -> StrengthTable:
    common = common_neighbor_counts(graph)
    deg = graph.degrees
    denom = deg[graph.edges[:, 0]] + deg[graph.edges[:, 1]] - 2 - common
    w, degenerate = _ratio(common, denom)
    return StrengthTable(common, denom, w, degenerate)


def strength_cdf(table: StrengthTable, grid) -> np.ndarray:
    """Fraction of edges with strength ``<= t`` for each threshold ``t`` in ``grid``."""
    grid = np.asarray(grid, dtype=np.float64)
    if len(table) == 0:
        raise ValueError("strength CDF of an empty edge set")
    if np.any(np.diff(grid) < 0):
        raise ValueError("CDF grid must be sorted ascending")
    w = np.sort(table.strength)
    return np.searchsorted(w, grid, side="right") / len(w)


def neighbor_observations(graph: Graph, table: StrengthTable):
    """``(k_j, w_ij)`` for every directed neighbor pair ``i -> j``."""
    return graph.degrees[graph.indices], table.strength[graph.entry_edge]


def degree_strength_correlation(graph: Graph, table: StrengthTable) -> float | None:
    """Kendall tau-b between neighbor degree and tie strength.

    Every directed neighbor pair ``i -> j`` contributes ``(k_j, w_ij)``.
    Returns ``None`` when either variable is constant.
    """
    if graph.edge_count < 2:
        raise ValueError("correlation needs at least two edges")
    k, w = neighbor_observations(graph, table)
    if np.all(k == k[0]) or np.all(w == w[0]):
        return None
    return float(stats.kendalltau(k, w).statistic)
