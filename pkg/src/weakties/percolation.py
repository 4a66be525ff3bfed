"""Strength-ordered edge removal and cluster statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .graph import ComponentLabeling, Graph
from .strength import StrengthTable

WEAK_FIRST = "weak"
STRONG_FIRST = "strong"
DEFAULT_COLLAPSE_THRESHOLD = 0.01


@dataclass(frozen=True, eq=False)
class RemovalOrder:
    direction: str
    permutation: np.ndarray
    seed: int | None

    def removed(self, f_r: float) -> np.ndarray:
        """Edge ids removed at fraction ``f_r``."""
        return self.permutation[:removed_count(f_r, len(self.permutation))]

    def surviving_mask(self, f_r: float) -> np.ndarray:
        keep = np.ones(len(self.permutation), dtype=bool)
        keep[self.removed(f_r)] = False
        return keep


def removed_count(f_r: float, edge_count: int) -> int:
    """``floor(f_r * |E|)``, tolerant of float noise in grid values like 0.29."""
    if not 0.0 <= f_r <= 1.0:
        raise ValueError(f"removal fraction {f_r} outside [0, 1]")
    return min(edge_count, int(np.floor(f_r * edge_count + 1e-9)))


def removal_order(table: StrengthTable, direction: str = WEAK_FIRST, seed=None) -> RemovalOrder:
    """Sort edges by strength; runs of equal strength are shuffled with ``seed``."""
    if direction not in (WEAK_FIRST, STRONG_FIRST):
        raise ValueError(f"direction must be {WEAK_FIRST!r} or {STRONG_FIRST!r}, got {direction!r}")
    m = len(table)
    if m == 0:
        raise ValueError("removal order of an empty edge set")
    tiebreak = np.random.default_rng(seed).permutation(m)
    key = table.strength if direction == WEAK_FIRST else -table.strength
    perm = np.lexsort((tiebreak, key)).astype(np.int64)
    perm.setflags(write=False)
    return RemovalOrder(direction, perm, seed)


def s_bar(labeling: ComponentLabeling, n_total: int) -> float:
    """Mean-square size of all clusters except one largest, over ``n_total``.

    When several clusters share the maximum size only one of them is dropped.
    """
    sizes = labeling.sizes.astype(np.int64)
    if len(sizes) == 0:
        return 0.0
    smax = int(sizes.max())
    return float(int(np.sum(sizes * sizes)) - smax * smax) / n_total


@dataclass(frozen=True, eq=False)
class PercolationSweep:
    f_r: np.ndarray
    s_bar: np.ndarray
    f_gcc: np.ndarray
    n_components: np.ndarray
    direction: str
    seed: int | None
    collapse_threshold: float
    f_c_sbar: float
    f_c_gcc: float | None


@njit
def _sweep_kernel(n, eu, ev, perm, counts_desc):
    # insert edges in reverse removal order; snapshot at each removal count
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    k = counts_desc.shape[0]
    out_max = np.zeros(k, dtype=np.int64)
    out_sq = np.zeros(k, dtype=np.int64)
    out_nc = np.zeros(k, dtype=np.int64)
    smax = 1 if n > 0 else 0
    sumsq = n
    ncomp = n
    m = perm.shape[0]
    pos = m
    for s in range(k):
        target = counts_desc[s]
        while pos > target:
            pos -= 1
            e = perm[pos]
            a = eu[e]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = ev[e]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            sa = size[a]
            sb = size[b]
            parent[b] = a
            size[a] = sa + sb
            sumsq += 2 * sa * sb
            ncomp -= 1
            if sa + sb > smax:
                smax = sa + sb
        out_max[s] = smax
        out_sq[s] = sumsq
        out_nc[s] = ncomp
    return out_max, out_sq, out_nc


def percolation_sweep(graph: Graph, order: RemovalOrder, grid,
                      collapse_threshold: float = DEFAULT_COLLAPSE_THRESHOLD) -> PercolationSweep:
    """Remove the first ``floor(f_r |E|)`` edges of ``order`` for each grid point.

    Samples are computed by inserting edges in reverse order into a
    union-find, which gives the same values as deleting them forward.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if len(grid) == 0:
        raise ValueError("empty fraction grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("fraction grid must be strictly increasing")
    m = graph.edge_count
    counts = np.array([removed_count(f, m) for f in grid], dtype=np.int64)
    rev = np.argsort(-counts, kind="stable")
    smax, sumsq, ncomp = _sweep_kernel(graph.node_count, graph.edges[:, 0], graph.edges[:, 1],
                                       order.permutation, counts[rev])
    inv = np.empty_like(rev)
    inv[rev] = np.arange(len(rev))
    smax, sumsq, ncomp = smax[inv], sumsq[inv], ncomp[inv]
    n = graph.node_count
    sbar = (sumsq - smax * smax) / n
    fgcc = smax / n
    f_c_sbar, f_c_gcc = critical_fraction(grid, sbar, fgcc, collapse_threshold)
    return PercolationSweep(grid, sbar, fgcc, ncomp, order.direction, order.seed,
                            collapse_threshold, f_c_sbar, f_c_gcc)


def critical_fraction(f_r, s_bar_series, f_gcc_series,
                      collapse_threshold: float = DEFAULT_COLLAPSE_THRESHOLD):
    """``(f_c_sbar, f_c_gcc)``: argmax of S-bar (first on ties) and the first
    grid point with ``f_gcc <= collapse_threshold`` (``None`` if never)."""
    f_r = np.asarray(f_r, dtype=np.float64)
    if len(f_r) == 0:
        raise ValueError("empty sweep")
    f_c_sbar = float(f_r[int(np.argmax(s_bar_series))])
    below = np.flatnonzero(np.asarray(f_gcc_series) <= collapse_threshold)
    f_c_gcc = float(f_r[below[0]]) if len(below) else None
    return f_c_sbar, f_c_gcc


def fraction_grid(step: float, start: float = 0.0, stop: float = 1.0) -> np.ndarray:
    """Inclusive grid ``start, start+step, ..., stop`` rounded to kill float drift."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9))
    grid = np.round(start + step * np.arange(count + 1), 12)
    return grid[(grid >= 0) & (grid <= 1)]
