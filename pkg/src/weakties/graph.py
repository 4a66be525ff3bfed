"""Undirected simple graphs in CSR form, edge-list ingestion and generators."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._accel import USE_NUMBA, njit
from .errors import ConfigError, DataError, WeakTiesError

log = logging.getLogger(__name__)

UNREACHABLE = -1


@dataclass(frozen=True)
class IdMap:
    """Bijection between raw input ids and dense ids ``0..n-1``.

    ``raw_ids[d]`` is the raw id of dense node ``d``; raw ids are sorted, so
    dense ids follow raw-id order.
    """

    raw_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.raw_ids)

    def to_raw(self, dense):
        return self.raw_ids[dense]

    def to_dense(self, raw):
        raw = np.asarray(raw, dtype=np.int64)
        pos = np.searchsorted(self.raw_ids, raw)
        ok = (pos < len(self.raw_ids)) & (self.raw_ids[np.minimum(pos, len(self.raw_ids) - 1)] == raw)
        if not np.all(ok):
            raise KeyError(f"raw id(s) not in graph: {np.atleast_1d(raw)[~np.atleast_1d(ok)][:5].tolist()}")
        return pos

    @classmethod
    def identity(cls, n: int) -> "IdMap":
        return cls(np.arange(n, dtype=np.int64))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``edges`` holds canonical ``(u, v)`` pairs with ``u < v`` in lexicographic
    order; edge ids are row indices into it.  Adjacency is CSR: the neighbors
    of ``u`` are ``indices[indptr[u]:indptr[u+1]]`` sorted ascending, and
    ``entry_edge`` gives the edge id of every CSR entry.
    """

    node_count: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    entry_edge: np.ndarray
    id_map: IdMap = field(default=None)

    @classmethod
    def from_edges(cls, pairs, node_count: int | None = None, id_map: IdMap | None = None) -> "Graph":
        """Build a graph from dense-id pairs, dropping self-loops and duplicates."""
        graph, _, _ = _canonical_graph(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), node_count, id_map)
        return graph

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        try:
            self.edge_index(u, v)
        except ValueError:
            return False
        return True

    def edge_index(self, u: int, v: int) -> int:
        self._check_node(u)
        self._check_node(v)
        row = self.adjacency(u)
        pos = int(np.searchsorted(row, v))
        if pos >= len(row) or row[pos] != v:
            raise ValueError(f"({u}, {v}) is not an edge")
        return int(self.entry_edge[self.indptr[u] + pos])

    def edge_subgraph(self, keep) -> "Graph":
        """Graph on the same node set keeping only the selected edge ids.

        ``keep`` is a boolean mask or an index array over edge ids.  Edge order
        is preserved, so ``result.edges == self.edges[keep]``.
        """
        keep = np.asarray(keep)
        if keep.dtype == bool:
            keep = np.flatnonzero(keep)
        else:
            keep = np.unique(keep)
        return _from_canonical(self.edges[keep], self.node_count, self.id_map)

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.node_count:
            raise ValueError(f"node id {u} out of range 0..{self.node_count - 1}")

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


def _from_canonical(edges: np.ndarray, n: int, id_map: IdMap | None) -> Graph:
    m = len(edges)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(m), np.arange(m)])
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(
        node_count=int(n),
        edges=_readonly(np.ascontiguousarray(edges, dtype=np.int64)),
        indptr=_readonly(indptr),
        indices=_readonly(dst[order].astype(np.int64)),
        entry_edge=_readonly(eid[order].astype(np.int64)),
        id_map=id_map if id_map is not None else IdMap.identity(n),
    )


def _canonical_graph(pairs: np.ndarray, node_count: int | None, id_map: IdMap | None):
    """Returns (graph, self_loops, duplicates)."""
    if len(pairs) and pairs.min() < 0:
        raise DataError("node ids must be non-negative")
    n = int(node_count) if node_count is not None else (int(pairs.max()) + 1 if len(pairs) else 0)
    if len(pairs) and pairs.max() >= n:
        raise DataError(f"node id {int(pairs.max())} out of range for node_count={n}")
    loops = pairs[:, 0] == pairs[:, 1]
    pairs = pairs[~loops]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * max(n, 1) + hi)
    edges = np.column_stack([keys // max(n, 1), keys % max(n, 1)]) if len(keys) else np.zeros((0, 2), np.int64)
    return _from_canonical(edges, n, id_map), int(loops.sum()), int(len(pairs) - len(keys))


# --------------------------------------------------------------------------
# Edge-list files


@dataclass(frozen=True)
class LoadStats:
    lines: int
    comment_lines: int
    edge_lines: int
    self_loops: int
    duplicates: int


class EdgeList(NamedTuple):
    graph: Graph
    id_map: IdMap
    stats: LoadStats


def load_edge_list(path, comment: str = "#", delimiter: str | None = None) -> EdgeList:
    """Read a whitespace (or ``delimiter``) separated edge list.

    Self-loops are dropped and duplicate or reversed pairs merged, with a
    logged warning.  Raw ids are densified to ``0..n-1`` in ascending raw-id
    order.
    """
    path = Path(path)
    us: list[int] = []
    vs: list[int] = []
    n_lines = n_comments = 0
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            n_lines += 1
            s = line.strip()
            if not s or (comment and s.startswith(comment)):
                n_comments += 1
                continue
            tok = s.split(delimiter)
            if len(tok) != 2:
                raise DataError(f"{path}:{lineno}: expected two node ids, got {len(tok)} token(s)")
            try:
                u, v = int(tok[0]), int(tok[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer node id in {s!r}") from None
            if u < 0 or v < 0:
                raise DataError(f"{path}:{lineno}: negative node id in {s!r}")
            us.append(u)
            vs.append(v)
    if not us:
        raise DataError(f"{path}: no edges found")

    raw = np.column_stack([np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64)])
    raw_ids, dense = np.unique(raw, return_inverse=True)
    id_map = IdMap(_readonly(raw_ids))
    graph, loops, dups = _canonical_graph(dense.reshape(-1, 2), len(raw_ids), id_map)
    if graph.edge_count == 0:
        raise DataError(f"{path}: graph is empty after dropping self-loops")
    if loops or dups:
        log.warning("%s: dropped %d self-loop(s), merged %d duplicate edge(s)", path, loops, dups)
    stats = LoadStats(n_lines, n_comments, len(us), loops, dups)
    return EdgeList(graph, id_map, stats)


def write_edge_list(graph: Graph, path, raw_ids: bool = True) -> None:
    """Write canonical edges, one ``u v`` pair per line, using raw ids by default."""
    edges = graph.id_map.to_raw(graph.edges) if raw_ids else graph.edges
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes: {graph.node_count} edges: {graph.edge_count}\n")
        for u, v in edges.tolist():
            fh.write(f"{u} {v}\n")


# --------------------------------------------------------------------------
# Components and BFS


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """Connected components.  Component ids are ordered by smallest member."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def largest(self) -> int:
        return int(self.sizes.max()) if len(self.sizes) else 0


@njit
def _components_kernel(indptr, indices, n):
    labels = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    ncomp = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = ncomp
        top = 0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if labels[v] < 0:
                    labels[v] = ncomp
                    stack[top] = v
                    top += 1
        ncomp += 1
    return labels


def _components_numpy(graph: Graph) -> np.ndarray:
    # min-label propagation with pointer jumping
    n = graph.node_count
    labels = np.arange(n, dtype=np.int64)
    eu, ev = graph.edges[:, 0], graph.edges[:, 1]
    while True:
        new = labels.copy()
        np.minimum.at(new, eu, labels[ev])
        np.minimum.at(new, ev, labels[eu])
        while True:
            jumped = new[new]
            if np.array_equal(jumped, new):
                break
            new = jumped
        if np.array_equal(new, labels):
            break
        labels = new
    _, canon = np.unique(labels, return_inverse=True)
    return canon.astype(np.int64)


def connected_components(graph: Graph) -> ComponentLabeling:
    if USE_NUMBA:
        labels = _components_kernel(graph.indptr, graph.indices, graph.node_count)
    else:
        labels = _components_numpy(graph)
    sizes = np.bincount(labels, minlength=labels.max() + 1 if len(labels) else 0)
    return ComponentLabeling(_readonly(labels), _readonly(sizes.astype(np.int64)))


@njit
def _bfs_kernel(indptr, indices, n, source):
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1
    return dist


def gather_neighbors(graph: Graph, nodes: np.ndarray) -> np.ndarray:
    """Concatenated adjacency rows of ``nodes`` (with repeats)."""
    starts = graph.indptr[nodes]
    counts = graph.indptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
    return graph.indices[offsets + np.arange(total)]


def _bfs_numpy(graph: Graph, source: int) -> np.ndarray:
    dist = np.full(graph.node_count, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    hop = 0
    while frontier.size:
        hop += 1
        nb = gather_neighbors(graph, frontier)
        nb = np.unique(nb[dist[nb] < 0])
        dist[nb] = hop
        frontier = nb
    return dist


def bfs_rings(graph: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every node; unreachable nodes get -1."""
    graph._check_node(source)
    if USE_NUMBA:
        return _bfs_kernel(graph.indptr, graph.indices, graph.node_count, int(source))
    return _bfs_numpy(graph, int(source))


def ring_sizes(dist: np.ndarray) -> np.ndarray:
    reach = dist[dist >= 0]
    return np.bincount(reach)


# --------------------------------------------------------------------------
# Generators


def generate_scale_free(n: int, m: int, seed=None) -> Graph:
    """Preferential-attachment graph grown from an ``(m+1)``-clique.

    Each new node attaches to ``m`` distinct existing nodes drawn with
    probability proportional to degree, giving
    ``m(m+1)/2 + m(n-m-1)`` edges.
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer))) or not n > m >= 1:
        raise ConfigError(f"scale-free generator needs n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    pool = [u for e in edges for u in e]
    for new in range(m + 1, n):
        chosen: list[int] = []
        while len(chosen) < m:
            t = pool[int(rng.integers(len(pool)))]
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            edges.append((t, new))
            pool.append(t)
            pool.append(new)
    return Graph.from_edges(edges, node_count=n)


def generate_community_graph(c: int, s: int, p_in: float, k_out: int, seed=None,
                             max_retries: int = 100) -> Graph:
    """Dense random blocks joined by ``k_out`` distinct inter-block edges.

    Node ``b*s + i`` is member ``i`` of block ``b``.  The first ``c-1``
    inter-block edges follow a random spanning tree over blocks; the rest join
    uniformly chosen block pairs.  The whole draw is repeated until the graph
    is connected.
    """
    if c < 2 or s < 3 or not 0 < p_in <= 1 or k_out < c - 1:
        raise ConfigError(f"community generator needs c>=2, s>=3, 0<p_in<=1, k_out>=c-1; "
                          f"got c={c}, s={s}, p_in={p_in}, k_out={k_out}")
    if k_out > c * (c - 1) // 2 * s * s:
        raise ConfigError(f"k_out={k_out} exceeds the number of possible inter-block edges")
    rng = np.random.default_rng(seed)
    n = c * s
    iu, ju = np.triu_indices(s, 1)
    offsets = (np.arange(c) * s)[:, None]
    for _ in range(max_retries):
        mask = rng.random((c, len(iu))) < p_in
        intra = np.column_stack([(offsets + iu)[mask], (offsets + ju)[mask]])
        perm = rng.permutation(c)
        inter: set[tuple[int, int]] = set()
        block_pairs = [(perm[i], perm[rng.integers(i)]) for i in range(1, c)]
        while len(inter) < k_out:
            if block_pairs:
                a, b = block_pairs.pop(0)
            else:
                a, b = rng.choice(c, 2, replace=False)
            while True:
                u = int(a * s + rng.integers(s))
                v = int(b * s + rng.integers(s))
                e = (min(u, v), max(u, v))
                if e not in inter:
                    inter.add(e)
                    break
        pairs = np.concatenate([intra, np.array(sorted(inter), dtype=np.int64)])
        graph = Graph.from_edges(pairs, node_count=n)
        if connected_components(graph).count == 1:
            return graph
    raise WeakTiesError(f"community graph not connected after {max_retries} attempts; raise p_in or k_out")
