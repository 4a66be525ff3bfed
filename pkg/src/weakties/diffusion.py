"""Push/republish information diffusion with strength-biased republishers.

One publish event per clock tick: the head of the FIFO queue publishes,
all its neighbors learn the information, and it draws ``R = k * beta``
(stochastically rounded) neighbors with replacement, each with probability
proportional to ``max(w, epsilon) ** alpha``.  A drawn neighbor joins the
queue only if it was never queued before.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .graph import Graph, bfs_rings
from .percolation import RemovalOrder
from .strength import StrengthTable

DEFAULT_EPSILON = 1e-6

# kernel return codes
_DONE = 0
_NEED_UNIFORMS = 1
_CHUNK = 1 << 14


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    t_max: int | None = None
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.t_max is not None and self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    def budget(self, node_count: int) -> int:
        """Publish events allowed; nobody can publish twice, so at most ``node_count``."""
        return node_count if self.t_max is None else min(self.t_max, node_count)


@dataclass(frozen=True, eq=False)
class MetricSeries:
    """One diffusion run.

    ``coverage[t]`` and ``f_pub[t]`` are the values after publish event
    ``T = t + 1``; ``rounds[t]`` is the cascade generation of that publisher
    (seed = 0).  ``published`` lists publishers in event order.
    """

    node_count: int
    seed_node: int
    coverage: np.ndarray
    rounds: np.ndarray
    published: np.ndarray
    known: np.ndarray
    params: ModelParams
    rng_seed: object = field(default=None)

    @property
    def events(self) -> int:
        return len(self.coverage)

    @property
    def f_pub(self) -> np.ndarray:
        return np.arange(1, self.events + 1) / self.node_count

    @property
    def final_coverage(self) -> float:
        return float(self.coverage[-1])


def republish_count(degree: int, beta: float, rng) -> int:
    """``floor(k beta)`` plus a Bernoulli draw on the fractional part."""
    return _stochastic_round(degree * beta, rng.random())


@njit
def _stochastic_round(x, u):
    r = math.floor(x)
    frac = x - r
    # k*beta products like 300*0.01 land a hair off the integer
    if frac < 1e-9 or frac > 1 - 1e-9:
        return int(round(x))
    if u < frac:
        r += 1
    return int(r)


def selection_weights(graph: Graph, table: StrengthTable, i: int, alpha: float,
                      epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Selection probabilities over ``graph.adjacency(i)``."""
    lo, hi = graph.indptr[i], graph.indptr[i + 1]
    if hi == lo:
        raise ValueError(f"node {i} has no neighbors")
    if alpha == 0:
        return np.full(hi - lo, 1.0 / (hi - lo))
    w = _powered(table.strength[graph.entry_edge[lo:hi]], alpha, epsilon)
    return w / w.sum()


def _powered(w, alpha, epsilon):
    return np.maximum(w, epsilon) ** alpha


@dataclass(frozen=True, eq=False)
class SelectionTable:
    """Per-row cumulative selection probabilities aligned with ``graph.indices``.

    ``cumulative`` is ``None`` for ``alpha == 0``, where draws are uniform and
    strengths are never read.
    """

    alpha: float
    epsilon: float
    cumulative: np.ndarray | None


def selection_table(graph: Graph, table: StrengthTable | None, alpha: float,
                    epsilon: float = DEFAULT_EPSILON) -> SelectionTable:
    if alpha == 0:
        return SelectionTable(0.0, epsilon, None)
    if table is None:
        raise ValueError("a strength table is required for alpha != 0")
    w = _powered(table.strength[graph.entry_edge], alpha, epsilon)
    deg = graph.degrees
    row = np.repeat(np.arange(graph.node_count), deg)
    running = np.concatenate([[0.0], np.cumsum(w)])
    before = running[graph.indptr[:-1]]
    row_sum = running[graph.indptr[1:]] - before
    cum = (running[1:] - before[row]) / row_sum[row]
    cum[graph.indptr[1:][deg > 0] - 1] = 1.0
    return SelectionTable(float(alpha), epsilon, cum)


@njit
def _pick(indptr, indices, cumulative, uniform, i, u):
    lo = indptr[i]
    k = indptr[i + 1] - lo
    if uniform:
        off = int(u * k)
        if off >= k:
            off = k - 1
    else:
        off = np.searchsorted(cumulative[lo:lo + k], u, side="right")
        if off >= k:
            off = k - 1
    return indices[lo + off]


@njit
def _sample_kernel(indptr, indices, cumulative, uniform, i, draws):
    out = np.empty(draws.shape[0], dtype=np.int64)
    for t in range(draws.shape[0]):
        out[t] = _pick(indptr, indices, cumulative, uniform, i, draws[t])
    return out


def sample_neighbors(graph: Graph, sel: SelectionTable, i: int, size: int, rng) -> np.ndarray:
    """Draw ``size`` republisher candidates for node ``i`` through the simulation path."""
    if graph.indptr[i + 1] == graph.indptr[i]:
        raise ValueError(f"node {i} has no neighbors")
    return _sample_kernel(graph.indptr, graph.indices, _cum_or_dummy(sel), sel.cumulative is None,
                          int(i), rng.random(size))


def _cum_or_dummy(sel: SelectionTable) -> np.ndarray:
    return sel.cumulative if sel.cumulative is not None else np.zeros(1)


@njit
def _diffusion_kernel(indptr, indices, cumulative, uniform, beta, t_cap, n,
                      known, queued, queue, gen, coverage, tick_round, state, buf, pos):
    head = state[0]
    tail = state[1]
    t = state[2]
    n_known = state[3]
    status = 0
    while head < tail and t < t_cap and n_known < n:
        i = queue[head]
        lo = indptr[i]
        hi = indptr[i + 1]
        k = hi - lo
        if buf.shape[0] - pos < k + 1:
            status = 1
            break
        head += 1
        for e in range(lo, hi):
            j = indices[e]
            if known[j] == 0:
                known[j] = 1
                n_known += 1
        coverage[t] = n_known
        tick_round[t] = gen[i]
        t += 1
        r = _stochastic_round(k * beta, buf[pos])
        pos += 1
        for _ in range(r):
            j = _pick(indptr, indices, cumulative, uniform, i, buf[pos])
            pos += 1
            if queued[j] == 0:
                queued[j] = 1
                queue[tail] = j
                gen[j] = gen[i] + 1
                tail += 1
    state[0] = head
    state[1] = tail
    state[2] = t
    state[3] = n_known
    return status, pos


def run_diffusion(graph: Graph, table: StrengthTable | None, params: ModelParams,
                  seed_node="random", rng_seed=None, selection: SelectionTable | None = None) -> MetricSeries:
    """Simulate one cascade.

    ``seed_node="random"`` draws the seed uniformly over all nodes from the
    run's generator before any other draw.  Pass a prebuilt ``selection`` to
    reuse it across runs.
    """
    n = graph.node_count
    if n == 0:
        raise ValueError("empty graph")
    rng = np.random.default_rng(rng_seed)
    if isinstance(seed_node, str):
        if seed_node != "random":
            raise ValueError(f"seed node must be a node id or 'random', got {seed_node!r}")
        seed_node = int(rng.integers(n))
    seed_node = int(seed_node)
    graph._check_node(seed_node)
    if selection is None:
        selection = selection_table(graph, table, params.alpha, params.epsilon)
    elif selection.alpha != params.alpha:
        raise ValueError("selection table built for a different alpha")

    t_cap = params.budget(n)
    known = np.zeros(n, dtype=np.uint8)
    queued = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    gen = np.zeros(n, dtype=np.int64)
    coverage = np.zeros(t_cap, dtype=np.int64)
    tick_round = np.zeros(t_cap, dtype=np.int64)
    known[seed_node] = 1
    queued[seed_node] = 1
    queue[0] = seed_node
    state = np.array([0, 1, 0, 1], dtype=np.int64)

    cum = _cum_or_dummy(selection)
    uniform = selection.cumulative is None
    buf = rng.random(_CHUNK)
    pos = 0
    max_need = int(graph.degrees.max()) + 1 if graph.edge_count else 1
    while True:
        status, pos = _diffusion_kernel(graph.indptr, graph.indices, cum, uniform, float(params.beta),
                                        t_cap, n, known, queued, queue, gen, coverage, tick_round,
                                        state, buf, pos)
        if status == _DONE:
            break
        buf = np.concatenate([buf[pos:], rng.random(max(_CHUNK, max_need))])
        pos = 0

    t = int(state[2])
    return MetricSeries(
        node_count=n,
        seed_node=seed_node,
        coverage=coverage[:t] / n,
        rounds=tick_round[:t],
        published=queue[:t].copy(),
        known=known.astype(bool),
        params=params,
        rng_seed=rng_seed,
    )


def replication_seed(base_seed: int, index: int, *salt: int) -> list[int]:
    """Entropy for replication ``index``: ``[base_seed, index, *salt]`` fed to
    ``numpy.random.SeedSequence``.  Streams for earlier indices never depend on
    how many replications run."""
    return [int(base_seed), int(index), *map(int, salt)]


def _param_salt(params: ModelParams) -> list[int]:
    a = np.float64(params.alpha).view(np.uint64)
    b = np.float64(params.beta).view(np.uint64)
    return [int(a), int(b)]


def run_replications(graph: Graph, table: StrengthTable | None, params: ModelParams, runs: int,
                     base_seed: int = 0, threads: int = 1, seed_node="random",
                     paired_seeds: bool = True) -> list[MetricSeries]:
    """Independent runs, returned in replication order regardless of ``threads``.

    With ``paired_seeds`` the random seed node of replication ``r`` depends
    only on ``(base_seed, r)``, so different ``alpha``/``beta`` settings start
    from the same nodes.  Otherwise the parameters are mixed into the stream.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    sel = selection_table(graph, table, params.alpha, params.epsilon)
    salt = [] if paired_seeds else _param_salt(params)

    def one(r: int) -> MetricSeries:
        return run_diffusion(graph, table, params, seed_node, replication_seed(base_seed, r, *salt), sel)

    if threads <= 1:
        return [one(r) for r in range(runs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(runs)))


# --------------------------------------------------------------------------
# Hop profiles


@dataclass(frozen=True, eq=False)
class LocalProfile:
    """Per-hop counts; ``f_local = published / ring_size``.

    ``known`` counts sigma-1 nodes in each ring, for the alternative
    denominator.
    """

    ring_size: np.ndarray
    published: np.ndarray
    known: np.ndarray

    @property
    def hops(self) -> np.ndarray:
        return np.arange(len(self.ring_size))

    @property
    def f_local(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.ring_size > 0, self.published / np.maximum(self.ring_size, 1), np.nan)

    def __add__(self, other: "LocalProfile") -> "LocalProfile":
        h = max(len(self.ring_size), len(other.ring_size))
        pad = lambda a: np.pad(a, (0, h - len(a)))  # noqa: E731
        return LocalProfile(pad(self.ring_size) + pad(other.ring_size),
                            pad(self.published) + pad(other.published),
                            pad(self.known) + pad(other.known))


def f_local_profile(graph: Graph, run: MetricSeries, rings: np.ndarray | None = None) -> LocalProfile:
    """Published fraction per BFS hop from the run's seed.

    ``rings`` must come from ``bfs_rings`` on the same graph and seed; it is
    computed when omitted.
    """
    if rings is None:
        rings = bfs_rings(graph, run.seed_node)
    if rings[run.seed_node] != 0:
        raise ValueError("rings were not computed from this run's seed node")
    reach = rings >= 0
    h = int(rings.max()) + 1
    ring_size = np.bincount(rings[reach], minlength=h)
    pub = np.bincount(rings[run.published], minlength=h)
    known = np.bincount(rings[run.known & reach], minlength=h)
    return LocalProfile(ring_size, pub, known)


def pool_profiles(profiles) -> LocalProfile:
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to pool")
    total = profiles[0]
    for p in profiles[1:]:
        total = total + p
    return total


# --------------------------------------------------------------------------
# Removal then diffusion


@dataclass(frozen=True)
class RemovalDiffusionPoint:
    f_r: float
    direction: str
    mean_coverage: float
    stderr_coverage: float
    runs: int


def mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def remove_then_diffuse(graph: Graph, table: StrengthTable, order: RemovalOrder, f_r: float,
                        params: ModelParams, replications: int, base_seed: int = 0,
                        threads: int = 1) -> RemovalDiffusionPoint:
    """Mean and standard error of final coverage after removing ``f_r`` of the ties.

    Surviving edges keep the strengths computed on the intact graph.
    """
    if params.t_max is None:
        raise ValueError("remove_then_diffuse needs a finite t_max")
    keep = order.surviving_mask(f_r)
    sub = graph.edge_subgraph(keep)
    sub_table = table.restrict(keep)
    runs = run_replications(sub, sub_table, params, replications, base_seed, threads)
    mean, se = mean_stderr([r.final_coverage for r in runs])
    return RemovalDiffusionPoint(float(f_r), order.direction, mean, se, replications)
