from fractions import Fraction

import numpy as np
import pytest

from conftest import random_graph
from oracles import naive_sbar_fgcc
from weakties import (Graph, all_strengths, connected_components, critical_fraction,
                      generate_community_graph, percolation_sweep, removal_order, s_bar)
from weakties.graph import ComponentLabeling
from weakties.percolation import fraction_grid, removed_count
from weakties.strength import StrengthTable


def table(values):
    values = np.asarray(values, dtype=float)
    m = len(values)
    return StrengthTable(np.zeros(m, int), np.ones(m, int), values, np.zeros(m, bool))


def labeling(sizes):
    sizes = np.asarray(sizes)
    return ComponentLabeling(np.repeat(np.arange(len(sizes)), sizes), sizes)


def test_removal_order_sorts():
    t = table([0.2, 0.9, 0.5])
    assert removal_order(t, "weak", 0).permutation.tolist() == [0, 2, 1]
    assert removal_order(t, "strong", 0).permutation.tolist() == [1, 2, 0]


def test_removal_order_ties_seeded():
    t = table(np.zeros(30))
    a = removal_order(t, "weak", 1).permutation
    assert np.array_equal(a, removal_order(t, "weak", 1).permutation)
    assert not np.array_equal(a, removal_order(t, "weak", 2).permutation)
    assert sorted(a.tolist()) == list(range(30))


def test_removal_order_invariants():
    rng = np.random.default_rng(0)
    t = table(rng.integers(0, 5, 200) / 4)
    weak = removal_order(t, "weak", 3)
    strong = removal_order(t, "strong", 3)
    assert np.all(np.diff(t.strength[weak.permutation]) >= 0)
    assert np.all(np.diff(t.strength[strong.permutation]) <= 0)
    distinct = table(rng.permutation(100) / 100)
    assert np.array_equal(removal_order(distinct, "weak", 0).permutation[::-1],
                          removal_order(distinct, "strong", 5).permutation)
    with pytest.raises(ValueError):
        removal_order(t, "random")


def test_s_bar_examples():
    assert s_bar(labeling([5, 3, 2]), 10) == pytest.approx(1.3)
    assert s_bar(labeling([7]), 7) == 0
    assert s_bar(labeling([2, 2]), 4) == 1.0


def test_removed_count():
    assert removed_count(0.29, 100) == 29
    assert removed_count(0.5, 3) == 1
    assert removed_count(1.0, 7) == 7
    with pytest.raises(ValueError):
        removed_count(1.2, 5)


def test_path_sweep():
    g = Graph.from_edges([(0, 1), (1, 2)])
    sw = percolation_sweep(g, removal_order(all_strengths(g), "weak", 0), [0, 0.5, 1])
    assert sw.f_gcc.tolist() == pytest.approx([1, 2 / 3, 1 / 3])
    assert sw.s_bar.tolist() == pytest.approx([0, 1 / 3, 2 / 3])
    assert sw.n_components.tolist() == [1, 2, 3]


def test_bridge_removed_first(two_triangles):
    t = all_strengths(two_triangles)
    order = removal_order(t, "weak", 0)
    assert order.permutation[0] == two_triangles.edge_index(2, 3)
    sw = percolation_sweep(two_triangles, order, [0, 1 / 7])
    assert sw.f_gcc.tolist() == [1.0, 0.5]


def two_triangle_family(k):
    """Two K_k cliques joined by a single bridge."""
    a = [(i, j) for i in range(k) for j in range(i + 1, k)]
    b = [(i + k, j + k) for i, j in a]
    return Graph.from_edges(a + b + [(0, k)])


@pytest.mark.parametrize("k", [3, 4, 6])
def test_weak_disconnects_before_strong(k):
    g = two_triangle_family(k)
    t = all_strengths(g)
    grid = fraction_grid(1 / (4 * g.edge_count))
    first = {}
    for d in ("weak", "strong"):
        sw = percolation_sweep(g, removal_order(t, d, 0), grid)
        first[d] = sw.f_r[np.argmax(sw.n_components > 1)]
    assert first["weak"] < first["strong"]


def test_connected_start():
    g = generate_community_graph(5, 8, 0.7, 6, seed=0)
    sw = percolation_sweep(g, removal_order(all_strengths(g), "strong", 0), [0, 0.5])
    assert (sw.s_bar[0], sw.f_gcc[0]) == (0, 1)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("direction", ["weak", "strong"])
def test_sweep_matches_naive(seed, direction):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(20, 300))
    g = random_graph(rng, n, float(rng.uniform(1, 6)) / n)
    order = removal_order(all_strengths(g), direction, seed)
    grid = fraction_grid(0.05)
    sw = percolation_sweep(g, order, grid)
    edges = g.edges.tolist()
    for f, sb, fg in zip(grid, sw.s_bar, sw.f_gcc):
        ref_sb, ref_fg = naive_sbar_fgcc(edges, n, order.removed(f).tolist())
        assert sb == float(ref_sb) and fg == float(ref_fg)
    assert np.all(np.diff(sw.f_gcc) <= 0)
    assert np.all(np.diff(sw.n_components) >= 0)


def test_sweep_samples_equal_s_bar_of_labeling():
    g = generate_community_graph(6, 6, 0.6, 8, seed=3)
    order = removal_order(all_strengths(g), "weak", 0)
    grid = fraction_grid(0.1)
    sw = percolation_sweep(g, order, grid)
    for f, sb in zip(grid, sw.s_bar):
        lab = connected_components(g.edge_subgraph(order.surviving_mask(f)))
        assert sb == s_bar(lab, g.node_count)


def test_critical_fraction():
    assert critical_fraction([0, 0.3, 0.6, 0.9], [0, 0.1, 0.9, 0.2], [1, 1, 1, 1])[0] == 0.6
    assert critical_fraction([0, 0.5, 1.0], [0, 1, 1], [1, 0.5, 0.04], 0.05) == (0.5, 1.0)
    assert critical_fraction([0, 0.5], [0, 0], [1, 0.9])[1] is None


def test_sweep_rejects_unsorted_grid(two_triangles):
    order = removal_order(all_strengths(two_triangles), "weak", 0)
    with pytest.raises(ValueError):
        percolation_sweep(two_triangles, order, [0.5, 0.2])


def test_fraction_grid():
    g = fraction_grid(0.05)
    assert len(g) == 21 and g[0] == 0 and g[-1] == 1
    assert fraction_grid(0.2, 0.0, 0.8).tolist() == [0, 0.2, 0.4, 0.6, 0.8]


def test_s_bar_is_exact_rational():
    sizes = [4, 4, 3, 1]
    assert Fraction(s_bar(labeling(sizes), 12)).limit_denominator(12) == Fraction(16 + 9 + 1, 12)
