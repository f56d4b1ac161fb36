import math

import numpy as np
import pytest

from sr_sampler.core import enumerate_distribution
from sr_sampler.errors import Disconnected, NonpositiveWeight
from sr_sampler.isotropy import build_copy_map, collapse_batch
from sr_sampler.spanning_tree import (DisjointSet, SpanningTreeModel, WeightedGraph, log_weight_tree,
                                      sample_tree, sample_tree_restricted, weighted_tree_count)
from sr_sampler.stats import estimate_tv

from conftest import complete_graph, random_graph


def test_disjoint_set():
    ds = DisjointSet(4)
    assert ds.union(0, 1) and ds.union(2, 3)
    assert not ds.union(1, 0)
    assert ds.components == 2
    assert ds.union(1, 3)
    assert ds.find(0) == ds.find(2)


def test_k4_has_sixteen_trees():
    g = complete_graph(4)
    assert weighted_tree_count(g) == pytest.approx(math.log(16), abs=1e-9)
    assert len(enumerate_distribution(SpanningTreeModel(g))) == 16


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matrix_tree_matches_enumeration(seed):
    g = random_graph(5, 4, seed)
    table = enumerate_distribution(SpanningTreeModel(g))
    assert table.log_partition == pytest.approx(weighted_tree_count(g), abs=1e-9)


def test_log_weight_tree():
    g = WeightedGraph(3, [(0, 1, 2.0), (1, 2, 3.0), (0, 2, 5.0)])
    assert log_weight_tree(g, (0, 1)) == pytest.approx(math.log(6.0))
    model = SpanningTreeModel(WeightedGraph(4, [(0, 1), (1, 2), (0, 2), (2, 3)]))
    assert model.log_weight((0, 1, 2)) == -math.inf  # triangle leaves vertex 3 out
    batch = model.log_weight_batch([[0, 1, 2], [0, 1, 3]])
    assert batch[0] == -math.inf and batch[1] == pytest.approx(0.0)


def test_graph_validation():
    with pytest.raises(Disconnected):
        WeightedGraph(4, [(0, 1), (2, 3)])
    with pytest.raises(NonpositiveWeight):
        WeightedGraph(2, [(0, 1, 0.0)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 0)])
    with pytest.raises(ValueError):
        WeightedGraph(2, [(0, 2)])


@pytest.mark.parametrize("seed", [0, 1])
def test_wilson_matches_oracle(seed):
    g = random_graph(5, 4, seed)
    rng = np.random.default_rng(seed)
    samples = np.array([sample_tree(g, rng) for _ in range(60_000)])
    assert estimate_tv(samples, enumerate_distribution(SpanningTreeModel(g))).tv <= 0.02


def test_restricted_sampling_and_disconnected_subset():
    g = random_graph(5, 4, 3)
    model = SpanningTreeModel(g)
    allowed = [0, 1, 2, 3, 4, 6]
    rng = np.random.default_rng(0)
    samples = np.array([sample_tree_restricted(g, allowed, rng) for _ in range(30_000)])
    assert set(np.unique(samples)) <= set(allowed)
    local = np.searchsorted(allowed, samples)
    assert estimate_tv(local, enumerate_distribution(model.restrict(allowed))).tv <= 0.02
    with pytest.raises(Disconnected):
        sample_tree_restricted(g, [0, 1], rng)


def test_parallel_edges_subdivision():
    g = WeightedGraph(3, [(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0)])
    model = SpanningTreeModel(g)
    cmap = build_copy_map([1.0, 0.5, 0.5])
    sub = model.subdivide(cmap)
    assert sub.n == cmap.U_size
    table = enumerate_distribution(sub)
    collapsed = {}
    for s, p in zip(table.sets, table.probs):
        key = tuple(collapse_batch(s[None], cmap)[0].tolist())
        collapsed[key] = collapsed.get(key, 0.0) + p
    for s, p in enumerate_distribution(model).as_dict().items():
        assert collapsed[s] == pytest.approx(p, abs=1e-12)
