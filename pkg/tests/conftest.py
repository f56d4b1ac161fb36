import itertools

import numpy as np
import pytest

from sr_sampler.dpp import KernelDPP
from sr_sampler.spanning_tree import SpanningTreeModel, WeightedGraph


def random_psd(n, seed, rank=None):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, rank or n))
    return A @ A.T / (rank or n)


def complete_graph(v, weights=None):
    edges = list(itertools.combinations(range(v), 2))
    if weights is not None:
        edges = [(a, b, w) for (a, b), w in zip(edges, weights)]
    return WeightedGraph(v, edges)


def random_graph(v, extra, seed):
    """Random spanning path plus ``extra`` random edges, weights in [0.5, 3)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(v)
    edges = [(int(order[i]), int(order[i + 1])) for i in range(v - 1)]
    while len(edges) < v - 1 + extra:
        a, b = rng.choice(v, 2, replace=False)
        edges.append((int(a), int(b)))
    w = rng.uniform(0.5, 3.0, len(edges))
    return WeightedGraph(v, [(a, b, float(x)) for (a, b), x in zip(edges, w)])


def small_models(seed):
    """A few small k-homogeneous models of both kinds, keyed by name."""
    return {
        "identity-7-2": KernelDPP(np.eye(7), 2),
        f"psd-7-3-{seed}": KernelDPP(random_psd(7, seed), 3),
        f"lowrank-8-2-{seed}": KernelDPP(random_psd(8, seed + 100, rank=4), 2),
        "k4": SpanningTreeModel(complete_graph(4)),
        f"graph-5-{seed}": SpanningTreeModel(random_graph(5, 3, seed)),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
