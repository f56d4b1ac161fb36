"""Weighted random spanning trees as a k-homogeneous model over edges.

The ground set is the edge list (parallel edges are distinct elements) and
``k = v - 1``. A tree ``T`` has weight ``prod(lam[e] for e in T)``.
"""
from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .core import KHomogeneousModel, as_subset
from .errors import Disconnected, NonpositiveWeight


class DisjointSet:

    def __init__(self, size):
        self._parent = list(range(size))
        self.components = size

    def find(self, x):
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a, b):
        """Merge the sets of ``a`` and ``b``; False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[ra] = rb
        self.components -= 1
        return True


class WeightedGraph:
    """Undirected multigraph on vertices ``0..v-1`` with positive edge weights.

    ``edges`` is a sequence of ``(u, w)`` or ``(u, w, lam)`` triples.
    Construction raises Disconnected unless ``check_connected=False``.
    """

    def __init__(self, v, edges, check_connected=True):
        self.v = int(v)
        rows = [tuple(e) for e in edges]
        self.u = np.array([int(e[0]) for e in rows], dtype=np.intp)
        self.w = np.array([int(e[1]) for e in rows], dtype=np.intp)
        self.lam = np.array([float(e[2]) if len(e) > 2 else 1.0 for e in rows])
        if self.v < 1:
            raise ValueError("graph needs at least one vertex")
        if np.any(self.u == self.w):
            raise ValueError(f"self-loop at edge {int(np.argmax(self.u == self.w))}")
        if len(rows) and (min(self.u.min(), self.w.min()) < 0 or max(self.u.max(), self.w.max()) >= self.v):
            raise ValueError(f"vertex id outside [0, {self.v})")
        if np.any(~(self.lam > 0)) or not np.all(np.isfinite(self.lam)):
            raise NonpositiveWeight("edge weights must be positive and finite")
        if check_connected and not self.is_connected():
            raise Disconnected(f"graph with {self.v} vertices and {self.m} edges is disconnected")

    @property
    def m(self):
        return len(self.lam)

    @property
    def k(self):
        return self.v - 1

    def edges(self):
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.w, self.lam)]

    def is_connected(self, edge_ids=None):
        ids = range(self.m) if edge_ids is None else edge_ids
        ds = DisjointSet(self.v)
        for e in ids:
            ds.union(int(self.u[e]), int(self.w[e]))
        return ds.components == 1

    def subgraph(self, edge_ids, check_connected=True):
        ids = np.asarray(edge_ids, dtype=np.intp)
        return WeightedGraph(self.v, zip(self.u[ids], self.w[ids], self.lam[ids]), check_connected)

    def laplacian(self):
        lap = np.zeros((self.v, self.v))
        np.add.at(lap, (self.u, self.u), self.lam)
        np.add.at(lap, (self.w, self.w), self.lam)
        np.add.at(lap, (self.u, self.w), -self.lam)
        np.add.at(lap, (self.w, self.u), -self.lam)
        return lap

    def __repr__(self):
        return f"WeightedGraph(v={self.v}, m={self.m})"


def _adjacency(graph, edge_ids):
    nbrs = [[] for _ in range(graph.v)]
    eids = [[] for _ in range(graph.v)]
    cum = [[] for _ in range(graph.v)]
    for e in edge_ids:
        a, b, lam = int(graph.u[e]), int(graph.w[e]), float(graph.lam[e])
        for x, y in ((a, b), (b, a)):
            nbrs[x].append(y)
            eids[x].append(int(e))
            cum[x].append((cum[x][-1] if cum[x] else 0.0) + lam)
    return nbrs, eids, cum


def _uniforms(rng, block=512):
    while True:
        yield from rng.random(block).tolist()


def _wilson(graph, edge_ids, rng, root=0):
    nbrs, eids, cum = _adjacency(graph, edge_ids)
    unif = _uniforms(rng)
    in_tree = [False] * graph.v
    in_tree[root] = True
    nxt = [root] * graph.v
    via = [-1] * graph.v
    for start in range(graph.v):
        x = start
        while not in_tree[x]:
            c = cum[x]
            j = min(bisect_right(c, next(unif) * c[-1]), len(c) - 1)
            via[x] = eids[x][j]
            nxt[x] = x = nbrs[x][j]
        x = start
        while not in_tree[x]:
            in_tree[x] = True
            x = nxt[x]
    return tuple(sorted(via[y] for y in range(graph.v) if y != root))


def sample_tree_restricted(graph: WeightedGraph, edge_ids, rng) -> tuple:
    """Weighted spanning tree of the subgraph on ``edge_ids`` (Wilson's
    algorithm rooted at vertex 0). Edge indices refer to ``graph``.
    """
    ids = sorted(set(int(e) for e in edge_ids))
    if ids and (ids[0] < 0 or ids[-1] >= graph.m):
        raise ValueError("edge index out of range")
    if not graph.is_connected(ids):
        raise Disconnected("edge subset does not span the graph")
    return _wilson(graph, ids, rng)


def sample_tree(graph: WeightedGraph, rng) -> tuple:
    return sample_tree_restricted(graph, range(graph.m), rng)


def weighted_tree_count(graph: WeightedGraph) -> float:
    """Log of the weighted spanning-tree count (matrix-tree theorem)."""
    if not graph.is_connected():
        raise Disconnected("graph is disconnected")
    if graph.v == 1:
        return 0.0
    sign, logdet = np.linalg.slogdet(graph.laplacian()[1:, 1:])
    if sign <= 0:
        raise Disconnected("reduced Laplacian is not positive definite")
    return float(logdet)


def log_weight_tree(graph: WeightedGraph, subset) -> float:
    """Sum of log-weights if ``subset`` is a spanning tree, else ``-inf``."""
    s = as_subset(subset, graph.m, graph.k)
    ds = DisjointSet(graph.v)
    for e in s:
        if not ds.union(int(graph.u[e]), int(graph.w[e])):
            return float("-inf")
    if ds.components != 1:
        return float("-inf")
    return float(np.log(graph.lam[list(s)]).sum())


class SpanningTreeModel(KHomogeneousModel):

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.n = graph.m
        self.k = graph.k
        if self.k < 1:
            raise ValueError("need at least two vertices")
        inc = np.zeros((graph.m, graph.v))
        inc[np.arange(graph.m), graph.u] = 1.0
        inc[np.arange(graph.m), graph.w] = -1.0
        self._incidence = inc[:, 1:]
        self._log_lam = np.log(graph.lam)

    def __repr__(self):
        return f"SpanningTreeModel({self.graph!r})"

    def log_weight(self, subset):
        return log_weight_tree(self.graph, subset)

    def log_weight_batch(self, sets):
        # v-1 edges form a tree iff their reduced incidence matrix is
        # unimodular (|det| = 1); otherwise it is singular.
        sets = np.asarray(sets, dtype=np.intp)
        if len(sets) == 0:
            return np.empty(0)
        _, logabs = np.linalg.slogdet(self._incidence[sets])
        out = self._log_lam[sets].sum(axis=1)
        out[~(logabs > np.log(0.5))] = -np.inf
        return out

    def sample_restricted(self, allowed, rng):
        return sample_tree_restricted(self.graph, allowed, rng)

    def restrict(self, indices):
        return SpanningTreeModel(self.graph.subgraph(sorted(indices)))

    def subdivide(self, copy_map):
        """Each edge ``e`` becomes ``t_e`` parallel edges of weight ``lam_e / t_e``."""
        origin = copy_map.origin
        g = self.graph
        lam = g.lam[origin] / copy_map.t[origin]
        return SpanningTreeModel(WeightedGraph(g.v, zip(g.u[origin], g.w[origin], lam),
                                               check_connected=False))
