"""Weighted spanning trees: count them, sample them, check the law.

Edges are the ground set and a sample is a set of V - 1 edge indices.
"""
import itertools
import math

import numpy as np

from sr_sampler import (SpanningTreeModel, SparsifierConfig, WeightedGraph, draw_samples,
                        enumerate_distribution, estimate_tv, exact_marginals, weighted_tree_count)

k4 = WeightedGraph(4, list(itertools.combinations(range(4), 2)))
print(f"K4 spanning trees: {math.exp(weighted_tree_count(k4)):.6f} (Cayley: 16)")

# A wheel on 6 vertices with heavier spokes.
rim = [(i, i % 5 + 1, 1.0) for i in range(1, 6)]
spokes = [(0, i, 2.5) for i in range(1, 6)]
wheel = WeightedGraph(6, rim + spokes)
model = SpanningTreeModel(wheel)
table = enumerate_distribution(model)
print(f"wheel W6: {len(table)} spanning trees, log weighted count {weighted_tree_count(wheel):.4f}")

# Overestimates of 1.2x the true marginals; t_multiplier 1.5 makes the
# down-up walk resample from 7-edge supersets of the 5-edge current tree.
q = np.minimum(1.0, 1.2 * exact_marginals(table))
cfg = SparsifierConfig(t_multiplier=1.5, rounds=4, chains=20_000, seed=2)
trees = draw_samples(model, q, cfg, 20_000)
print(f"sparsified walk TV {estimate_tv(trees, table).tv:.4f} over {len(trees)} trees")
spoke_share = np.isin(trees, range(5, 10)).sum(axis=1).mean()
print(f"average spokes per tree {spoke_share:.3f}")
