"""Approximate sampling from k-DPPs and weighted spanning trees by
marginal overestimation, isotropic subdivision and domain sparsification.
"""
from .core import (ExactTable, KHomogeneousModel, check_negative_correlation, empirical_table,
                   enumerate_distribution, exact_marginals, tv_distance)
from .dpp import KernelDPP, decompose_features, decompose_kernel, kdpp_marginals, sample_kdpp
from .errors import (AsymmetryError, CapExceeded, Disconnected, DisconnectedError, DimensionMismatch,
                     DuplicateOriginal, EmptySupport, InfeasibleK, NonpositiveWeight, NotPSD,
                     NotSymmetric, ParseError, SamplerError, ZeroMass)
from .isotropy import (CopyMap, MarginalOverestimates, build_copy_map, collapse_batch,
                       estimate_overestimates, lift_batch, validate_overestimates)
from .sparsifier import Mode, SparsifierConfig, draw_samples, explicit_transition_matrix, prepare, run_chain
from .spanning_tree import SpanningTreeModel, WeightedGraph, sample_tree, weighted_tree_count
from .stats import concentration_experiment, estimate_tv, mixing_curve

__version__ = "0.1.0"

__all__ = [
    "AsymmetryError",
    "CapExceeded",
    "CopyMap",
    "DimensionMismatch",
    "Disconnected",
    "DisconnectedError",
    "DuplicateOriginal",
    "EmptySupport",
    "ExactTable",
    "InfeasibleK",
    "KHomogeneousModel",
    "KernelDPP",
    "MarginalOverestimates",
    "Mode",
    "NonpositiveWeight",
    "NotPSD",
    "NotSymmetric",
    "ParseError",
    "SamplerError",
    "SpanningTreeModel",
    "SparsifierConfig",
    "WeightedGraph",
    "ZeroMass",
    "build_copy_map",
    "check_negative_correlation",
    "collapse_batch",
    "concentration_experiment",
    "decompose_features",
    "decompose_kernel",
    "draw_samples",
    "empirical_table",
    "enumerate_distribution",
    "estimate_overestimates",
    "estimate_tv",
    "exact_marginals",
    "explicit_transition_matrix",
    "kdpp_marginals",
    "lift_batch",
    "mixing_curve",
    "prepare",
    "run_chain",
    "sample_kdpp",
    "sample_tree",
    "tv_distance",
    "validate_overestimates",
    "weighted_tree_count",
]
