import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sr_sampler.core import (ExactTable, KHomogeneousModel, all_subsets, as_subset,
                             check_negative_correlation, empirical_table, enumerate_distribution,
                             exact_marginals, table_from_log_weights, tv_distance)
from sr_sampler.dpp import KernelDPP
from sr_sampler.errors import CapExceeded, DimensionMismatch, ZeroMass

from conftest import random_psd


class TableModel(KHomogeneousModel):
    """Arbitrary weights given as a dict; used for non-SR test cases."""

    def __init__(self, n, k, weights):
        self.n, self.k, self.weights = n, k, weights

    def log_weight(self, subset):
        w = self.weights.get(tuple(sorted(int(i) for i in subset)), 0.0)
        return math.log(w) if w > 0 else -math.inf

    def sample_restricted(self, allowed, rng):
        raise NotImplementedError


def test_as_subset():
    assert as_subset([3, 1], 5, 2) == (1, 3)
    with pytest.raises(ValueError):
        as_subset([1, 1], 5)
    with pytest.raises(ValueError):
        as_subset([5], 5)
    with pytest.raises(ValueError):
        as_subset([1], 5, 2)


def test_uniform_enumeration():
    table = enumerate_distribution(KernelDPP(np.eye(4), 2))
    assert len(table) == 6
    np.testing.assert_allclose(table.probs, 1 / 6)
    assert table.prob((0, 1)) == pytest.approx(1 / 6)
    assert table.prob((1, 0)) == pytest.approx(1 / 6)


def test_enumeration_matches_determinants():
    L = random_psd(6, 3)
    table = enumerate_distribution(KernelDPP(L, 3))
    dets = np.array([np.linalg.det(L[np.ix_(s, s)]) for s in all_subsets(6, 3)])
    np.testing.assert_allclose(table.probs, dets / dets.sum(), rtol=1e-10)
    assert table.log_partition == pytest.approx(math.log(dets.sum()), rel=1e-12)


def test_zero_weight_sets_are_dropped():
    table = enumerate_distribution(TableModel(3, 1, {(0,): 1.0, (2,): 3.0}))
    assert table.as_dict() == {(0,): 0.25, (2,): 0.75}


def test_cap_exceeded():
    with pytest.raises(CapExceeded):
        enumerate_distribution(KernelDPP(np.eye(30), 10), cap=1000)


def test_zero_mass():
    with pytest.raises(ZeroMass):
        enumerate_distribution(TableModel(3, 1, {}))
    with pytest.raises(ZeroMass):
        table_from_log_weights([[0]], [-np.inf], 1, 1)


def test_tv_examples():
    a = ExactTable(np.array([[0], [1]]), np.array([0.5, 0.5]), 2, 1)
    b = ExactTable(np.array([[0]]), np.array([1.0]), 2, 1)
    assert tv_distance(a, a) == 0
    assert tv_distance(a, b) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatch):
        tv_distance(a, ExactTable(np.array([[0, 1]]), np.array([1.0]), 2, 2))


distributions = st.lists(st.floats(0, 1), min_size=6, max_size=6).filter(lambda w: sum(w) > 1e-6)


def _table(w):
    w = np.asarray(w)
    keep = w > 0
    return ExactTable(all_subsets(4, 2)[keep], w[keep] / w.sum(), 4, 2)


@settings(max_examples=60, deadline=None)
@given(distributions, distributions, distributions)
def test_tv_is_a_metric(wa, wb, wc):
    a, b, c = _table(wa), _table(wb), _table(wc)
    assert tv_distance(a, a) == pytest.approx(0, abs=1e-12)
    assert tv_distance(a, b) == pytest.approx(tv_distance(b, a), abs=1e-12)
    assert 0 <= tv_distance(a, b) <= 1
    assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12


def test_empirical_table_sorts_rows():
    table = empirical_table([[1, 0], [0, 1], [2, 1], [0, 1]], 3, 2)
    assert table.as_dict() == {(0, 1): 0.75, (1, 2): 0.25}


def test_marginals_sum_to_k():
    table = enumerate_distribution(KernelDPP(random_psd(7, 1), 3))
    p = exact_marginals(table)
    assert p.sum() == pytest.approx(3)
    assert np.all((p >= 0) & (p <= 1 + 1e-12))


def test_negative_correlation():
    assert check_negative_correlation(enumerate_distribution(KernelDPP(random_psd(6, 2), 2))).passed
    # Positively correlated pair: {0,1} and {2,3} only.
    bad = enumerate_distribution(TableModel(4, 2, {(0, 1): 1.0, (2, 3): 1.0}))
    report = check_negative_correlation(bad)
    assert not report.passed
    assert report.max_violation == pytest.approx(0.25)
