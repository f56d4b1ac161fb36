"""Isotropic subdivision and recursive marginal overestimation.

Given overestimates ``q_i >= P[i in S]`` with total ``K``, element ``i`` is
split into ``t_i = ceil(n q_i / K)`` copies. The subdivided distribution
gives a copy-set the weight of its originals divided by ``prod t_i``, so
every copy has marginal at most ``K / n`` and the ground set at most
doubles.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ExactTable, KHomogeneousModel, exact_marginals
from .errors import DuplicateOriginal, EmptySupport, ZeroMass

log = logging.getLogger(__name__)

# Guards ceil() against roundoff when n * q_i / K is an exact integer.
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class MarginalOverestimates:
    q: np.ndarray
    fallbacks: int = 0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or np.any(q < 0) or np.any(q > 1 + 1e-12) or not np.all(np.isfinite(q)):
            raise ValueError("overestimates must lie in [0, 1]")
        object.__setattr__(self, "q", np.minimum(q, 1.0))

    @property
    def K(self) -> float:
        return float(self.q.sum())

    @property
    def n(self) -> int:
        return len(self.q)

    @classmethod
    def ones(cls, n):
        return cls(np.ones(n))


def as_overestimates(q, n=None) -> MarginalOverestimates:
    if q is None:
        return MarginalOverestimates.ones(n)
    if not isinstance(q, MarginalOverestimates):
        q = MarginalOverestimates(np.asarray(q, dtype=float))
    if n is not None and q.n != n:
        raise ValueError(f"{q.n} overestimates for a ground set of size {n}")
    return q


@dataclass(frozen=True)
class CopyMap:
    """Element ``i`` owns copies ``offsets[i] .. offsets[i+1]-1``."""

    t: np.ndarray
    offsets: np.ndarray = field(init=False)
    origin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.intp)
        if np.any(t < 1):
            raise ValueError("every element needs at least one copy")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "offsets", np.concatenate([[0], np.cumsum(t)]).astype(np.intp))
        object.__setattr__(self, "origin", np.repeat(np.arange(len(t)), t))

    @property
    def n(self):
        return len(self.t)

    @property
    def U_size(self):
        return int(self.offsets[-1])

    @property
    def is_identity(self):
        return self.U_size == self.n

    def copies(self, i):
        return range(self.offsets[i], self.offsets[i + 1])


def build_copy_map(q, n=None) -> CopyMap:
    """``t_i = max(1, ceil(n q_i / K))``; ``|U| <= 2n`` is checked."""
    q = as_overestimates(q, n)
    n = q.n
    K = q.K
    if not K > 0:
        raise ZeroMass("overestimates sum to zero")
    t = np.maximum(1, np.ceil(n * q.q / K - _CEIL_SLACK)).astype(np.intp)
    cmap = CopyMap(t)
    assert cmap.U_size <= 2 * n, (cmap.U_size, n)
    return cmap


def lift_batch(samples, cmap: CopyMap, rng) -> np.ndarray:
    """Replace each element by a uniformly random copy (rows stay sorted)."""
    samples = np.asarray(samples, dtype=np.intp)
    pick = np.floor(rng.random(samples.shape) * cmap.t[samples]).astype(np.intp)
    return cmap.offsets[samples] + pick


def lift_sample(subset, cmap: CopyMap, rng) -> tuple:
    row = lift_batch(np.asarray([sorted(subset)], dtype=np.intp), cmap, rng)[0]
    return tuple(int(i) for i in row)


def collapse_batch(samples, cmap: CopyMap) -> np.ndarray:
    out = np.sort(cmap.origin[np.asarray(samples, dtype=np.intp)], axis=-1)
    if out.shape[-1] > 1 and np.any(np.diff(out, axis=-1) == 0):
        raise DuplicateOriginal("two copies of one original element in a sample")
    return out


def collapse_sample(subset, cmap: CopyMap) -> tuple:
    row = collapse_batch(np.asarray([list(subset)], dtype=np.intp), cmap)[0]
    return tuple(int(i) for i in row)


def estimate_overestimates(model: KHomogeneousModel, sample_constant: float = 100.0,
                           rng=None, config=None, max_retries: int = 3) -> MarginalOverestimates:
    """Divide-and-conquer overestimates with total at most ``4k``.

    Ground sets of size ``<= 4k`` get all-ones. Larger ones are split into
    index halves, whose (recursive) overestimates are concatenated and used
    to draw ``ceil(sample_constant |S| ln n / k)`` samples with the
    sparsifier; then ``q_i = min(1, max(k/|S|, 2 count_i / s))``. A half
    whose restriction has empty support falls back to all-ones.
    """
    from .sparsifier import SparsifierConfig, draw_samples

    rng = np.random.default_rng(rng)
    config = config or SparsifierConfig()
    k = model.k
    log_n = math.log(max(model.n, 3))
    fallbacks = 0

    def recurse(sub):
        nonlocal fallbacks
        m = sub.n
        if m <= 4 * k:
            return np.ones(m)
        parts = []
        for idx in (np.arange(m // 2), np.arange(m // 2, m)):
            try:
                child = sub.restrict(idx)
            except EmptySupport as exc:
                log.debug("restriction to %d elements infeasible (%s); using all-ones", len(idx), exc)
                fallbacks += 1
                parts.append(np.ones(len(idx)))
                continue
            parts.append(recurse(child))
        qbar = np.concatenate(parts)
        s = math.ceil(sample_constant * m * log_n / k)
        for _ in range(max_retries + 1):
            samples = draw_samples(sub, qbar, replace(config, chains=s), s, rng)
            counts = np.bincount(samples.ravel(), minlength=m)
            q = np.minimum(1.0, np.maximum(k / m, 2.0 * counts / s))
            if q.sum() <= 4 * k + 1e-9:
                return q
            s *= 2
        raise RuntimeError(f"overestimates still sum above 4k={4 * k} after {max_retries} retries")

    return MarginalOverestimates(recurse(model), fallbacks)


@dataclass(frozen=True)
class OverestimateReport:
    violations: list
    K: float
    valid: bool


def validate_overestimates(q, table: ExactTable, slack: float = 1e-9) -> OverestimateReport:
    """List the elements with ``q_i < p_i - slack`` against exact marginals."""
    q = as_overestimates(q, table.n)
    p = exact_marginals(table)
    bad = [(int(i), float(q.q[i]), float(p[i])) for i in np.nonzero(q.q < p - slack)[0]]
    return OverestimateReport(bad, q.K, not bad)
