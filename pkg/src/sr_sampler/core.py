"""k-homogeneous distributions over subsets, the enumeration oracle, and
distribution comparison utilities.

Samples are sorted tuples of ground-set indices (0-indexed). Batches of
samples are integer arrays of shape ``(m, k)`` whose rows are sorted.
"""
from __future__ import annotations

import abc
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, DimensionMismatch, ZeroMass

DEFAULT_CAP = 2_000_000


def as_subset(indices, n: int, k: int | None = None) -> tuple:
    """Validate ``indices`` and return them as a sorted tuple."""
    s = tuple(sorted(int(i) for i in indices))
    if k is not None and len(s) != k:
        raise ValueError(f"expected {k} indices, got {len(s)}")
    if len(set(s)) != len(s):
        raise ValueError(f"repeated index in {s}")
    if s and (s[0] < 0 or s[-1] >= n):
        raise ValueError(f"index out of range [0, {n}) in {s}")
    return s


class KHomogeneousModel(abc.ABC):
    """A distribution on k-subsets of ``range(n)`` given by unnormalized
    log-weights, with a sampler for its restrictions.

    Subclasses implement :meth:`log_weight` and :meth:`sample_restricted`;
    the batch methods default to loops over those and may be overridden
    with vectorized versions.
    """

    n: int
    k: int

    @abc.abstractmethod
    def log_weight(self, subset) -> float:
        """Unnormalized log-probability; ``-inf`` outside the support."""

    @abc.abstractmethod
    def sample_restricted(self, allowed, rng: np.random.Generator) -> tuple:
        """Draw a k-subset of ``allowed`` with law proportional to the weights.

        Raises a subclass of :class:`~sr_sampler.errors.EmptySupport` when no
        k-subset of ``allowed`` has positive weight.
        """

    def log_weight_batch(self, sets) -> np.ndarray:
        sets = np.asarray(sets, dtype=np.intp)
        return np.array([self.log_weight(row) for row in sets], dtype=float)

    def sample_restricted_batch(self, allowed, rng) -> np.ndarray:
        """One restricted draw per row of the ``(m, t)`` array ``allowed``."""
        allowed = np.asarray(allowed, dtype=np.intp)
        out = np.empty((allowed.shape[0], self.k), dtype=np.intp)
        for r, row in enumerate(allowed):
            out[r] = self.sample_restricted(row, rng)
        return out

    def sample(self, rng) -> tuple:
        return self.sample_restricted(np.arange(self.n), rng)

    def sample_batch(self, count: int, rng) -> np.ndarray:
        """``count`` independent unrestricted draws as a ``(count, k)`` array."""
        out = np.empty((count, self.k), dtype=np.intp)
        full = np.arange(self.n)
        for r in range(count):
            out[r] = self.sample_restricted(full, rng)
        return out

    def restrict(self, indices) -> "KHomogeneousModel":
        """The restriction to ``indices``, relabelled to ``range(len(indices))``."""
        return RestrictedModel(self, indices)

    def subdivide(self, copy_map) -> "KHomogeneousModel":
        raise NotImplementedError(
            f"{type(self).__name__} has no subdivided realization")


class RestrictedModel(KHomogeneousModel):
    """Generic restriction wrapper used when a model has no cheaper form."""

    def __init__(self, base: KHomogeneousModel, indices):
        self.base = base
        self.indices = np.asarray(sorted(indices), dtype=np.intp)
        self.n = len(self.indices)
        self.k = base.k

    def log_weight(self, subset):
        return self.base.log_weight(self.indices[np.asarray(subset, dtype=np.intp)])

    def log_weight_batch(self, sets):
        return self.base.log_weight_batch(self.indices[np.asarray(sets, dtype=np.intp)])

    def sample_restricted(self, allowed, rng):
        s = self.base.sample_restricted(self.indices[np.asarray(allowed, dtype=np.intp)], rng)
        return tuple(int(i) for i in np.searchsorted(self.indices, s))


@dataclass(frozen=True)
class ExactTable:
    """Fully enumerated distribution: rows of ``sets`` with ``probs``."""

    sets: np.ndarray
    probs: np.ndarray
    n: int
    k: int
    log_partition: float = float("nan")
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = {tuple(int(i) for i in row): j for j, row in enumerate(self.sets)}
        if len(index) != len(self.sets):
            raise ValueError("duplicate sets in table")
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.probs)

    def prob(self, subset) -> float:
        j = self._index.get(tuple(sorted(int(i) for i in subset)))
        return 0.0 if j is None else float(self.probs[j])

    def as_dict(self) -> dict:
        return {s: float(self.probs[j]) for s, j in self._index.items()}

    def indicator(self) -> np.ndarray:
        """0/1 matrix of shape ``(len(self), n)`` marking membership."""
        x = np.zeros((len(self.sets), self.n))
        if len(self.sets):
            np.put_along_axis(x, self.sets, 1.0, axis=1)
        return x


def all_subsets(n: int, k: int) -> np.ndarray:
    m = math.comb(n, k)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), k)),
                       dtype=np.intp, count=m * k)
    return flat.reshape(m, k)


def table_from_log_weights(sets, log_w, n, k) -> ExactTable:
    sets = np.asarray(sets, dtype=np.intp).reshape(-1, k)
    log_w = np.asarray(log_w, dtype=float)
    keep = np.isfinite(log_w)
    if not keep.any():
        raise ZeroMass("every subset has zero weight")
    sets, log_w = sets[keep], log_w[keep]
    shift = log_w.max()
    w = np.exp(log_w - shift)
    total = w.sum()
    return ExactTable(sets, w / total, n, k, float(shift + np.log(total)))


def enumerate_distribution(model: KHomogeneousModel, cap: int = DEFAULT_CAP,
                           chunk: int = 200_000) -> ExactTable:
    """Brute-force enumeration of every k-subset and its normalized probability.

    Raises CapExceeded when ``binomial(n, k) > cap`` and ZeroMass when no
    subset has positive weight.
    """
    size = math.comb(model.n, model.k)
    if size > cap:
        raise CapExceeded(f"binomial({model.n}, {model.k}) = {size} exceeds cap {cap}")
    sets = all_subsets(model.n, model.k)
    log_w = np.concatenate([model.log_weight_batch(sets[i:i + chunk])
                            for i in range(0, max(len(sets), 1), chunk)]) if len(sets) else np.empty(0)
    return table_from_log_weights(sets, log_w, model.n, model.k)


def empirical_table(samples, n: int, k: int) -> ExactTable:
    """Frequency table of a batch of samples (rows sorted or not)."""
    samples = np.sort(np.asarray(samples, dtype=np.intp).reshape(-1, k), axis=1)
    if len(samples) == 0:
        raise ValueError("no samples")
    uniq, counts = np.unique(samples, axis=0, return_counts=True)
    return ExactTable(uniq, counts / counts.sum(), n, k)


def exact_marginals(table: ExactTable) -> np.ndarray:
    p = np.zeros(table.n)
    np.add.at(p, table.sets.ravel(), np.repeat(table.probs, table.k))
    return p


def tv_distance(a: ExactTable, b: ExactTable) -> float:
    """Total variation distance; sets missing from one table count as 0."""
    if (a.n, a.k) != (b.n, b.k):
        raise DimensionMismatch(f"(n, k) = {(a.n, a.k)} vs {(b.n, b.k)}")
    da, db = a.as_dict(), b.as_dict()
    diff = sum(abs(p - db.get(s, 0.0)) for s, p in da.items())
    diff += sum(p for s, p in db.items() if s not in da)
    return min(1.0, 0.5 * diff)


@dataclass(frozen=True)
class CorrelationReport:
    max_violation: float
    pair: tuple
    passed: bool


def pair_marginals(table: ExactTable) -> np.ndarray:
    x = table.indicator()
    return (x * table.probs[:, None]).T @ x


def check_negative_correlation(table: ExactTable, tol: float = 1e-9) -> CorrelationReport:
    """Largest ``P[i, j in S] - p_i p_j`` over pairs ``i != j``.

    Non-positive everywhere is necessary (not sufficient) for the strong
    Rayleigh property.
    """
    if table.n < 2:
        return CorrelationReport(float("-inf"), (), True)
    p = exact_marginals(table)
    cov = pair_marginals(table) - np.outer(p, p)
    np.fill_diagonal(cov, -np.inf)
    i, j = np.unravel_index(np.argmax(cov), cov.shape)
    worst = float(cov[i, j])
    return CorrelationReport(worst, (int(min(i, j)), int(max(i, j))), worst <= tol)
