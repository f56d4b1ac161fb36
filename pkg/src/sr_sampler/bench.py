"""Per-sample wall-clock timing of the sparsified and exact k-DPP paths on
identity-like factored kernels."""
from __future__ import annotations

import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from .dpp import KernelDPP, decompose_features, kdpp_marginals, sample_kdpp
from .sparsifier import SparsifierConfig, prepare, run_chain


@dataclass(frozen=True)
class BenchRow:
    n: int
    k: int
    d: int
    path: str
    U: int
    t: int
    rounds: int
    preprocess_seconds: float
    per_sample_seconds: float
    samples: int

    @classmethod
    def header(cls):
        return ",".join(f.name for f in fields(cls))

    def csv(self):
        return ",".join(f"{x:.6g}" if isinstance(x, float) else str(x) for x in astuple(self))


def identity_like_features(n, d, rng):
    """Unit-norm Gaussian rows: ``L = F F^T`` has unit diagonal and
    off-diagonal entries of order ``1 / sqrt(d)``."""
    F = rng.standard_normal((n, d))
    return F / np.linalg.norm(F, axis=1, keepdims=True)


def bench_sparsified(F, k, samples, config, rng) -> BenchRow:
    """Preprocessing (exact marginals as overestimates, subdivision, start
    state) is timed separately from the chain."""
    n, d = F.shape
    t0 = time.perf_counter()
    model = KernelDPP(features=F, k=k)
    q = kdpp_marginals(model.decomposition, k)
    state = prepare(model, q, config, rng)
    pre = time.perf_counter() - t0
    _, state = run_chain(state, 1, rng)  # warm-up, untimed
    t0 = time.perf_counter()
    run_chain(state, samples, rng)
    per = (time.perf_counter() - t0) / samples
    rounds = config.round_count(state.K, state.model.n, state.t)
    return BenchRow(n, k, d, "sparsified", state.model.n, state.t, rounds, pre, per, samples)


def bench_exact(F, k, samples, rng) -> list:
    """Two rows: ``exact`` decomposes the kernel for every draw, while
    ``exact-cached`` reuses one decomposition."""
    n, d = F.shape
    sample_kdpp(decompose_features(F), k, rng)  # warm-up, untimed
    t0 = time.perf_counter()
    for _ in range(samples):
        sample_kdpp(decompose_features(F), k, rng)
    fresh = (time.perf_counter() - t0) / samples
    t0 = time.perf_counter()
    decomp = decompose_features(F)
    pre = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(samples):
        sample_kdpp(decomp, k, rng)
    cached = (time.perf_counter() - t0) / samples
    return [BenchRow(n, k, d, "exact", n, n, 0, 0.0, fresh, samples),
            BenchRow(n, k, d, "exact-cached", n, n, 0, pre, cached, samples)]


def run_bench(n_grid, k=16, d=None, samples=20, exact=False, config=None, seed=0):
    """Yield one or two BenchRow per ``n``; kernels are seeded by ``(seed, n)``."""
    d = d or 8 * k
    if k < 1 or d < k or samples < 1:
        raise ValueError("bench needs k >= 1, d >= k and samples >= 1")
    config = config or SparsifierConfig(seed=seed)
    for n in n_grid:
        rng = np.random.default_rng([seed, n])
        F = identity_like_features(n, d, rng)
        if exact:
            yield from bench_exact(F, k, samples, rng)
        else:
            yield bench_sparsified(F, k, samples, config, rng)
