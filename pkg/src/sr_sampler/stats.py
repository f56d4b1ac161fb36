"""Verification harness: empirical TV against the oracle, mixing curves and
the concentration-of-marginals experiment.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .core import ExactTable, empirical_table, enumerate_distribution, exact_marginals, tv_distance
from .errors import EmptySupport
from .isotropy import collapse_batch
from .sparsifier import SparsifierConfig, prepare, run_chain


@dataclass(frozen=True)
class TVEstimate:
    tv: float
    se: float
    num_samples: int


def estimate_tv(samples, table: ExactTable) -> TVEstimate:
    """TV between the empirical law of ``samples`` and ``table``.

    The reported standard error is the plug-in scale
    ``sqrt(|support| / N) / 2``.
    """
    samples = np.asarray(samples, dtype=np.intp).reshape(-1, table.k)
    N = len(samples)
    if N < 1000:
        raise ValueError(f"need at least 1000 samples, got {N}")
    tv = tv_distance(empirical_table(samples, table.n, table.k), table)
    return TVEstimate(tv, math.sqrt(len(table) / N) / 2, N)


@dataclass(frozen=True)
class MixingCurve:
    rounds_grid: list
    tv_values: list
    se_values: list
    samples_per_point: int

    def to_csv(self, fh):
        fh.write("rounds,tv,se\n")
        for r, tv, se in zip(self.rounds_grid, self.tv_values, self.se_values):
            fh.write(f"{r},{tv!r},{se!r}\n")


def mixing_curve(model, q, config, rounds_grid, samples_per_point, rng=None,
                 table=None, start=None) -> MixingCurve:
    """TV to the oracle after ``r`` rounds, for each ``r`` in the grid.

    Every grid point uses ``samples_per_point`` fresh chains, started from
    exact baseline draws or from the fixed set ``start``.
    """
    grid = [int(r) for r in rounds_grid]
    if grid != sorted(grid) or (grid and grid[0] < 0):
        raise ValueError("rounds grid must be ascending and non-negative")
    config = config or SparsifierConfig()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    table = table or enumerate_distribution(model)
    tvs, ses = [], []
    for r in grid:
        state = prepare(model, q, config, rng, chains=samples_per_point, start=start)
        if r == 0:
            draws = state.current
            if state.copy_map is not None:
                draws = collapse_batch(draws, state.copy_map)
        else:
            state = replace(state, config=replace(state.config, rounds=r))
            draws, _ = run_chain(state, samples_per_point, rng)
        est = estimate_tv(draws, table)
        tvs.append(est.tv)
        ses.append(est.se)
    return MixingCurve(grid, tvs, ses, int(samples_per_point))


@dataclass(frozen=True)
class ConcentrationReport:
    s: int
    trials: int
    valid_trials: int
    empty_support: int
    exceed_count: int
    exceed_fraction: float
    se: float
    threshold: float
    p_max: float

    def lines(self):
        yield "# event: max marginal of the restriction >= 2 p_max n / s (max over all elements)"
        for key, value in asdict(self).items():
            yield f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}"

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(asdict(self)))
            w.writeheader()
            w.writerow(asdict(self))


def concentration_experiment(model, s: int, trials: int, rng=None, cap: int = 2_000_000) -> ConcentrationReport:
    """Keep a uniform random ``s``-subset of the ground set and compare the
    largest marginal of the restricted model to ``2 p_max n / s``.

    Trials whose restriction has empty support are counted separately and
    left out of ``exceed_fraction``.
    """
    n = model.n
    if not 1 <= s <= n:
        raise ValueError(f"s={s} outside [1, {n}]")
    rng = np.random.default_rng(rng)
    p_max = float(exact_marginals(enumerate_distribution(model, cap)).max())
    threshold = 2 * p_max * n / s
    exceed = empty = 0
    for _ in range(trials):
        keep = np.sort(rng.choice(n, size=s, replace=False))
        try:
            sub = model.restrict(keep)
            p = exact_marginals(enumerate_distribution(sub, cap))
        except EmptySupport:
            empty += 1
            continue
        exceed += bool(p.max() >= threshold)
    valid = trials - empty
    frac = exceed / valid if valid else 0.0
    se = math.sqrt(frac * (1 - frac) / valid) if valid else 0.0
    return ConcentrationReport(s, trials, valid, empty, exceed, frac, se, threshold, p_max)
