"""Domain-sparsification chains on k-subsets.

One DOWN_UP round takes the current set ``S``, adds a uniformly random
``(t - k)``-subset of the other elements to form ``T``, and resamples ``S``
from the model restricted to ``T``. EXCHANGE is the ``t = k + 1`` case,
where the restricted draw is done from the ``k + 1`` explicit weights.

Chains are advanced in lockstep: ``ChainState.current`` holds one row per
chain, and every round is a handful of vectorized numpy calls.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import KHomogeneousModel, enumerate_distribution
from .errors import EmptySupport
from .isotropy import CopyMap, as_overestimates, build_copy_map, collapse_batch, lift_batch


class Mode(str, enum.Enum):
    DOWN_UP = "down-up"
    EXCHANGE = "exchange"


@dataclass(frozen=True)
class SparsifierConfig:
    """``rounds=None`` means AUTO. ``chains`` independent chains run in
    lockstep; consecutive outputs of one chain are ``rounds`` rounds apart.
    """

    t_multiplier: float = 4.0
    rounds: int | None = None
    seed: int = 0
    mode: Mode = Mode.DOWN_UP
    chains: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.t_multiplier >= 1:
            raise ValueError("t_multiplier must be >= 1")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be positive (or None for AUTO)")
        if self.chains < 1:
            raise ValueError("chains must be positive")

    def superset_size(self, K, k, n):
        if self.mode is Mode.EXCHANGE:
            return min(k + 1, n)
        return int(min(max(math.ceil(self.t_multiplier * K), k + 1), n))

    def round_count(self, K, n, t):
        """AUTO: 10 ceil(log2(n+1)) for DOWN_UP (1 when ``t = n``, since the
        superset is then forced and one round is an exact draw) and
        10 ceil(K log2(n+1)) for EXCHANGE.
        """
        if self.rounds is not None:
            return int(self.rounds)
        if self.mode is Mode.DOWN_UP:
            return 1 if t >= n else 10 * math.ceil(math.log2(n + 1))
        return 10 * math.ceil(K * math.log2(n + 1))


@dataclass(frozen=True)
class ChainState:
    model: KHomogeneousModel
    current: np.ndarray
    t: int
    K: float
    config: SparsifierConfig
    copy_map: CopyMap | None = None
    round_counter: int = 0

    @property
    def chains(self):
        return self.current.shape[0]

    @property
    def sample(self) -> tuple:
        """Current set of the first chain, on the original ground set."""
        row = self.current[:1]
        if self.copy_map is not None:
            row = collapse_batch(row, self.copy_map)
        return tuple(int(i) for i in row[0])


def partial_fisher_yates(N, m, rng, size=1):
    """``size`` independent uniform ``m``-subsets of ``range(N)``, in draw order.

    Sparse partial Fisher-Yates: swaps are kept as a per-row write log, so
    the cost is O(m^2) per row and independent of ``N``.
    """
    if not 0 <= m <= N:
        raise ValueError(f"cannot draw {m} of {N}")
    rows = np.arange(size)
    out = np.empty((size, m), dtype=np.intp)
    pos = np.empty((size, m), dtype=np.intp)
    val = np.empty((size, m), dtype=np.intp)
    u = rng.random((size, m))

    def lookup(j, key):
        if j == 0:
            return key
        hit = pos[:, :j] == key[:, None]
        last = j - 1 - np.argmax(hit[:, ::-1], axis=1)
        return np.where(hit.any(axis=1), val[rows, last], key)

    for j in range(m):
        r = np.minimum(j + (u[:, j] * (N - j)).astype(np.intp), N - 1)
        out[:, j] = lookup(j, r)
        pos[:, j] = r
        val[:, j] = lookup(j, np.full(size, j, dtype=np.intp))
    return out


def complement_elements(current, ranks):
    """Map ranks within each row's complement of ``current`` to elements."""
    current = np.asarray(current, dtype=np.intp)
    k = current.shape[1]
    shifted = current - np.arange(k)
    return ranks + (shifted[:, None, :] <= ranks[:, :, None]).sum(axis=2)


def init_state(model, q=None, config=None, rng=None, *, copy_map=None, chains=None, start=None):
    """Start chains from exact baseline samples (or from ``start``)."""
    config = config or SparsifierConfig()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    n_orig = model.n if copy_map is None else copy_map.n
    q = as_overestimates(q, n_orig)
    U, k = model.n, model.k
    c = chains or config.chains
    if start is not None:
        current = np.tile(np.sort(np.asarray(start, dtype=np.intp)), (c, 1))
    else:
        current = model.sample_batch(c, rng)
    if not np.all(np.isfinite(model.log_weight_batch(current))):
        raise EmptySupport("initial state outside the support")
    t = config.superset_size(q.K, k, U)
    return ChainState(model, current, t, q.K, config, copy_map)


def down_up_round(state: ChainState, rng) -> ChainState:
    cur = state.current
    c, k = cur.shape
    U, t = state.model.n, state.t
    if t >= U:
        allowed = np.tile(np.arange(U), (c, 1))
    else:
        extra = complement_elements(cur, partial_fisher_yates(U - k, t - k, rng, c))
        allowed = np.sort(np.concatenate([cur, extra], axis=1), axis=1)
    new = state.model.sample_restricted_batch(allowed, rng)
    return replace(state, current=new, round_counter=state.round_counter + 1)


def _drop_one(k):
    return np.array([[i for i in range(k + 1) if i != j] for j in range(k + 1)], dtype=np.intp)


def exchange_round(state: ChainState, rng) -> ChainState:
    cur = state.current
    c, k = cur.shape
    U = state.model.n
    if U <= k:
        return replace(state, round_counter=state.round_counter + 1)
    ranks = np.minimum((rng.random((c, 1)) * (U - k)).astype(np.intp), U - k - 1)
    allowed = np.sort(np.concatenate([cur, complement_elements(cur, ranks)], axis=1), axis=1)
    cands = allowed[:, _drop_one(k)]
    lw = state.model.log_weight_batch(cands.reshape(-1, k)).reshape(c, k + 1)
    w = np.exp(lw - lw.max(axis=1, keepdims=True))
    cdf = np.cumsum(w, axis=1)
    u = (1.0 - rng.random(c)) * cdf[:, -1]
    j = np.minimum((cdf < u[:, None]).sum(axis=1), k)
    new = cands[np.arange(c), j]
    return replace(state, current=new, round_counter=state.round_counter + 1)


def run_chain(state: ChainState, count: int, rng):
    """Advance the chains and collect ``count`` outputs (original ground set).

    Returns ``(samples, state)`` where ``samples`` has shape ``(count, k)``.
    """
    cfg = state.config
    U, k = state.model.n, state.model.k
    rounds = cfg.round_count(state.K, U, state.t)
    if count == 0:
        return np.empty((0, k), dtype=np.intp), state
    if cfg.mode is Mode.DOWN_UP and state.t >= U:
        # T is forced to the whole ground set, so each round is an exact
        # draw independent of the current state.
        draws = state.model.sample_batch(count, rng)
        state = replace(state, current=draws[-state.chains:],
                        round_counter=state.round_counter + rounds * math.ceil(count / state.chains))
    else:
        step = down_up_round if cfg.mode is Mode.DOWN_UP else exchange_round
        outs = []
        for _ in range(math.ceil(count / state.chains)):
            for _ in range(rounds):
                state = step(state, rng)
            outs.append(state.current)
        draws = np.stack(outs).reshape(-1, k)[:count]
    if state.copy_map is not None:
        draws = collapse_batch(draws, state.copy_map)
    return draws, state


def prepare(model, q=None, config=None, rng=None, *, chains=None, start=None) -> ChainState:
    """Subdivide ``model`` according to ``q`` and start the chains."""
    config = config or SparsifierConfig()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    q = as_overestimates(q, model.n)
    cmap = build_copy_map(q)
    if cmap.is_identity:
        chain_model, cmap = model, None
    else:
        chain_model = model.subdivide(cmap)
    if start is not None and cmap is not None:
        start = lift_batch(np.asarray([sorted(start)]), cmap, rng)[0]
    return init_state(chain_model, q, config, rng, copy_map=cmap, chains=chains, start=start)


def draw_samples(model, q=None, config=None, count=1, rng=None) -> np.ndarray:
    """Approximate samples from ``model`` via subdivision and the sparsified chain.

    Returns a ``(count, k)`` array of sorted rows, deterministic given the
    seed (``config.seed`` when ``rng`` is None).
    """
    config = config or SparsifierConfig()
    rng = np.random.default_rng(config.seed if rng is None else rng)
    if count == 0:
        return np.empty((0, model.k), dtype=np.intp)
    state = prepare(model, q, config, rng, chains=min(config.chains, count))
    return run_chain(state, count, rng)[0]


def explicit_transition_matrix(model, t, table=None):
    """One-round transition matrix over the support, built by enumeration.

    Returns ``(P, table)`` where rows/columns follow ``table.sets``.
    """
    table = table or enumerate_distribution(model)
    n, k = model.n, model.k
    if not k < t <= n:
        raise ValueError(f"need k < t <= n, got k={k}, t={t}, n={n}")
    index = {tuple(int(i) for i in s): j for j, s in enumerate(table.sets)}
    P = np.zeros((len(index), len(index)))
    for a, s in enumerate(table.sets):
        s = set(int(i) for i in s)
        comp = [i for i in range(n) if i not in s]
        supersets = list(itertools.combinations(comp, t - k))
        for extra in supersets:
            allowed = sorted(s.union(extra))
            ids = [index[c] for c in itertools.combinations(allowed, k) if c in index]
            w = table.probs[ids]
            P[a, ids] += w / w.sum() / len(supersets)
    return P, table
