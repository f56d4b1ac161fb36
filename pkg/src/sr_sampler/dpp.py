"""k-DPP sampling by spectral decomposition and the elementary-DPP mixture.

A k-DPP with PSD kernel ``L`` puts mass ``det(L[S, S])`` on each k-subset
``S``. Sampling picks k eigenvectors with probability proportional to the
product of their eigenvalues and then draws from the projection DPP they
span, one item at a time.

All samplers work on batches: ``(B, m)`` eigenvalue arrays and
``(B, t, m)`` eigenvector stacks, so many restricted kernels can be
sampled with a handful of numpy calls.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import KHomogeneousModel, as_subset
from .errors import InfeasibleK, NotPSD, NotSymmetric

PIVOT_TOL = 1e-12


def check_kernel(L, sym_tol: float = 1e-10) -> np.ndarray:
    """Return ``L`` as a symmetric float array, or raise NotSymmetric."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise NotSymmetric(f"kernel must be square, got shape {L.shape}")
    if not np.all(np.isfinite(L)):
        raise ValueError("kernel has non-finite entries")
    scale = np.abs(L).max() if L.size else 0.0
    if L.size and np.abs(L - L.T).max() > sym_tol * max(scale, np.finfo(float).tiny):
        raise NotSymmetric("kernel is not symmetric")
    return 0.5 * (L + L.T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a kernel, eigenvalues ascending and clamped at zero.

    ``eigenvectors`` has one column per eigenvalue. Decompositions built
    from a feature factor are thin: the omitted eigenvalues are zero.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clamp_count: int = 0

    @property
    def n(self):
        return self.eigenvectors.shape[0]

    @property
    def rank(self):
        return int(np.count_nonzero(self.eigenvalues > 0))

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _clamp(lam, tol):
    """Zero out eigenvalues at roundoff level; NotPSD below ``-tol * |L|``."""
    lam = np.array(lam, dtype=float)
    norm = np.abs(lam).max(axis=-1, keepdims=True) if lam.size else np.zeros(lam.shape[:-1] + (1,))
    if np.any(lam < -tol * norm):
        raise NotPSD(f"eigenvalue {lam.min():.3g} below -{tol:g} * spectral norm")
    noise = lam.shape[-1] * np.finfo(float).eps * norm
    small = (lam < 0) | (lam <= noise)
    clamped = small & (lam != 0)
    lam[small] = 0.0
    return lam, clamped.sum(axis=-1)


def decompose_kernel(L, tol: float = 1e-8) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition with PSD clamping.

    Eigenvalues in ``[-tol * |L|, 0)`` (and positive ones at roundoff level)
    become 0; anything more negative raises NotPSD.
    """
    L = check_kernel(L)
    lam, vec = np.linalg.eigh(L)
    lam, clamped = _clamp(lam, tol)
    return SpectralDecomposition(lam, vec, int(clamped))


def decompose_features(F, tol: float = 1e-8) -> SpectralDecomposition:
    """Thin decomposition of ``L = F F^T`` through the ``d x d`` dual matrix."""
    F = np.asarray(F, dtype=float)
    lam, w = np.linalg.eigh(F.T @ F)
    lam, clamped = _clamp(lam, tol)
    pos = lam > 0
    vec = np.zeros((F.shape[0], lam.size))
    vec[:, pos] = (F @ w[:, pos]) / np.sqrt(lam[pos])
    return SpectralDecomposition(lam, vec, int(clamped))


@dataclass(frozen=True)
class ElementarySymmetricTable:
    """``e_j(lam_1..lam_m) = mantissa[j, m] * exp(log_scale[m])``.

    Each column is rescaled to max 1, so tables stay finite for large
    ``n`` and eigenvalue ranges far beyond double precision exponents.
    """

    mantissa: np.ndarray
    log_scale: np.ndarray

    def value(self, j, m):
        return self.mantissa[j, m] * np.exp(self.log_scale[m])

    def log_value(self, j, m):
        with np.errstate(divide="ignore"):
            return np.log(self.mantissa[j, m]) + self.log_scale[m]

    def dense(self):
        return self.mantissa * np.exp(self.log_scale)[None, :]


def _esp_batch(lam, k):
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    b, m = lam.shape
    if b == 1:
        # Scalar recurrence: avoids per-column numpy call overhead.
        col, cols, scale = [1.0] + [0.0] * k, [], [1.0]
        cols.append(col)
        for x in lam[0].tolist():
            col = [col[0]] + [col[r] + x * col[r - 1] for r in range(1, k + 1)]
            s = max(col)
            col = [c / s for c in col]
            cols.append(col)
            scale.append(s)
        return np.array(cols).T[None], np.cumsum(np.log(scale))[None]
    cols = np.zeros((m + 1, b, k + 1))
    scale = np.ones((m + 1, b))
    cols[0, :, 0] = 1.0
    lam_t = np.ascontiguousarray(lam.T)
    for j in range(1, m + 1):
        col = cols[j - 1].copy()
        col[:, 1:] += lam_t[j - 1, :, None] * cols[j - 1, :, :-1]
        s = col.max(axis=1)
        cols[j] = col / s[:, None]
        scale[j] = s
    logs = np.cumsum(np.log(scale), axis=0).T
    return cols.transpose(1, 2, 0), np.ascontiguousarray(logs)


def elementary_symmetric_table(lam, k: int) -> ElementarySymmetricTable:
    mant, logs = _esp_batch(np.asarray(lam, dtype=float)[None, :], k)
    return ElementarySymmetricTable(mant[0], logs[0])


def _normalize(lam):
    top = lam.max(axis=-1, keepdims=True)
    return lam / np.where(top > 0, top, 1.0)


def _select_eigenvectors(lam, mant, logs, k, rng):
    """Backward pass over the ESP table; returns ``(B, k)`` column indices."""
    b, m = lam.shape
    rows = np.arange(b)
    rem = np.full(b, k)
    chosen = np.zeros((b, m), dtype=bool)
    u = rng.random((b, m))
    # ratio[:, r-1, i-1] = lam_i e_{r-1}(lam_1..i-1) / e_r(lam_1..i)
    num = lam[:, None, :] * mant[:, :-1, :-1] * np.exp(logs[:, :-1] - logs[:, 1:])[:, None, :]
    den = mant[:, 1:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, 0.0)
    if b == 1:
        # Scalar loop: avoids per-element numpy call overhead.
        table, uu, r, picks = ratio[0].tolist(), u[0].tolist(), k, []
        for i in range(m, 0, -1):
            if r == 0:
                break
            if r >= i or uu[i - 1] < table[r - 1][i - 1]:
                picks.append(i - 1)
                r -= 1
        return np.array(sorted(picks), dtype=np.intp)[None, :]
    for i in range(m, 0, -1):
        active = rem > 0
        if not active.any():
            break
        marg = ratio[rows, np.maximum(rem, 1) - 1, i - 1]
        marg = np.where(rem >= i, 1.0, marg)
        take = active & (u[:, i - 1] < marg)
        chosen[:, i - 1] = take
        rem = rem - take
    return np.nonzero(chosen)[1].reshape(b, k)


def _sample_projection(W, rng):
    """Chain-rule sampling from projection DPPs with orthonormal bases ``W``.

    ``W`` has shape ``(B, n, k)``. After each pick, a Householder reflection
    rotates the basis so one column carries the picked row, and that column
    is dropped; QR re-orthonormalizes every ``max(1, k // 8)`` steps.
    """
    W = np.array(W, dtype=float)
    b, n, k = W.shape
    rows = np.arange(b)
    out = np.empty((b, k), dtype=np.intp)
    picked = np.zeros((b, n), dtype=bool)
    every = max(1, k // 8)
    u = 1.0 - rng.random((b, k))
    for j in range(k):
        w2 = np.einsum("bnr,bnr->bn", W, W)
        w2[picked] = 0.0
        cdf = np.cumsum(w2, axis=1)
        i = np.minimum((cdf < (u[:, j] * cdf[:, -1])[:, None]).sum(axis=1), n - 1)
        out[:, j] = i
        picked[rows, i] = True
        if j == k - 1:
            break
        h = W[rows, i, :].copy()
        alpha = np.linalg.norm(h, axis=1)
        h[:, 0] += np.where(h[:, 0] >= 0, 1.0, -1.0) * alpha
        hh = np.einsum("br,br->b", h, h)
        proj = np.einsum("bnr,br->bn", W, h) * (2.0 / hh)[:, None]
        W = (W - proj[:, :, None] * h[:, None, :])[:, :, 1:]
        if (j + 1) % every == 0:
            W = np.linalg.qr(W)[0]
    return np.sort(out, axis=1)


def _sample_from_stacks(lam, vec, k, rng, group=None):
    """Draw one k-DPP sample per row.

    ``lam`` is ``(G, m)`` and ``vec`` is ``(G, t, m)``; row ``b`` of the
    output uses group ``group[b]`` (default: one row per group).
    """
    lam = _normalize(lam)
    if np.any((lam > 0).sum(axis=1) < k):
        raise InfeasibleK(f"kernel rank below k={k}")
    mant, logs = _esp_batch(lam, k)
    if group is None:
        group = np.arange(lam.shape[0])
    cols = _select_eigenvectors(lam[group], mant[group], logs[group], k, rng)
    t = vec.shape[1]
    W = vec[group[:, None, None], np.arange(t)[None, :, None], cols[:, None, :]]
    return _sample_projection(W, rng)


def sample_kdpp(decomp: SpectralDecomposition, k: int, rng, size=None):
    """Exact k-DPP sample(s) from a spectral decomposition.

    Returns a sorted tuple, or a ``(size, k)`` array when ``size`` is given.
    Raises InfeasibleK when fewer than ``k`` eigenvalues are positive.
    """
    if decomp.rank < k:
        raise InfeasibleK(f"kernel rank {decomp.rank} < k={k}")
    m = 1 if size is None else int(size)
    if m == 0:
        return np.empty((0, k), dtype=np.intp)
    out = _sample_from_stacks(decomp.eigenvalues[None, :], decomp.eigenvectors[None],
                              k, rng, group=np.zeros(m, dtype=np.intp))
    if size is None:
        return tuple(int(i) for i in out[0])
    return out


def sample_kdpp_restricted(L, k: int, allowed, rng) -> tuple:
    """k-DPP sample restricted to ``allowed`` (indices into ``L``)."""
    allowed = np.asarray(sorted(allowed), dtype=np.intp)
    if len(allowed) < k:
        raise InfeasibleK(f"|T| = {len(allowed)} < k={k}")
    L = np.asarray(L, dtype=float)
    decomp = decompose_kernel(L[np.ix_(allowed, allowed)])
    local = sample_kdpp(decomp, k, rng)
    return tuple(int(i) for i in allowed[list(local)])


def logdet_pivoted(mats, rel_tol: float = PIVOT_TOL) -> np.ndarray:
    """Batched log-determinants of PSD matrices by diagonally pivoted
    Cholesky elimination. A pivot at or below ``rel_tol * max(diag)``
    makes the result ``-inf``.

    Matrices with ``det > 10 rel_tol max(diag)^k`` cannot have such a pivot
    (every pivot is at most ``max(diag)``), so they go through LAPACK
    ``slogdet``; only the rest are eliminated by hand.
    """
    A = np.array(mats, dtype=float)
    single = A.ndim == 2
    if single:
        A = A[None]
    b, k, _ = A.shape
    if k == 0 or b == 0:
        out = np.zeros(b)
        return out[0] if single else out
    scale = np.diagonal(A, axis1=1, axis2=2).max(axis=1)
    sign, logdet = np.linalg.slogdet(A)
    with np.errstate(divide="ignore"):
        bound = np.log(10 * rel_tol) + k * np.log(np.where(scale > 0, scale, 0.0))
    slow = ~((sign > 0) & (scale > 0) & (logdet > bound))
    if slow.any():
        logdet[slow] = _logdet_eliminate(A[slow], rel_tol)
    return logdet[0] if single else logdet


def _logdet_eliminate(A, rel_tol):
    b, k, _ = A.shape
    rows = np.arange(b)
    logdet = np.zeros(b)
    scale = np.diagonal(A, axis1=1, axis2=2).max(axis=1)
    dead = ~(scale > 0)
    done = np.zeros((b, k), dtype=bool)
    for _ in range(k):
        d = np.diagonal(A, axis1=1, axis2=2).copy()
        d[done] = -np.inf
        p = np.argmax(d, axis=1)
        piv = d[rows, p]
        bad = ~(piv > rel_tol * scale)
        dead |= bad
        safe = np.where(bad, 1.0, piv)
        logdet += np.log(safe)
        col = A[rows, :, p]
        A -= col[:, :, None] * col[:, None, :] / safe[:, None, None]
        done[rows, p] = True
    logdet[dead] = -np.inf
    return logdet


def log_weight_dpp(L, subset) -> float:
    """``log det(L[S, S])``, or ``-inf`` when the submatrix is singular."""
    idx = np.asarray(subset, dtype=np.intp)
    L = np.asarray(L, dtype=float)
    return float(logdet_pivoted(L[np.ix_(idx, idx)]))


def kdpp_marginals(decomp: SpectralDecomposition, k: int) -> np.ndarray:
    """Inclusion probabilities of the k-DPP.

    ``p_i = sum_j V[i, j]^2 lam_j e_{k-1}(lam without j) / e_k(lam)``.
    """
    if decomp.rank < k:
        raise InfeasibleK(f"kernel rank {decomp.rank} < k={k}")
    pos = decomp.eigenvalues > 0
    lam = _normalize(decomp.eigenvalues[pos][None, :])[0]
    V = decomp.eigenvectors[:, pos]
    m = lam.size
    full = elementary_symmetric_table(lam, k)
    if m == 1:
        log_loo = np.zeros(1)
    else:
        others = np.array([np.delete(lam, j) for j in range(m)])
        mant, logs = _esp_batch(others, k - 1)
        with np.errstate(divide="ignore"):
            log_loo = np.log(mant[:, k - 1, m - 1]) + logs[:, m - 1]
    coef = lam * np.exp(log_loo - full.log_value(k, m))
    return np.clip((V * V) @ coef, 0.0, 1.0)


class KernelDPP(KHomogeneousModel):
    """k-DPP model from a dense kernel ``L`` or a feature factor
    ``features`` with ``L = F F^T``.
    """

    def __init__(self, L=None, k: int = 1, *, features=None, tol: float = 1e-8,
                 _checked: bool = False):
        if (L is None) == (features is None):
            raise ValueError("give exactly one of L or features")
        if L is not None:
            self.L = np.asarray(L, dtype=float) if _checked else check_kernel(L)
            self.features = None
            self.n = self.L.shape[0]
        else:
            self.features = np.atleast_2d(np.asarray(features, dtype=float))
            self.L = None
            self.n = self.features.shape[0]
        if not 1 <= k <= self.n:
            raise ValueError(f"k={k} outside [1, {self.n}]")
        self.k = int(k)
        self.tol = tol

    def __repr__(self):
        form = "L" if self.L is not None else f"features d={self.features.shape[1]}"
        return f"KernelDPP(n={self.n}, k={self.k}, {form})"

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        if self.L is not None:
            return decompose_kernel(self.L, self.tol)
        return decompose_features(self.features, self.tol)

    def kernel(self, rows, cols=None):
        rows = np.asarray(rows, dtype=np.intp)
        cols = rows if cols is None else np.asarray(cols, dtype=np.intp)
        if self.L is not None:
            return self.L[rows[..., :, None], cols[..., None, :]]
        return self.features[rows] @ np.swapaxes(self.features[cols], -1, -2)

    def dense_kernel(self):
        return self.L if self.L is not None else self.features @ self.features.T

    def log_weight(self, subset):
        s = as_subset(subset, self.n, self.k)
        return float(logdet_pivoted(self.kernel(s)))

    def log_weight_batch(self, sets):
        sets = np.asarray(sets, dtype=np.intp)
        if len(sets) == 0:
            return np.empty(0)
        return logdet_pivoted(self.kernel(sets))

    def sample_restricted(self, allowed, rng):
        out = self.sample_restricted_batch(np.asarray(sorted(allowed), dtype=np.intp)[None, :], rng)
        return tuple(int(i) for i in out[0])

    def sample_restricted_batch(self, allowed, rng, chunk_elems: int = 20_000_000):
        allowed = np.sort(np.asarray(allowed, dtype=np.intp), axis=1)
        b, t = allowed.shape
        if t < self.k:
            raise InfeasibleK(f"|T| = {t} < k={self.k}")
        if t == self.n:
            d = self.decomposition
            lam, vec = d.eigenvalues[None, :], d.eigenvectors[None]
            group = np.zeros(b, dtype=np.intp)
            uniq = np.arange(self.n)[None, :]
        else:
            uniq, group = np.unique(allowed, axis=0, return_inverse=True)
            group = group.ravel()
            lam, vec = np.linalg.eigh(self.kernel(uniq))
            lam, _ = _clamp(lam, self.tol)
        out = np.empty((b, self.k), dtype=np.intp)
        step = max(1, chunk_elems // max(1, t * self.k))
        for lo in range(0, b, step):
            g = group[lo:lo + step]
            local = _sample_from_stacks(lam, vec, self.k, rng, group=g)
            out[lo:lo + step] = np.take_along_axis(uniq[g], local, axis=1)
        return out

    def sample_batch(self, count, rng, chunk_elems: int = 20_000_000):
        step = max(1, chunk_elems // max(1, self.n * self.k))
        return np.concatenate([sample_kdpp(self.decomposition, self.k, rng, size=min(step, count - lo))
                               for lo in range(0, count, step)] or [np.empty((0, self.k), dtype=np.intp)])

    def restrict(self, indices):
        idx = np.asarray(sorted(indices), dtype=np.intp)
        if len(idx) < self.k:
            raise InfeasibleK(f"restriction to {len(idx)} elements cannot hold k={self.k}")
        if self.L is not None:
            sub = KernelDPP(self.L[np.ix_(idx, idx)], self.k, tol=self.tol, _checked=True)
        else:
            sub = KernelDPP(features=self.features[idx], k=self.k, tol=self.tol)
        if sub.decomposition.rank < self.k:
            raise InfeasibleK(f"restricted kernel has rank {sub.decomposition.rank} < k={self.k}")
        return sub

    def subdivide(self, copy_map):
        """Copy kernel ``L'[a, b] = L[i, j] / sqrt(t_i t_j)`` for copies a of i, b of j."""
        origin = copy_map.origin
        scale = 1.0 / np.sqrt(copy_map.t[origin])
        if self.L is not None:
            L = self.L[np.ix_(origin, origin)] * np.outer(scale, scale)
            return KernelDPP(L, self.k, tol=self.tol, _checked=True)
        return KernelDPP(features=self.features[origin] * scale[:, None], k=self.k, tol=self.tol)
