"""Determinantal point process baselines.

Kernel: ``L = diag(q) S diag(q)`` with ``S_ij`` the fraction of aspects on
which items i and j share a (present) value and ``S_ii = 1``, and quality
``q_i = exp(alpha * relevance_i)`` where ``alpha = theta / (1 - theta)``.
All selectors return pool positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .catalog import Catalog
from .diversity import match_matrix
from .relevance import CandidatePool

JITTER = 1e-8
MAX_ALPHA = 20.0
# gains within this relative tolerance of the best count as ties (lowest index wins)
TIE_RTOL = 1e-9
# a candidate whose gain det(L_{Y+i}) / det(L_Y) is below this fraction of
# L_ii lies numerically in the span of Y and is treated as degenerate
DEGEN_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class DppKernel:
    """PSD kernel over pool positions.

    ``relevance_only`` marks the theta = 1 endpoint, where every selector
    returns the relevance top-k without touching ``l``.
    """

    l: np.ndarray
    theta: float
    relevance_only: bool = False

    @property
    def n(self) -> int:
        return self.l.shape[0]

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        vals, vecs = np.linalg.eigh(self.l)
        return np.clip(vals, 0.0, None), vecs


def similarity_matrix(catalog: Catalog, pool: CandidatePool, normalize: bool = True) -> np.ndarray:
    codes = catalog.codes[pool.items]
    n_aspects = max(1, codes.shape[1])
    shared = np.zeros((len(pool), len(pool)))
    for p in range(codes.shape[1]):
        shared += match_matrix(codes[:, p])
    if normalize:
        shared /= n_aspects
        np.fill_diagonal(shared, 1.0)
    else:
        np.fill_diagonal(shared, float(n_aspects))
    return shared


def quality_scale(theta: float) -> float:
    if theta >= 1.0:
        return MAX_ALPHA
    return min(MAX_ALPHA, max(0.0, theta / (1.0 - theta)))


def build_kernel(catalog: Catalog, pool: CandidatePool, theta: float, normalize: bool = True) -> DppKernel:
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    sim = similarity_matrix(catalog, pool, normalize)
    quality = np.exp(quality_scale(theta) * pool.norm_scores)
    l = quality[:, None] * sim * quality[None, :] + JITTER * np.eye(len(pool))
    return DppKernel(l, float(theta), relevance_only=theta >= 1.0)


def _check_k(kernel: DppKernel, k: int) -> None:
    if not 1 <= k <= kernel.n:
        raise ValueError(f"k={k} outside [1, {kernel.n}]")


def _fill_by_diagonal(kernel: DppKernel, selected: list[int], k: int) -> list[int]:
    # once every candidate is degenerate, take the largest remaining diagonals
    diag = np.diag(kernel.l).copy()
    diag[selected] = -np.inf
    order = np.argsort(-diag, kind="stable")
    return selected + [int(i) for i in order[: k - len(selected)]]


def greedy_dpp(kernel: DppKernel, k: int) -> list[int]:
    """Greedy MAP: repeatedly add the item maximizing ``det(L_Y)``.

    Each step evaluates the determinant of every candidate's enlarged
    submatrix from scratch.
    """
    _check_k(kernel, k)
    if kernel.relevance_only:
        return list(range(k))
    l = kernel.l
    n = kernel.n
    log_diag = np.log(np.maximum(np.diag(l), np.finfo(float).tiny))
    selected: list[int] = []
    current = 0.0  # log det(L_Y)
    for _ in range(k):
        rest = np.array([i for i in range(n) if i not in selected], dtype=np.int64)
        idx = np.empty((len(rest), len(selected) + 1), dtype=np.int64)
        idx[:, :-1] = selected
        idx[:, -1] = rest
        subs = l[idx[:, :, None], idx[:, None, :]]
        sign, logdet = np.linalg.slogdet(subs)
        ok = (sign > 0) & (logdet - current - log_diag[rest] > math.log(DEGEN_RTOL))
        logdet = np.where(ok, logdet, -np.inf)
        top = logdet.max()
        if np.isneginf(top):
            return _fill_by_diagonal(kernel, selected, k)
        best = int(np.flatnonzero(logdet >= top + math.log1p(-TIE_RTOL))[0])
        selected.append(int(rest[best]))
        current = float(logdet[best])
    return selected


def fast_map_dpp(kernel: DppKernel, k: int, eps: float = 0.0) -> list[int]:
    """Greedy MAP via incremental Cholesky updates, O(n k) per step.

    ``d2[i]`` is the squared Cholesky pivot the item would get if added next,
    i.e. ``det(L_{Y+i}) / det(L_Y)``; the greedy choice is its argmax.
    """
    _check_k(kernel, k)
    if kernel.relevance_only:
        return list(range(k))
    l = kernel.l
    n = kernel.n
    cis = np.zeros((k, n))
    diag = np.diag(l).astype(float)
    d2 = diag.copy()
    selected: list[int] = []
    active = np.ones(n, dtype=bool)
    while len(selected) < k:
        scores = np.where(active & (d2 > eps) & (d2 > DEGEN_RTOL * diag), d2, -np.inf)
        top = scores.max()
        if np.isneginf(top):
            return _fill_by_diagonal(kernel, selected, k)
        j = int(np.flatnonzero(scores >= top * (1.0 - TIE_RTOL))[0])
        m = len(selected)
        e = (l[j, :] - cis[:m, j] @ cis[:m, :]) / math.sqrt(d2[j])
        cis[m, :] = e
        d2 = d2 - e * e
        selected.append(j)
        active[j] = False
    return selected


def elementary_symmetric(vals: np.ndarray, k: int) -> np.ndarray:
    """Table ``E[l, m] = e_l(vals[:m])`` for ``l <= k``, ``m <= n``."""
    n = len(vals)
    e = np.zeros((k + 1, n + 1))
    e[0, :] = 1.0
    for m in range(1, n + 1):
        e[1:, m] = e[1:, m - 1] + vals[m - 1] * e[:-1, m - 1]
    return e


def kdpp_sample(kernel: DppKernel, k: int, seed: int | np.random.Generator | None = 0) -> list[int]:
    """Exact sample from the k-DPP defined by ``kernel``.

    Phase one picks k eigenvectors with the elementary symmetric polynomial
    recursion; phase two draws one item per eigenvector from the projection
    DPP they span. Eigenvalues are rescaled by their maximum first, which
    leaves the selection probabilities unchanged and keeps ``E`` finite.
    """
    _check_k(kernel, k)
    if kernel.relevance_only:
        return list(range(k))
    rng = np.random.default_rng(seed)
    vals, vecs = kernel.eig
    n = kernel.n
    if k == n:
        return list(range(n))
    scaled = vals / vals.max()
    e = elementary_symmetric(scaled, k)

    chosen = []
    remaining = k
    for m in range(n, 0, -1):
        if remaining == 0:
            break
        if m == remaining:
            marginal = 1.0
        else:
            marginal = scaled[m - 1] * e[remaining - 1, m - 1] / e[remaining, m]
        if rng.random() < marginal:
            chosen.append(m - 1)
            remaining -= 1

    v = vecs[:, chosen]
    items: list[int] = []
    for _ in range(k):
        probs = (v ** 2).sum(axis=1)
        probs[items] = 0.0
        probs /= probs.sum()
        i = int(rng.choice(n, p=probs))
        items.append(i)
        if v.shape[1] == 1:
            break
        j = int(np.argmax(np.abs(v[i, :])))
        vj = v[:, j].copy()
        v = np.delete(v, j, axis=1)
        v = v - np.outer(vj, v[i, :] / vj[i])
        v, _ = np.linalg.qr(v)
    return items
