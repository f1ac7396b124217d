"""Exhaustive reference solvers for small instances."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .baselines import DppKernel
from .catalog import Catalog
from .diversity import AspectWeighting, QuadraticProgram
from .relevance import CandidatePool

MAX_SUBSETS = 10**6
_CHUNK = 20000


class OracleTooLarge(ValueError):
    pass


def check_size(n: int, k: int) -> None:
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    count = math.comb(n, k)
    if count > MAX_SUBSETS:
        raise OracleTooLarge(f"C({n},{k}) = {count} subsets exceeds the cap of {MAX_SUBSETS}")


def _chunks(n: int, k: int):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), k)


def brute_force_bqp(qp: QuadraticProgram) -> tuple[tuple[int, ...], float]:
    """Minimum of ``1/2 x^T Q x + b^T x`` over all k-subsets (pool positions).

    Ties go to the lexicographically first subset.
    """
    check_size(qp.n, qp.k)
    best, best_t = None, math.inf
    for block in _chunks(qp.n, qp.k):
        sub = qp.q[block[:, :, None], block[:, None, :]]
        t = 0.5 * sub.sum(axis=(1, 2)) + qp.b[block].sum(axis=1)
        j = int(np.argmin(t))
        if t[j] < best_t:
            best, best_t = tuple(int(i) for i in block[j]), float(t[j])
    return best, best_t


def brute_force_dpp(kernel: DppKernel, k: int) -> tuple[tuple[int, ...], float]:
    """Maximum log-determinant k-subset; ties go to the lexicographically first."""
    check_size(kernel.n, k)
    best, best_ld = None, -math.inf
    for block in _chunks(kernel.n, k):
        sub = kernel.l[block[:, :, None], block[:, None, :]]
        sign, ld = np.linalg.slogdet(sub)
        ld = np.where(sign > 0, ld, -np.inf)
        j = int(np.argmax(ld))
        if ld[j] > best_ld:
            best, best_ld = tuple(int(i) for i in block[j]), float(ld[j])
    return best, best_ld


def direct_sdi(catalog: Catalog, items: Sequence[int], aspect: int) -> float:
    """Self-pair Simpson index by enumerating every pair ``i <= j``."""
    codes = catalog.codes[np.asarray(items, dtype=np.int64), aspect]
    m = len(codes)
    matches = 0
    for a in range(m):
        for b in range(a, m):
            if codes[a] >= 0 and codes[a] == codes[b]:
                matches += 1
    return 2.0 * matches / (m * (m + 1))


def direct_sdi_batch(codes: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """:func:`direct_sdi` for many equal-size subsets of one aspect column.

    ``codes`` is the aspect's code vector, ``subsets`` a ``(C, m)`` index array.
    """
    m = subsets.shape[1]
    c = codes[subsets]
    a, b = np.triu_indices(m)
    matches = ((c[:, a] == c[:, b]) & (c[:, a] >= 0)).sum(axis=1)
    return 2.0 * matches / (m * (m + 1))


def direct_objective(
    catalog: Catalog,
    pool: CandidatePool,
    weights: AspectWeighting,
    positions: Sequence[int],
    theta: float,
) -> float:
    """``(1-theta) sum_p phi_p D(p, S') - theta * mean relevance``, without Q."""
    items = pool.items[np.asarray(positions, dtype=np.int64)]
    h = sum(
        phi * direct_sdi(catalog, items, p) for p, phi in enumerate(weights.phi) if phi > 0
    )
    r = -float(pool.norm_scores[np.asarray(positions, dtype=np.int64)].mean())
    return (1.0 - theta) * h + theta * r


def brute_force_direct(
    catalog: Catalog,
    pool: CandidatePool,
    weights: AspectWeighting,
    k: int,
    theta: float,
) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum of :func:`direct_objective`; slow, for cross-checks."""
    check_size(len(pool), k)
    best, best_t = None, math.inf
    for subset in itertools.combinations(range(len(pool)), k):
        t = direct_objective(catalog, pool, weights, subset, theta)
        if t < best_t - 1e-12:
            best, best_t = subset, t
    return best, best_t


def exhaustive_alpha_ideal(topics, depth: int, alpha: float) -> float:
    """Exact ideal alpha-DCG: best ordered selection of ``depth`` documents."""
    from .metrics import alpha_dcg

    depth = min(depth, len(topics))
    if math.perm(len(topics), depth) > MAX_SUBSETS:
        raise OracleTooLarge("too many orderings")
    return max(
        alpha_dcg([topics[j] for j in seq], alpha)
        for seq in itertools.permutations(range(len(topics)), depth)
    )
