"""Simpson's diversity index and the quadratic selection objective.

For a selected set S' of size k and an aspect p, the self-pair Simpson
index counts matching unordered pairs ``i <= j`` (each item paired with
itself included) over the ``k(k+1)/2`` such pairs. Writing ``n_v`` for the
number of selected items carrying value ``v`` this is

    D(p, S') = sum_v n_v (n_v + 1) / (k (k + 1)).

Aspects are combined as ``H(S') = sum_p phi_p D(p, S')`` with
``phi_p = omega_p / D(p, S)`` and ``S`` the candidate pool, and H is written
as ``1/2 x^T Q x`` over the 0/1 selection indicator ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .catalog import Catalog
from .relevance import CandidatePool


def sdi_classic(counts: Mapping[str, int] | Sequence[int]) -> float:
    """Probability two items drawn without replacement share a class."""
    n = np.asarray(list(counts.values()) if isinstance(counts, Mapping) else list(counts), dtype=float)
    total = n.sum()
    if total < 2:
        raise ValueError("Simpson index needs at least two items")
    return float((n * (n - 1)).sum() / (total * (total - 1)))


def sdi_self_pair_counts(counts: Mapping[str, int] | Sequence[int], size: int | None = None) -> float:
    """Self-pair index from value counts.

    ``size`` is the set size including items with a missing value; it
    defaults to the sum of the counts.
    """
    n = np.asarray(list(counts.values()) if isinstance(counts, Mapping) else list(counts), dtype=float)
    m = n.sum() if size is None else size
    if m < 1:
        raise ValueError("self-pair index needs a non-empty set")
    return float((n * (n + 1)).sum() / (m * (m + 1)))


def _value_counts(codes: np.ndarray) -> np.ndarray:
    present = codes[codes >= 0]
    if present.size == 0:
        return np.zeros(0)
    return np.bincount(present).astype(float)


def sdi_self_pair(catalog: Catalog, subset: Sequence[int], aspect: str) -> float:
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("self-pair index needs a non-empty subset")
    return sdi_self_pair_counts(_value_counts(catalog.aspect_codes(aspect, subset)), len(subset))


@dataclass(frozen=True, eq=False)
class AspectWeighting:
    """Per-aspect weights, aligned with ``aspects``."""

    aspects: tuple[str, ...]
    omega: np.ndarray
    base_sdi: np.ndarray
    phi: np.ndarray
    k_top: np.ndarray
    k: int
    pool: CandidatePool


def compute_weights(catalog: Catalog, pool: CandidatePool, k: int) -> AspectWeighting:
    """Aspect weights for selecting ``k`` items from ``pool``.

    ``omega_p = 1 - (k_p - 1)/(k - 1)`` where ``k_p`` is the size of the most
    common value among the ``k`` most relevant items; an aspect dominated by
    one value in the top results (the query already pins it down) is
    down-weighted. Missing values never count toward ``k_p``; when none of
    the top items has the aspect ``k_p`` is taken as 1.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(pool) < k:
        raise ValueError(f"pool has {len(pool)} items, fewer than k={k}")
    n_aspects = len(catalog.aspect_names)
    omega = np.zeros(n_aspects)
    base = np.zeros(n_aspects)
    phi = np.zeros(n_aspects)
    k_top = np.zeros(n_aspects, dtype=np.int64)
    pool_codes = catalog.codes[pool.items]
    for p in range(n_aspects):
        top = _value_counts(pool_codes[:k, p])
        k_top[p] = max(1, int(top.max())) if top.size else 1
        omega[p] = 1.0 - (k_top[p] - 1) / (k - 1)
        counts = _value_counts(pool_codes[:, p])
        if counts.size == 0:
            continue
        base[p] = sdi_self_pair_counts(counts, len(pool))
        phi[p] = omega[p] / base[p]
    return AspectWeighting(catalog.aspect_names, omega, base, phi, k_top, k, pool)


def match_matrix(codes: np.ndarray) -> np.ndarray:
    """0/1 matrix of equal, present values (missing never matches)."""
    present = codes >= 0
    return ((codes[:, None] == codes[None, :]) & present[:, None] & present[None, :]).astype(float)


@dataclass(frozen=True, eq=False)
class QuadraticProgram:
    """``min 1/2 x^T q x + b^T x`` over ``x in {0,1}^n`` with ``sum x = k``.

    ``diag_slack`` is a nonnegative vector ``d`` with ``q - diag(d)`` still
    PSD. Since ``x_i^2 = x_i`` on binary points, moving ``d`` from the
    quadratic to the linear term leaves the binary problem unchanged while
    tightening its convex relaxation.
    """

    q: np.ndarray
    b: np.ndarray
    k: int
    theta: float
    pool: CandidatePool | None = None
    diag_slack: np.ndarray | None = None

    def relaxed_form(self) -> tuple[np.ndarray, np.ndarray]:
        """(q, b) of the tightest available relaxation, equal on binary points."""
        if self.diag_slack is None:
            return self.q, self.b
        d = self.diag_slack
        return self.q - np.diag(d), self.b + 0.5 * d

    @property
    def n(self) -> int:
        return len(self.b)

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.q @ x + self.b @ x)

    def relaxed_objective(self, x: np.ndarray) -> float:
        q, b = self.relaxed_form()
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ q @ x + b @ x)

    def subset_value(self, positions: Sequence[int]) -> tuple[float, float]:
        """(diversity part, relevance part) for a subset of pool positions."""
        pos = np.asarray(positions, dtype=np.int64)
        h = 0.5 * float(self.q[np.ix_(pos, pos)].sum())
        r = float(self.b[pos].sum())
        return h, r


def build_qp(
    catalog: Catalog,
    pool: CandidatePool,
    weights: AspectWeighting,
    k: int,
    theta: float,
) -> QuadraticProgram:
    """Assemble Q and b for trade-off ``theta`` (0 = diversity only, 1 = relevance only).

    Off-diagonal ``Q_ij = (1-theta) * 2/(k(k+1)) * sum_p phi_p [a_pi == a_pj]``.
    The diagonal holds twice the self-pair term so that ``1/2 x^T Q x`` sums
    each unordered pair ``i <= j`` exactly once.

    ``b_i = -theta * relevance_i / k``: the relevance term is the mean
    normalized relevance of the selected set, negated for minimization, so
    it lives on the same per-set scale as the Simpson indices in H.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if weights.pool is not pool or weights.k != k:
        raise ValueError("weights were computed for a different pool or k")
    codes = catalog.codes[pool.items]
    n = len(pool)
    gram = np.zeros((n, n))
    for p, phi in enumerate(weights.phi):
        if phi > 0:
            gram += phi * match_matrix(codes[:, p])
    scale = (1.0 - theta) * 2.0 / (k * (k + 1))
    q = scale * (gram + np.diag(np.diag(gram)))
    b = -theta * pool.norm_scores.astype(float) / k
    # q minus its extra diagonal copy is scale * gram, a Gram matrix
    return QuadraticProgram(q, b, k, float(theta), pool, diag_slack=scale * np.diag(gram))


def dump_qp(qp: QuadraticProgram, path: str | Path) -> None:
    """Write Q (row-major) followed by b as space-separated text."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={qp.n} k={qp.k} theta={qp.theta!r}\n")
        for row in qp.q:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        fh.write(" ".join(repr(float(v)) for v in qp.b) + "\n")
