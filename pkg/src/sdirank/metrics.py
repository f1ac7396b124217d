"""Evaluation measures for a selected subset.

Subsets are given as catalog item indices and must lie in the pool.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .catalog import Catalog
from .relevance import CandidatePool

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class MetricsReport:
    cr: float
    ndcg10: float
    alpha_ndcg: float
    variance: float
    wall_ms: float = float("nan")

    def as_dict(self) -> dict:
        return asdict(self)


def _aspect_cols(catalog: Catalog, aspects: Sequence[str] | None) -> list[int]:
    names = catalog.aspect_names if aspects is None else aspects
    return [catalog.aspect_index(a) for a in names]


def coverage_rate(
    catalog: Catalog,
    pool: CandidatePool,
    subset: Sequence[int],
    aspects: Sequence[str] | None = None,
    reference: str = "pool",
) -> float:
    """Mean over aspects of ``|values covered| / min(|subset|, |values available|)``.

    Available values are counted over the pool (``reference="pool"``) or the
    whole catalog (``"catalog"``). Aspects with no available value are left
    out of the mean.
    """
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("coverage of an empty subset is undefined")
    if reference == "pool":
        ref_rows = catalog.codes[pool.items]
    elif reference == "catalog":
        ref_rows = catalog.codes
    else:
        raise ValueError(f"unknown reference {reference!r}")
    sub_rows = catalog.codes[subset]
    ratios = []
    for p in _aspect_cols(catalog, aspects):
        available = len(np.unique(ref_rows[:, p][ref_rows[:, p] >= 0]))
        if available == 0:
            continue
        covered = len(np.unique(sub_rows[:, p][sub_rows[:, p] >= 0]))
        ratios.append(covered / min(len(subset), available))
    return float(np.mean(ratios)) if ratios else 0.0


def _rank_by_relevance(pool: CandidatePool, subset: Sequence[int]) -> np.ndarray:
    # pool positions are already in descending relevance order
    return np.sort(pool.positions(subset))


def _dcg(gains: np.ndarray) -> float:
    ranks = np.arange(1, len(gains) + 1)
    return float((gains / np.log2(ranks + 1)).sum())


def ndcg_at_10(pool: CandidatePool, subset: Sequence[int], depth: int = 10) -> float:
    """NDCG of the subset re-sorted by relevance, gains = normalized scores."""
    pos = _rank_by_relevance(pool, subset)[:depth]
    dcg = _dcg(pool.norm_scores[pos])
    idcg = _dcg(np.sort(pool.norm_scores)[::-1][: len(pos)])
    if idcg == 0:
        return 1.0
    return dcg / idcg


def _subtopics(catalog: Catalog, items: np.ndarray) -> list[list[tuple[int, int]]]:
    rows = catalog.codes[items]
    return [[(p, int(c)) for p, c in enumerate(row) if c >= 0] for row in rows]


def alpha_dcg(topics: Sequence[Sequence[tuple[int, int]]], alpha: float) -> float:
    """alpha-DCG of a ranked list given each document's (aspect, value) subtopics."""
    seen: dict[tuple[int, int], int] = {}
    total = 0.0
    for rank, doc in enumerate(topics, start=1):
        gain = 0.0
        for t in doc:
            c = seen.get(t, 0)
            gain += (1.0 - alpha) ** c
            seen[t] = c + 1
        total += gain / math.log2(rank + 1)
    return total


def greedy_ideal_order(topics: Sequence[Sequence[tuple[int, int]]], depth: int, alpha: float) -> list[int]:
    """Greedy approximation to the alpha-DCG ideal ranking (positions into ``topics``)."""
    seen: dict[tuple[int, int], int] = {}
    left = list(range(len(topics)))
    order = []
    for _ in range(min(depth, len(topics))):
        best, best_gain = None, -1.0
        for j in left:
            gain = sum((1.0 - alpha) ** seen.get(t, 0) for t in topics[j])
            if gain > best_gain:
                best, best_gain = j, gain
        order.append(best)
        left.remove(best)
        for t in topics[best]:
            seen[t] = seen.get(t, 0) + 1
    return order


def alpha_ndcg(
    catalog: Catalog,
    pool: CandidatePool,
    subset: Sequence[int],
    alpha: float = DEFAULT_ALPHA,
    depth: int = 10,
) -> float:
    """alpha-NDCG with (aspect, value) pairs as subtopics.

    The ideal is the greedy ranking over the pool. Greedy can fall short of
    the true ideal, so the subset's own ranking, itself a feasible ideal
    candidate, bounds it from below and keeps the ratio within [0, 1].
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    pos = _rank_by_relevance(pool, subset)[:depth]
    if len(pos) == 0:
        return 0.0
    dcg = alpha_dcg(_subtopics(catalog, pool.items[pos]), alpha)
    pool_topics = _subtopics(catalog, pool.items)
    ideal_order = greedy_ideal_order(pool_topics, len(pos), alpha)
    ideal = max(alpha_dcg([pool_topics[j] for j in ideal_order], alpha), dcg)
    if ideal == 0:
        return 1.0
    return dcg / ideal


def evenness_variance(catalog: Catalog, subset: Sequence[int], aspects: Sequence[str] | None = None) -> float:
    """Average over aspects of the population variance of per-value counts.

    Only values present in the subset enter the count vector; aspects with
    no present value are skipped.
    """
    rows = catalog.codes[np.asarray(subset, dtype=np.int64)]
    variances = []
    for p in _aspect_cols(catalog, aspects):
        col = rows[:, p]
        col = col[col >= 0]
        if col.size == 0:
            continue
        counts = np.unique(col, return_counts=True)[1]
        variances.append(float(np.var(counts)))
    return float(np.mean(variances)) if variances else 0.0


def evaluate(
    catalog: Catalog,
    pool: CandidatePool,
    subset: Sequence[int],
    wall_ms: float = float("nan"),
    alpha: float = DEFAULT_ALPHA,
) -> MetricsReport:
    return MetricsReport(
        cr=coverage_rate(catalog, pool, subset),
        ndcg10=ndcg_at_10(pool, subset),
        alpha_ndcg=alpha_ndcg(catalog, pool, subset, alpha),
        variance=evenness_variance(catalog, subset),
        wall_ms=wall_ms,
    )
