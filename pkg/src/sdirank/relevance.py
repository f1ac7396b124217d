"""Okapi BM25 scoring and per-query candidate pools."""

from __future__ import annotations

import math
import re
import weakref
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .catalog import Catalog

_TOKEN = re.compile(r"\w+", re.UNICODE)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_POOL_SIZE = 100


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.casefold())


class BM25Index:
    """Inverted index over ``Item.text`` with Okapi BM25 scoring.

    IDF uses the non-negative form ``log(1 + (N - df + 0.5) / (df + 0.5))``
    so every score is >= 0.
    """

    def __init__(self, catalog: Catalog, k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.k1 = k1
        self.b = b
        self.n_docs = len(catalog)
        self.doc_len = np.zeros(self.n_docs)
        self.postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        acc: dict[str, tuple[list[int], list[int]]] = {}
        for i, item in enumerate(catalog.items):
            tf = Counter(tokenize(item.text))
            self.doc_len[i] = sum(tf.values())
            for term, count in tf.items():
                docs, freqs = acc.setdefault(term, ([], []))
                docs.append(i)
                freqs.append(count)
        for term, (docs, freqs) in acc.items():
            self.postings[term] = (np.array(docs, dtype=np.int64), np.array(freqs, dtype=float))
        self.avgdl = float(self.doc_len.mean()) if self.n_docs else 0.0

    def idf(self, term: str) -> float:
        df = len(self.postings[term][0]) if term in self.postings else 0
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    def scores(self, query: str) -> np.ndarray:
        out = np.zeros(self.n_docs)
        if self.avgdl == 0:
            return out
        norm = self.k1 * (1.0 - self.b + self.b * self.doc_len / self.avgdl)
        for term in dict.fromkeys(tokenize(query)):
            if term not in self.postings:
                continue
            docs, tf = self.postings[term]
            out[docs] += self.idf(term) * tf * (self.k1 + 1.0) / (tf + norm[docs])
        return out


_indexes: "weakref.WeakKeyDictionary[Catalog, dict]" = weakref.WeakKeyDictionary()


def get_index(catalog: Catalog, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> BM25Index:
    per_catalog = _indexes.setdefault(catalog, {})
    if (k1, b) not in per_catalog:
        per_catalog[(k1, b)] = BM25Index(catalog, k1, b)
    return per_catalog[(k1, b)]


def bm25_score(catalog: Catalog, query: str, item: int, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> float:
    return float(get_index(catalog, k1, b).scores(query)[item])


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """Top-N items for one query, in descending score order.

    ``items`` holds catalog indices; the score arrays are aligned with it,
    so position ``j`` in the pool is item ``items[j]``.
    """

    query: str
    items: np.ndarray
    raw_scores: np.ndarray
    norm_scores: np.ndarray

    def __len__(self) -> int:
        return len(self.items)

    def positions(self, subset) -> np.ndarray:
        """Map catalog indices to pool positions."""
        lookup = {int(i): j for j, i in enumerate(self.items)}
        try:
            return np.array([lookup[int(i)] for i in subset], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"item {exc.args[0]} is not in the candidate pool") from None

    @classmethod
    def from_scores(cls, query: str, items, scores) -> "CandidatePool":
        """Build a pool from parallel item/score arrays (sorted here)."""
        items = np.asarray(items, dtype=np.int64)
        scores = np.asarray(scores, dtype=float)
        order = np.lexsort((items, -scores))
        items, scores = items[order], scores[order]
        return cls(query, items, scores, minmax(scores))


def minmax(scores: np.ndarray) -> np.ndarray:
    if len(scores) == 0:
        return scores.copy()
    lo, hi = scores.min(), scores.max()
    if hi == lo:
        return np.ones_like(scores)
    return (scores - lo) / (hi - lo)


def build_pool(
    catalog: Catalog,
    query: str,
    pool_size: int = DEFAULT_POOL_SIZE,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    drop_zero: bool = False,
) -> CandidatePool:
    """Rank the catalog for ``query`` and keep the top ``pool_size`` items.

    With ``drop_zero`` items sharing no term with the query are excluded,
    which can leave the pool empty.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    if len(catalog) == 0:
        raise ValueError("cannot build a pool from an empty catalog")
    scores = get_index(catalog, k1, b).scores(query)
    idx = np.arange(len(catalog))
    order = np.lexsort((idx, -scores))
    if drop_zero:
        order = order[scores[order] > 0]
    top = order[:pool_size]
    return CandidatePool(query, top, scores[top], minmax(scores[top]))
