"""Seeded synthetic catalogs, pools and QP instances for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .catalog import Catalog, Item
from .diversity import QuadraticProgram, build_qp, compute_weights
from .relevance import CandidatePool

WORDS = (
    "running trail leather suede canvas boot sandal sneaker loafer heel "
    "flat wedge slip waterproof winter summer casual dress comfort lace "
    "strap buckle mesh wool fur lined kids women men classic sport"
).split()


def random_catalog(
    n: int,
    rng: np.random.Generator,
    n_aspects: int = 3,
    max_values: int = 4,
    missing: float = 0.0,
) -> Catalog:
    """Items with uniformly drawn aspect values and short random texts."""
    names = [f"a{p}" for p in range(n_aspects)]
    sizes = rng.integers(2, max_values + 1, size=n_aspects)
    items = []
    for i in range(n):
        aspects = {}
        for p, name in enumerate(names):
            if missing and rng.random() < missing:
                continue
            aspects[name] = f"v{int(rng.integers(sizes[p]))}"
        text = " ".join(rng.choice(WORDS, size=int(rng.integers(3, 9))))
        items.append(Item(f"item{i:05d}", text, aspects))
    return Catalog.from_items(items)


def random_pool(catalog: Catalog, rng: np.random.Generator, query: str = "") -> CandidatePool:
    scores = rng.random(len(catalog))
    return CandidatePool.from_scores(query, np.arange(len(catalog)), scores)


def random_instance(
    n: int,
    k: int,
    rng: np.random.Generator,
    theta: float | None = None,
    n_aspects: int = 3,
    max_values: int = 4,
) -> tuple[Catalog, CandidatePool, QuadraticProgram]:
    catalog = random_catalog(n, rng, n_aspects=n_aspects, max_values=max_values)
    pool = random_pool(catalog, rng)
    if theta is None:
        theta = float(rng.random())
    weights = compute_weights(catalog, pool, k)
    return catalog, pool, build_qp(catalog, pool, weights, k, theta)


def skewed_catalog(
    rng: np.random.Generator,
    scale: int = 1,
    n_extra_aspects: int = 3,
) -> Catalog:
    """Catalog with a 1000/500/500 class split on the ``category`` aspect.

    Secondary aspects are drawn from geometric-like skewed distributions so
    that relevance-ranked pools are uneven on every aspect. ``scale``
    multiplies the 2000-item base size.
    """
    counts = {"a": 1000 * scale, "b": 500 * scale, "c": 500 * scale}
    cats = np.array([c for c, m in counts.items() for _ in range(m)])
    rng.shuffle(cats)
    extra = []
    for p in range(n_extra_aspects):
        m = 3 + 2 * p
        w = 0.5 ** np.arange(m)
        extra.append((f"attr{p}", m, w / w.sum()))
    items = []
    for i, cat in enumerate(cats):
        aspects = {"category": str(cat)}
        for name, m, w in extra:
            aspects[name] = f"{name}_{int(rng.choice(m, p=w))}"
        words = list(rng.choice(WORDS, size=int(rng.integers(4, 10))))
        # category-correlated vocabulary so relevance is skewed too
        if cat == "a" and rng.random() < 0.6:
            words.append("running")
        items.append(Item(f"sku{i:06d}", " ".join(words), aspects))
    return Catalog.from_items(items)


def synthetic_queries(rng: np.random.Generator, n: int = 20) -> list[str]:
    return [" ".join(rng.choice(WORDS, size=int(rng.integers(1, 4)), replace=False)) for _ in range(n)]
