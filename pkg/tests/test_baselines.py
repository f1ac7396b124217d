import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdirank.baselines import (
    DppKernel,
    build_kernel,
    elementary_symmetric,
    fast_map_dpp,
    greedy_dpp,
    kdpp_sample,
    similarity_matrix,
)
from sdirank.catalog import Catalog, Item
from sdirank.relevance import CandidatePool

# chi-square 0.99 quantiles by degrees of freedom
CHI2_99 = {1: 6.635, 2: 9.210, 5: 15.086}


def random_kernel(rng, n, rank=None):
    a = rng.normal(size=(n, rank or n))
    return DppKernel(a @ a.T + 1e-8 * np.eye(n), 0.5)


def naive_greedy(l, k):
    selected = []
    for _ in range(k):
        best, best_det = None, -math.inf
        for i in range(len(l)):
            if i in selected:
                continue
            idx = selected + [i]
            det = np.linalg.det(l[np.ix_(idx, idx)])
            if det > best_det:
                best, best_det = i, det
        selected.append(best)
    return selected


def chi2(counts, probs):
    expected = probs * counts.sum()
    return float(((counts - expected) ** 2 / expected).sum())


@pytest.fixture
def three_items():
    items = [
        Item("a", "", {"color": "red", "brand": "x", "size": "9"}),
        Item("b", "", {"color": "red", "brand": "y", "size": "9"}),
        Item("c", "", {"color": "blue", "brand": "x"}),
    ]
    cat = Catalog.from_items(items)
    pool = CandidatePool.from_scores("q", [0, 1, 2], [3.0, 2.0, 1.0])
    return cat, pool


class TestKernel:
    def test_hand_counted_similarity(self, three_items):
        cat, pool = three_items
        s = similarity_matrix(cat, pool)
        expected = np.array([
            [1, 2 / 3, 1 / 3],
            [2 / 3, 1, 0],
            [1 / 3, 0, 1],
        ])
        np.testing.assert_allclose(s, expected, atol=1e-15)

    def test_theta_zero(self, three_items):
        cat, pool = three_items
        k = build_kernel(cat, pool, 0.0)
        np.testing.assert_allclose(k.l, similarity_matrix(cat, pool) + 1e-8 * np.eye(3), atol=1e-15)

    def test_duplicates_rank_deficient(self):
        items = [Item("a", "", {"c": "r", "b": "x"}), Item("b", "", {"c": "r", "b": "x"})]
        cat = Catalog.from_items(items)
        pool = CandidatePool.from_scores("q", [0, 1], [1.0, 1.0])
        s = similarity_matrix(cat, pool)
        assert s[0, 1] == 1.0
        assert abs(np.linalg.det(s)) < 1e-12

    def test_psd(self, rng):
        from sdirank.synthetic import random_catalog, random_pool

        cat = random_catalog(40, rng, missing=0.2)
        pool = random_pool(cat, rng)
        for theta in (0.0, 0.3, 0.9, 1.0):
            k = build_kernel(cat, pool, theta)
            assert np.allclose(k.l, k.l.T)
            ev = np.linalg.eigvalsh(k.l)
            assert ev[0] >= -1e-12 * ev[-1]
            assert (np.diag(k.l) > 0).all()

    def test_unnormalized(self, three_items):
        cat, pool = three_items
        s = similarity_matrix(cat, pool, normalize=False)
        assert s[0, 1] == 2.0 and s[0, 0] == 3.0


class TestGreedy:
    def test_diagonal(self):
        k = DppKernel(np.diag([0.5, 3.0, 1.0, 2.0]), 0.0)
        assert greedy_dpp(k, 2) == [1, 3]
        assert fast_map_dpp(k, 2) == [1, 3]

    def test_first_pick(self, rng):
        k = random_kernel(rng, 10)
        assert greedy_dpp(k, 1) == [int(np.argmax(np.diag(k.l)))]

    def test_matches_naive(self, rng):
        for _ in range(20):
            k = random_kernel(rng, 8)
            assert greedy_dpp(k, 3) == naive_greedy(k.l, 3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 50), st.data())
    def test_fast_equals_greedy(self, seed, n, data):
        rng = np.random.default_rng(seed)
        k = data.draw(st.integers(1, min(n, 10)))
        kernel = random_kernel(rng, n, rank=data.draw(st.sampled_from([None, n // 2 + 1])))
        assert fast_map_dpp(kernel, k) == greedy_dpp(kernel, k)

    def test_beyond_rank_fills_by_diagonal(self, rng):
        a = rng.normal(size=(8, 2)) * np.arange(1, 9)[:, None]
        kernel = DppKernel(a @ a.T, 0.0)
        first = greedy_dpp(kernel, 2)
        rest = [i for i in np.argsort(-np.diag(kernel.l), kind="stable") if i not in first]
        assert greedy_dpp(kernel, 5) == first + rest[:3]
        assert fast_map_dpp(kernel, 5) == greedy_dpp(kernel, 5)

    def test_relevance_only(self, three_items):
        cat, pool = three_items
        k = build_kernel(cat, pool, 1.0)
        assert greedy_dpp(k, 2) == fast_map_dpp(k, 2) == kdpp_sample(k, 2) == [0, 1]


class TestKDPP:
    def test_full(self, rng):
        k = random_kernel(rng, 4)
        assert sorted(kdpp_sample(k, 4, 0)) == [0, 1, 2, 3]

    def test_uniform_identity(self):
        k = DppKernel(np.eye(3), 0.0)
        rng = np.random.default_rng(0)
        counts = np.zeros(3)
        for _ in range(10_000):
            counts[kdpp_sample(k, 1, rng)[0]] += 1
        assert chi2(counts, np.full(3, 1 / 3)) < CHI2_99[2]

    def test_k1_marginals(self):
        l = np.array([[2.0, 0.6], [0.6, 1.0]])
        k = DppKernel(l, 0.0)
        rng = np.random.default_rng(1)
        counts = np.zeros(2)
        for _ in range(10_000):
            counts[kdpp_sample(k, 1, rng)[0]] += 1
        assert chi2(counts, np.diag(l) / np.trace(l)) < CHI2_99[1]

    def test_k2_subset_distribution(self, rng):
        kernel = random_kernel(rng, 4)
        subsets = list(itertools.combinations(range(4), 2))
        dets = np.array([np.linalg.det(kernel.l[np.ix_(s, s)]) for s in subsets])
        probs = dets / dets.sum()
        sampler = np.random.default_rng(2)
        counts = np.zeros(len(subsets))
        for _ in range(10_000):
            counts[subsets.index(tuple(sorted(kdpp_sample(kernel, 2, sampler))))] += 1
        assert chi2(counts, probs) < CHI2_99[5]

    def test_seeded(self, rng):
        k = random_kernel(rng, 30)
        assert kdpp_sample(k, 5, 11) == kdpp_sample(k, 5, 11)

    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_esp_brute_force(self, rng, n):
        vals = rng.random(n) * 3
        e = elementary_symmetric(vals, n)
        for k in range(n + 1):
            brute = sum(math.prod(c) for c in itertools.combinations(vals, k))
            assert e[k, n] == pytest.approx(brute, rel=1e-12)


@pytest.mark.parametrize("selector", ["greedy", "fast", "kdpp"])
def test_distinct_in_range(rng, selector):
    for _ in range(10):
        n = int(rng.integers(3, 40))
        k = int(rng.integers(1, min(n, 10) + 1))
        kernel = random_kernel(rng, n, rank=int(rng.integers(1, n + 1)))
        out = {"greedy": greedy_dpp, "fast": fast_map_dpp}.get(selector)
        sel = out(kernel, k) if out else kdpp_sample(kernel, k, 3)
        assert len(sel) == k == len(set(sel))
        assert all(0 <= i < n for i in sel)
