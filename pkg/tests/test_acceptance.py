"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``[PASS]`` / ``[FAIL]`` line (visible without ``-s``)
before asserting. Run alone with ``pytest tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest

from sdirank import bench, cli
from sdirank.baselines import DppKernel, build_kernel, fast_map_dpp, greedy_dpp
from sdirank.catalog import Catalog, Item, write_catalog
from sdirank.diversity import build_qp, compute_weights, sdi_classic, sdi_self_pair_counts
from sdirank.metrics import alpha_ndcg, coverage_rate, evenness_variance, ndcg_at_10
from sdirank.oracle import direct_sdi_batch
from sdirank.relevance import CandidatePool, build_pool
from sdirank.synthetic import random_catalog, random_pool, skewed_catalog, synthetic_queries

K = 10
LOW_THETAS = (0.0, 0.1, 0.2, 0.3)
DPP_MODELS = ("dpp_greedy", "kdpp", "fast_map_dpp")


@pytest.fixture
def verdict(capsys):
    def report(ac: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] AC{ac} {detail}")
        return ok

    return report


@pytest.fixture(scope="module")
def skewed_run():
    catalog = skewed_catalog(np.random.default_rng(7))
    queries = synthetic_queries(np.random.default_rng(8), 20)
    result = bench.run_bench(catalog, queries, k=K, thetas=LOW_THETAS + (1.0,), seed=0)
    return catalog, queries, result


def _agg(result, model, theta, attr):
    (row,) = [a for a in result.aggregates if a.model == model and a.theta == theta]
    return getattr(row, attr)


def test_ac1_matrix_form(verdict):
    t0 = time.perf_counter()
    worst, subsets_checked = 0.0, 0
    for seed in range(200):
        rng = np.random.default_rng([1, seed])
        n = int(rng.integers(4, 13))
        k = int(rng.integers(2, n + 1))
        cat = random_catalog(n, rng, n_aspects=3, max_values=4, missing=0.15 * (seed % 2))
        pool = random_pool(cat, rng)
        weights = compute_weights(cat, pool, k)
        qp = build_qp(cat, pool, weights, k, 0.0)
        subs = np.array(list(itertools.combinations(range(n), k)))
        matrix = 0.5 * qp.q[subs[:, :, None], subs[:, None, :]].sum(axis=(1, 2))
        codes = cat.codes[pool.items]
        direct = sum(phi * direct_sdi_batch(codes[:, p], subs) for p, phi in enumerate(weights.phi))
        worst = max(worst, float(np.abs(matrix - direct).max()))
        subsets_checked += len(subs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10
    verdict(1, ok, f"matrix form: {subsets_checked} subsets, max |diff|={worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-12
    assert elapsed < 10


def test_ac2_solver_soundness(verdict):
    t0 = time.perf_counter()
    report = bench.gapcheck(12, 4, 1000, seed=0)
    elapsed = time.perf_counter() - t0
    rows = report.rows
    tol = 1e-12
    sandwiched = sum(r.relax_value <= r.optimum + tol and r.optimum <= r.t_value + tol for r in rows)
    small_gap = sum(r.converged and r.gap <= 1e-4 for r in rows) / len(rows)
    max_ratio = report.max_ratio
    ok = sandwiched == len(rows) and small_gap >= 0.99 and max_ratio <= math.pi / 2 and elapsed < 120
    verdict(2, ok, f"solver: sandwich {sandwiched}/{len(rows)}, gap<=1e-4 {small_gap:.3f}, "
                   f"max ratio {max_ratio:.4f} (pi/2={math.pi / 2:.4f}), {elapsed:.1f}s")
    assert sandwiched == len(rows)
    assert small_gap >= 0.99
    assert max_ratio <= math.pi / 2
    assert elapsed < 120


def test_ac3_greedy_equivalence(verdict):
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(500):
        rng = np.random.default_rng([3, seed])
        n = int(rng.integers(2, 51))
        k = int(rng.integers(1, min(n, 10) + 1))
        if seed % 3 == 2:
            # aspect kernels carry exact ties
            cat = random_catalog(n, rng, n_aspects=3, max_values=3)
            kernel = build_kernel(cat, random_pool(cat, rng), float(rng.random()))
        else:
            a = rng.normal(size=(n, int(rng.integers(k, n + 1))))
            kernel = DppKernel(a @ a.T + 1e-8 * np.eye(n), 0.5)
        mismatches += fast_map_dpp(kernel, k) != greedy_dpp(kernel, k)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60
    verdict(3, ok, f"fast_map == greedy: {500 - mismatches}/500 kernels, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def test_ac4_evenness(verdict):
    exceptions, checked = [], 0
    for total in range(2, 13):
        for richness in range(1, total + 1):
            base, extra = divmod(total, richness)
            even = tuple([base + 1] * extra + [base] * (richness - extra))
            for form in (sdi_classic, sdi_self_pair_counts):
                best = form(even)
                for comp in _compositions(total, richness):
                    checked += 1
                    value = form(comp)
                    is_even = max(comp) - min(comp) <= 1
                    if is_even and abs(value - best) > 1e-15:
                        exceptions.append((form.__name__, comp))
                    if not is_even and not value > best + 1e-15:
                        exceptions.append((form.__name__, comp))
    verdict(4, not exceptions, f"evenness: {checked} compositions, {len(exceptions)} exceptions")
    assert not exceptions


def test_ac5_evenness_advantage(verdict, skewed_run):
    _, queries, result = skewed_run
    lines, ok = [], not result.skipped
    for theta in LOW_THETAS:
        sdi = _agg(result, "sdi", theta, "variance")
        dpp = {m: _agg(result, m, theta, "variance") for m in DPP_MODELS}
        ok &= all(sdi <= v for v in dpp.values())
        lines.append(f"theta={theta:g} sdi={sdi:.3f} " + " ".join(f"{m}={v:.3f}" for m, v in dpp.items()))
    verdict(5, ok, f"variance ({len(queries) - len(result.skipped)} queries): " + "; ".join(lines))
    assert ok


def _runtime_pool():
    catalog = skewed_catalog(np.random.default_rng(11))
    pool = build_pool(catalog, "running leather boot", pool_size=1000)
    assert len(pool) == 1000
    return catalog, pool


def test_ac6_runtime_ordering(verdict):
    catalog, pool = _runtime_pool()
    t0 = time.perf_counter()
    medians = {}
    for model in bench.MODELS:
        times = [bench.run_model(model, catalog, pool, K, theta, seed=0).wall_ms for theta in (0.3, 0.5, 0.7)]
        medians[model] = float(np.median(times))
    elapsed = time.perf_counter() - t0
    order = sorted(medians, key=medians.get)
    ok = order == ["kdpp", "sdi", "fast_map_dpp", "dpp_greedy"] and elapsed < 300
    verdict(6, ok, "runtime ms (n=1000, k=10): "
            + " < ".join(f"{m}={medians[m]:.2f}" for m in order)
            + "; required kdpp < sdi < fast_map_dpp < dpp_greedy")
    assert medians["kdpp"] < medians["sdi"] < medians["fast_map_dpp"] < medians["dpp_greedy"]
    assert elapsed < 300


def test_ac7_endpoints(verdict, skewed_run):
    catalog, queries, result = skewed_run
    bad = []
    for sel, row in zip(result.selections, result.rows):
        if sel["theta"] != 1.0:
            continue
        pool = build_pool(catalog, sel["query"], drop_zero=True)
        top = {catalog.items[i].id for i in pool.items[:K]}
        if set(sel["ids"]) != top or row.ndcg10 != 1.0:
            bad.append((sel["query"], sel["model"]))
    cr0, cr1 = _agg(result, "sdi", 0.0, "cr"), _agg(result, "sdi", 1.0, "cr")
    ok = not bad and cr0 >= cr1
    verdict(7, ok, f"endpoints: theta=1 top-k mismatches {len(bad)}, sdi CR theta=0 {cr0:.3f} >= theta=1 {cr1:.3f}")
    assert not bad
    assert cr0 >= cr1


def test_ac8_metric_oracles(verdict, fixture_catalog):
    pool = CandidatePool.from_scores("q", range(5), [5.0, 4.0, 3.0, 2.0, 1.0])
    subset = [0, 1, 2, 4]
    l3, l5 = math.log2(3), math.log2(5)
    expected = {
        "cr": 7 / 9,
        "ndcg10": (1 + 0.75 / l3 + 0.25) / (1 + 0.75 / l3 + 0.25 + 0.25 / l5),
        "alpha_ndcg": (4 + 2.5 / l3 + 1.25 / l5) / (4 + 2.5 / l3 + 2 / l5),
        "variance": 53 / 108,
        "cr_half": 0.5,
        "ndcg_three": 1 / (1 + 0.5 / l3),
    }
    half = Catalog.from_items(
        [Item(f"i{j}", "", {"c": f"v{j}"}) for j in range(20)]
        + [Item(f"j{j}", "", {"c": f"v{j % 5}"}) for j in range(10)]
    )
    half_pool = CandidatePool.from_scores("q", range(30), np.linspace(1, 0, 30))
    three = CandidatePool.from_scores("q", [0, 1, 2], [2.0, 1.5, 1.0])
    got = {
        "cr": coverage_rate(fixture_catalog, pool, subset),
        "ndcg10": ndcg_at_10(pool, subset),
        "alpha_ndcg": alpha_ndcg(fixture_catalog, pool, subset, alpha=0.5),
        "variance": evenness_variance(fixture_catalog, subset),
        "cr_half": coverage_rate(half, half_pool, list(range(20, 30))),
        "ndcg_three": ndcg_at_10(three, [0, 2]),
    }
    diffs = {key: abs(got[key] - expected[key]) for key in expected}
    ok = max(diffs.values()) <= 1e-9
    verdict(8, ok, "metric oracles: " + " ".join(f"{k}={got[k]:.6f}" for k in got) + f" max diff {max(diffs.values()):.1e}")
    assert ok


def test_ac9_determinism(verdict, tmp_path, capsys):
    rng = np.random.default_rng(9)
    cat_path = tmp_path / "catalog.csv"
    write_catalog(random_catalog(150, rng, n_aspects=4, max_values=5, missing=0.1), cat_path)
    q_path = tmp_path / "queries.txt"
    q_path.write_text("\n".join(synthetic_queries(rng, 4)) + "\n", encoding="utf-8")
    outs = []
    for name in ("run1.csv", "run2.csv"):
        code = cli.main(["bench", "--catalog", str(cat_path), "--queries", str(q_path), "--k", "5",
                         "--pool-size", "40", "--seed", "42", "--out", str(tmp_path / name)])
        assert code == 0
        outs.append((tmp_path / name).read_bytes())
    capsys.readouterr()
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    verdict(9, ok, f"determinism: two bench runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")
    assert ok
