"""Benchmark harness: run every model over queries and trade-off values.

Timing covers the selection call only. The SDI quadratic program and the
DPP kernels (including the eigendecomposition the k-DPP sampler reuses)
are built beforehand, outside the timed region; each call is repeated and
the median reported.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .baselines import build_kernel, fast_map_dpp, greedy_dpp, kdpp_sample
from .catalog import Catalog
from .diversity import build_qp, compute_weights
from .metrics import evaluate
from .oracle import brute_force_bqp, check_size
from .relevance import DEFAULT_POOL_SIZE, CandidatePool, build_pool
from .solver import Selection, SolverConfig, solve_qp
from .synthetic import random_instance

logger = logging.getLogger(__name__)

MODELS = ("sdi", "dpp_greedy", "kdpp", "fast_map_dpp")
DEFAULT_THETAS = tuple(round(0.1 * i, 10) for i in range(11))
TIMING_REPEATS = 3


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def parse_theta_grid(text: str) -> tuple[float, ...]:
    """``"0:0.1:1"`` (start:step:stop, inclusive) or ``"0,0.5,1"``."""
    text = text.strip()
    if ":" in text:
        start, step, stop = (float(s) for s in text.split(":"))
        if step <= 0:
            raise ValueError("theta grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = tuple(round(start + i * step, 10) for i in range(count))
    else:
        grid = tuple(float(s) for s in text.split(",") if s.strip())
    if not grid or any(not 0.0 <= t <= 1.0 for t in grid):
        raise ValueError(f"invalid theta grid {text!r}")
    return grid


@dataclass
class ModelRun:
    positions: list[int]
    selection: Selection | None
    wall_ms: float


def _timed(fn: Callable[[], object], repeats: int) -> tuple[object, float]:
    times = []
    out = None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return out, statistics.median(times)


def run_model(
    model: str,
    catalog: Catalog,
    pool: CandidatePool,
    k: int,
    theta: float,
    seed: int = 0,
    cfg: SolverConfig | None = None,
    repeats: int = TIMING_REPEATS,
) -> ModelRun:
    """Build the model's inputs, then time its selection step."""
    if model == "sdi":
        base = cfg or SolverConfig()
        cfg = SolverConfig(base.epsilon, base.max_iters, base.rounding_samples, seed)
        weights = compute_weights(catalog, pool, k)
        qp = build_qp(catalog, pool, weights, k, theta)
        sel, ms = _timed(lambda: solve_qp(qp, cfg), repeats)
        return ModelRun([int(p) for p in sel.positions], sel, ms)
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    kernel = build_kernel(catalog, pool, theta)
    if model == "dpp_greedy":
        fn = lambda: greedy_dpp(kernel, k)  # noqa: E731
    elif model == "fast_map_dpp":
        fn = lambda: fast_map_dpp(kernel, k)  # noqa: E731
    else:
        if not kernel.relevance_only:
            kernel.eig  # precompute, part of kernel construction
        fn = lambda: kdpp_sample(kernel, k, seed)  # noqa: E731
    positions, ms = _timed(fn, repeats)
    return ModelRun(sorted(int(p) for p in positions), None, ms)


@dataclass
class BenchRow:
    aggregate: int
    query: str
    model: str
    theta: float
    cr: float
    ndcg10: float
    alpha_ndcg: float
    variance: float
    wall_ms: float
    gap: float
    seed: int


COLUMNS = [f.name for f in fields(BenchRow)]


def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".12g")
    return str(value)


@dataclass
class BenchResult:
    rows: list[BenchRow]
    aggregates: list[BenchRow]
    selections: list[dict]
    skipped: list[str]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows + self.aggregates:
            w.writerow([_fmt(v) for v in astuple(row)])
        return buf.getvalue()


def _bench_query(
    qi: int,
    query: str,
    catalog: Catalog,
    k: int,
    thetas: Sequence[float],
    models: Sequence[str],
    seed: int,
    pool_size: int,
    cfg: SolverConfig,
    timing: bool,
) -> tuple[list[BenchRow], list[dict]] | None:
    pool = build_pool(catalog, query, pool_size, drop_zero=True)
    if len(pool) < max(k, 2):
        return None
    rows, sels = [], []
    for ti, theta in enumerate(thetas):
        for model in models:
            s = derive_seed(seed, qi, ti, MODELS.index(model))
            run = run_model(model, catalog, pool, k, theta, s, cfg, TIMING_REPEATS if timing else 1)
            ids = pool.items[run.positions]
            m = evaluate(catalog, pool, ids)
            gap = run.selection.gap if run.selection is not None else float("nan")
            rows.append(BenchRow(
                0, query, model, theta, m.cr, m.ndcg10, m.alpha_ndcg, m.variance,
                run.wall_ms if timing else float("nan"), gap, s,
            ))
            sels.append({
                "query": query, "model": model, "theta": theta,
                "ids": [catalog.items[i].id for i in ids],
            })
    return rows, sels


def run_bench(
    catalog: Catalog,
    queries: Sequence[str],
    k: int = 10,
    thetas: Sequence[float] = DEFAULT_THETAS,
    models: Sequence[str] = MODELS,
    seed: int = 0,
    pool_size: int = DEFAULT_POOL_SIZE,
    cfg: SolverConfig | None = None,
    timing: bool = False,
    workers: int = 1,
) -> BenchResult:
    cfg = cfg or SolverConfig(seed=seed)
    for m in models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}")
    args = (catalog, k, thetas, models, seed, pool_size, cfg, timing)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda iq: _bench_query(iq[0], iq[1], *args), enumerate(queries)))
    else:
        results = [_bench_query(qi, q, *args) for qi, q in enumerate(queries)]

    rows, sels, skipped = [], [], []
    for query, res in zip(queries, results):
        if res is None:
            logger.warning("skipping query %r: fewer than k matching items", query)
            skipped.append(query)
            continue
        rows.extend(res[0])
        sels.extend(res[1])

    aggregates = []
    for theta in thetas:
        for model in models:
            group = [r for r in rows if r.model == model and r.theta == theta]
            if not group:
                continue

            def mean(attr):
                vals = [getattr(r, attr) for r in group]
                vals = [v for v in vals if not math.isnan(v)]
                return float(np.mean(vals)) if vals else float("nan")

            aggregates.append(BenchRow(
                1, "*", model, theta, mean("cr"), mean("ndcg10"), mean("alpha_ndcg"),
                mean("variance"), mean("wall_ms"), mean("gap"), seed,
            ))
    return BenchResult(rows, aggregates, sels, skipped)


def write_bench(result: BenchResult, out: str | Path, log_selections: str | Path | None = None) -> None:
    Path(out).write_text(result.to_csv(), encoding="utf-8")
    if log_selections:
        with open(log_selections, "w", encoding="utf-8") as fh:
            for rec in result.selections:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass
class GapRow:
    trial: int
    theta: float
    optimum: float
    t_value: float
    relax_value: float
    gap: float
    iters: int
    converged: int
    ratio: float
    excess: float


@dataclass
class GapReport:
    rows: list[GapRow]

    @property
    def max_ratio(self) -> float:
        ratios = [r.ratio for r in self.rows if r.optimum > 0]
        return max(ratios) if ratios else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f.name for f in fields(GapRow)])
        for row in self.rows:
            w.writerow([_fmt(v) for v in astuple(row)])
        return buf.getvalue()

    def summary(self) -> str:
        if not self.rows:
            return "trials=0"
        ratios = np.array([r.ratio for r in self.rows if r.optimum > 0])
        excess = np.array([r.excess for r in self.rows])
        parts = [
            f"trials={len(self.rows)}",
            f"converged={sum(r.converged for r in self.rows)}",
            f"optimal={int((excess <= 1e-12).sum())}",
            f"max_excess={excess.max():.6g}",
        ]
        if ratios.size:
            parts += [
                f"positive_opt={ratios.size}",
                f"max_ratio={ratios.max():.6g}",
                f"within_pi_over_2={(ratios <= math.pi / 2).mean():.4f}",
            ]
        return " ".join(parts)


def gapcheck(
    n: int,
    k: int,
    trials: int,
    seed: int = 0,
    theta: float | None = None,
    cfg: SolverConfig | None = None,
) -> GapReport:
    """Compare rounded solutions with the exhaustive optimum on random instances."""
    cfg = cfg or SolverConfig()
    check_size(n, k)
    rows = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        _, _, qp = random_instance(n, k, rng, theta)
        trial_cfg = SolverConfig(cfg.epsilon, cfg.max_iters, cfg.rounding_samples, derive_seed(seed, trial))
        sel = solve_qp(qp, trial_cfg)
        _, opt = brute_force_bqp(qp)
        ratio = sel.t_value / opt if opt != 0 else float("nan")
        rows.append(GapRow(
            trial, qp.theta, opt, sel.t_value, sel.relax_value, sel.gap, sel.iters,
            int(sel.converged), ratio, sel.t_value - opt,
        ))
    return GapReport(rows)
