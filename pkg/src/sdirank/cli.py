"""Command-line entry point: ``sdirank {ingest,search,bench,gapcheck}``.

Any long option may also be given in a key=value config file passed with
``--config``; explicit flags win. Exit codes: 0 ok, 1 runtime error,
2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

from . import bench
from .catalog import CatalogError, IngestConfig, load_catalog, load_queries
from .metrics import evaluate
from .relevance import DEFAULT_POOL_SIZE, build_pool
from .solver import SolverConfig

log = logging.getLogger("sdirank")

BOOL_OPTIONS = {"timing"}


def _models(value: str) -> list[str]:
    models = [m.strip() for m in value.split(",") if m.strip()]
    bad = [m for m in models if m not in bench.MODELS]
    if bad or not models:
        raise argparse.ArgumentTypeError(
            f"unknown model(s) {', '.join(bad) or '(none)'}; choose from {', '.join(bench.MODELS)}"
        )
    return models


def _theta(value: str) -> float:
    t = float(value)
    if not 0.0 <= t <= 1.0:
        raise argparse.ArgumentTypeError("theta must lie in [0, 1]")
    return t


def _grid(value: str) -> tuple[float, ...]:
    try:
        return bench.parse_theta_grid(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="sdirank", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value config file (INI style)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=True):
        p.add_argument("--catalog", required=True)
        p.add_argument("--k", type=int, default=10)
        p.add_argument("--pool-size", type=int, default=DEFAULT_POOL_SIZE)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--min-aspects", type=int, default=1)
        if solver:
            p.add_argument("--epsilon", type=float, default=1e-4)
            p.add_argument("--rounding-samples", type=int, default=32)

    p_ingest = sub.add_parser("ingest", help="load a catalog and report its contents")
    p_ingest.add_argument("--catalog", required=True)
    p_ingest.add_argument("--queries")
    p_ingest.add_argument("--min-aspects", type=int, default=1)

    p_search = sub.add_parser("search", help="diversify results for one query")
    common(p_search)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("--theta", type=_theta, default=0.5)
    p_search.add_argument("--model", type=lambda v: _models(v)[0], default="sdi")
    p_search.add_argument("--timing", action="store_true", help="print selection wall time")

    p_bench = sub.add_parser("bench", help="theta sweep over a query set")
    common(p_bench)
    p_bench.add_argument("--queries", required=True)
    p_bench.add_argument("--theta-grid", type=_grid, default=bench.DEFAULT_THETAS)
    p_bench.add_argument("--models", type=_models, default=list(bench.MODELS))
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--log-selections")
    p_bench.add_argument("--workers", type=int, default=1)
    p_bench.add_argument("--timing", action="store_true", help="fill wall_ms (output no longer byte-stable)")

    p_gap = sub.add_parser("gapcheck", help="rounded vs exhaustive optimum on random instances")
    p_gap.add_argument("--n", type=int, default=12)
    p_gap.add_argument("--k", type=int, default=4)
    p_gap.add_argument("--trials", type=int, default=1000)
    p_gap.add_argument("--seed", type=int, default=0)
    p_gap.add_argument("--theta", type=_theta, default=None, help="fixed theta (default: random per trial)")
    p_gap.add_argument("--epsilon", type=float, default=1e-4)
    p_gap.add_argument("--out")

    return parser, {"ingest": p_ingest, "search": p_search, "bench": p_bench, "gapcheck": p_gap}


def read_config(path: str) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    cp = configparser.ConfigParser()
    if not text.lstrip().startswith("["):
        text = "[sdirank]\n" + text
    cp.read_string(text)
    out: dict[str, str] = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            out[key.replace("-", "_")] = value
    return out


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser, subparsers = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command in subparsers:
        try:
            conf = read_config(known.config)
        except (OSError, configparser.Error) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        sp = subparsers[known.command]
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, value in conf.items():
            if key not in actions:
                continue
            if key in BOOL_OPTIONS:
                defaults[key] = value.strip().lower() in {"1", "true", "yes", "on"}
            else:
                defaults[key] = value
            actions[key].required = False
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(epsilon=args.epsilon, rounding_samples=args.rounding_samples, seed=args.seed)


def cmd_ingest(args) -> int:
    catalog = load_catalog(args.catalog, IngestConfig(min_aspects=args.min_aspects))
    r = catalog.report
    print(f"read={r.read} kept={r.kept} dropped={r.dropped}")
    print(f"aspects={len(catalog.aspect_names)}")
    for name in catalog.aspect_names:
        print(f"  {name}: {len(catalog.vocab[name])} values")
    if args.queries:
        print(f"queries={len(load_queries(args.queries))}")
    return 0


def cmd_search(args) -> int:
    catalog = load_catalog(args.catalog, IngestConfig(min_aspects=args.min_aspects))
    pool = build_pool(catalog, args.query, args.pool_size)
    if len(pool) < max(args.k, 2):
        raise ValueError(f"pool has {len(pool)} items, need at least k={args.k} (and 2)")
    run = bench.run_model(args.model, catalog, pool, args.k, args.theta, args.seed, _solver_cfg(args), 1)
    ids = pool.items[run.positions]
    report = evaluate(catalog, pool, ids, run.wall_ms)
    print(f"query: {args.query}")
    print(f"model: {args.model} theta: {args.theta:g} k: {args.k} pool: {len(pool)} seed: {args.seed}")
    order = sorted(run.positions)
    for rank, pos in enumerate(order, start=1):
        item = catalog.items[int(pool.items[pos])]
        aspects = " ".join(f"{a}={v}" for a, v in item.aspects.items())
        print(f"{rank:>3} {item.id} rel={pool.norm_scores[pos]:.4f} {aspects}")
    line = f"cr={report.cr:.6f} ndcg10={report.ndcg10:.6f} alpha_ndcg={report.alpha_ndcg:.6f} variance={report.variance:.6f}"
    if run.selection is not None:
        line += f" t={run.selection.t_value:.6g} gap={run.selection.gap:.3g} iters={run.selection.iters}"
    if args.timing:
        line += f" wall_ms={run.wall_ms:.3f}"
    print(line)
    return 0


def cmd_bench(args) -> int:
    catalog = load_catalog(args.catalog, IngestConfig(min_aspects=args.min_aspects))
    queries = load_queries(args.queries)
    if not len(queries):
        raise ValueError(f"{args.queries}: no queries")
    result = bench.run_bench(
        catalog, list(queries), k=args.k, thetas=args.theta_grid, models=args.models,
        seed=args.seed, pool_size=args.pool_size, cfg=_solver_cfg(args),
        timing=args.timing, workers=args.workers,
    )
    bench.write_bench(result, args.out, args.log_selections)
    print(
        f"queries={len(queries)} evaluated={len(queries) - len(result.skipped)} "
        f"skipped={len(result.skipped)} rows={len(result.rows)} aggregates={len(result.aggregates)}"
    )
    return 0


def cmd_gapcheck(args) -> int:
    report = bench.gapcheck(args.n, args.k, args.trials, args.seed, args.theta, SolverConfig(epsilon=args.epsilon))
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    print(report.summary())
    return 0


COMMANDS = {"ingest": cmd_ingest, "search": cmd_search, "bench": cmd_bench, "gapcheck": cmd_gapcheck}


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CatalogError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
