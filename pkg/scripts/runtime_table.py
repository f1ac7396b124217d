"""Median selection time per model on one large synthetic pool.

Only the selection call is timed; Q and the DPP kernels (with the
eigendecomposition the k-DPP sampler uses) are built beforehand.
"""

import argparse
import statistics

import numpy as np

from sdirank.bench import MODELS, run_model
from sdirank.relevance import build_pool
from sdirank.solver import SolverConfig
from sdirank.synthetic import skewed_catalog


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="pool size")
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--thetas", default="0.3,0.5,0.7")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--epsilon", type=float, default=1e-4)
    args = ap.parse_args()

    catalog = skewed_catalog(np.random.default_rng(11), scale=max(1, -(-args.n // 2000)))
    pool = build_pool(catalog, "running leather boot", pool_size=args.n)
    thetas = [float(t) for t in args.thetas.split(",")]
    cfg = SolverConfig(epsilon=args.epsilon)
    print(f"pool={len(pool)} k={args.k} thetas={thetas}")
    for model in MODELS:
        times = [run_model(model, catalog, pool, args.k, t, 0, cfg, args.repeats).wall_ms for t in thetas]
        print(f"{model:<13} median {statistics.median(times):9.3f} ms   per theta: "
              + " ".join(f"{t:.3f}" for t in times))


if __name__ == "__main__":
    main()
