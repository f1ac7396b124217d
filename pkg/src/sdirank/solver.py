"""Cardinality-constrained binary QP solver.

The 0/1 constraint is relaxed to the box ``0 <= x <= 1`` (with ``sum x = k``),
which is convex because Q is PSD. The relaxation is minimized with
Frank-Wolfe: the linear oracle over that polytope is "take the k smallest
gradient coordinates", and the step length is the closed-form minimizer of
the quadratic along the search direction. The fractional solution is then
rounded by sampling k-subsets with inclusion probabilities equal to x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import Catalog
from .diversity import QuadraticProgram, build_qp, compute_weights
from .relevance import CandidatePool

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-4
    max_iters: int | None = None
    rounding_samples: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.rounding_samples < 1:
            raise ValueError("rounding_samples must be >= 1")

    @property
    def iteration_cap(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 10 * math.ceil(1.0 / self.epsilon)


@dataclass(frozen=True, eq=False)
class Relaxation:
    x: np.ndarray
    value: float
    gap: float
    iters: int
    converged: bool
    history: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Selection:
    """A chosen k-subset.

    ``indices`` are catalog item indices and ``positions`` the matching pool
    positions. ``relax_value`` is the relaxed objective at the Frank-Wolfe
    iterate; ``relax_value - gap`` is a certified lower bound on the
    relaxation optimum and hence on any binary solution.
    """

    indices: np.ndarray
    positions: np.ndarray
    t_value: float
    h_value: float
    r_value: float
    relax_value: float
    gap: float
    iters: int
    converged: bool = True

    @property
    def lower_bound(self) -> float:
        return self.relax_value - self.gap


def lmo_topk(gradient: np.ndarray, k: int) -> np.ndarray:
    """Vertex of ``{x in [0,1]^n : sum x = k}`` minimizing ``gradient @ x``."""
    g = np.asarray(gradient, dtype=float)
    if k > len(g):
        raise ValueError(f"k={k} exceeds dimension {len(g)}")
    s = np.zeros(len(g))
    s[np.argsort(g, kind="stable")[:k]] = 1.0
    return s


def _check_finite(qp: QuadraticProgram) -> None:
    if not (np.all(np.isfinite(qp.q)) and np.all(np.isfinite(qp.b))):
        raise ValueError("quadratic program has non-finite entries")


def solve_relaxation(qp: QuadraticProgram, cfg: SolverConfig | None = None, track: bool = False) -> Relaxation:
    """Frank-Wolfe on the box relaxation, stopped on the duality gap.

    Starts from the uniform point ``k/n`` and works on ``qp.relaxed_form()``;
    ``value`` is the relaxed objective there, a lower bound on every binary
    solution up to ``gap``.
    """
    cfg = cfg or SolverConfig()
    _check_finite(qp)
    n, k = qp.n, qp.k
    if k > n:
        raise ValueError(f"k={k} exceeds pool size {n}")
    q, b = qp.relaxed_form()
    if k == n:
        x = np.ones(n)
        value = float(0.5 * x @ q @ x + b @ x)
        return Relaxation(x, value, 0.0, 0, True, np.array([value]) if track else None)

    x = np.full(n, k / n)
    qx = q @ x
    history = [] if track else None
    gap = math.inf
    it = 0
    cap = cfg.iteration_cap
    while True:
        grad = qx + b
        order = np.argsort(grad, kind="stable")[:k]
        gap = float(grad @ x - grad[order].sum())
        if track:
            history.append(0.5 * x @ qx + b @ x)
        if gap <= cfg.epsilon or it >= cap:
            break
        d = -x
        d[order] += 1.0
        qs = q[:, order].sum(axis=1)
        qd = qs - qx
        curv = float(d @ qd)
        step = 1.0 if curv <= 0 else min(1.0, gap / curv)
        x = x + step * d
        qx = qx + step * qd
        it += 1

    value = float(0.5 * x @ qx + b @ x)
    return Relaxation(
        x, value, max(gap, 0.0), it, gap <= cfg.epsilon,
        np.array(history) if track else None,
    )


def _systematic_sample(probs: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct indices, index i included with probability ``probs[i]``."""
    n = len(probs)
    perm = rng.permutation(n)
    cum = np.cumsum(probs[perm])
    cum *= k / cum[-1]
    points = rng.random() + np.arange(k)
    picks = np.minimum(np.searchsorted(cum, points, side="right"), n - 1)
    chosen = list(dict.fromkeys(perm[picks].tolist()))
    if len(chosen) < k:
        # float round-off at probability-1 items can repeat a pick
        taken = set(chosen)
        for i in np.argsort(-probs, kind="stable"):
            if int(i) not in taken:
                chosen.append(int(i))
                taken.add(int(i))
                if len(chosen) == k:
                    break
    return np.sort(np.array(chosen, dtype=np.int64))


def _pool_indices(qp: QuadraticProgram, positions: np.ndarray) -> np.ndarray:
    if qp.pool is None:
        return positions.copy()
    return qp.pool.items[positions]


def round_solution(
    qp: QuadraticProgram,
    x_frac: np.ndarray,
    cfg: SolverConfig | None = None,
    relax: Relaxation | None = None,
) -> Selection:
    """Best of ``rounding_samples`` sampled k-subsets plus the top-k of x."""
    cfg = cfg or SolverConfig()
    x = np.asarray(x_frac, dtype=float)
    n, k = qp.n, qp.k
    if (
        x.shape != (n,)
        or x.min() < -FEAS_TOL
        or x.max() > 1 + FEAS_TOL
        or abs(x.sum() - k) > FEAS_TOL * max(1, n)
    ):
        raise ValueError("fractional point is infeasible")
    probs = np.clip(x, 0.0, 1.0)
    rng = np.random.default_rng(cfg.seed)

    candidates = [np.sort(np.argsort(-probs, kind="stable")[:k])]
    for _ in range(cfg.rounding_samples):
        candidates.append(_systematic_sample(probs, k, rng))

    best, best_h, best_r = None, math.inf, 0.0
    seen = set()
    for cand in candidates:
        key = cand.tobytes()
        if key in seen:
            continue
        seen.add(key)
        h, r = qp.subset_value(cand)
        if h + r < best_h + best_r:
            best, best_h, best_r = cand, h, r

    if relax is None:
        relax_value, gap, iters, converged = qp.relaxed_objective(x), 0.0, 0, True
    else:
        relax_value, gap, iters, converged = relax.value, relax.gap, relax.iters, relax.converged
    return Selection(
        indices=_pool_indices(qp, best),
        positions=best,
        t_value=best_h + best_r,
        h_value=best_h,
        r_value=best_r,
        relax_value=relax_value,
        gap=gap,
        iters=iters,
        converged=converged,
    )


def solve_qp(qp: QuadraticProgram, cfg: SolverConfig | None = None) -> Selection:
    cfg = cfg or SolverConfig()
    relax = solve_relaxation(qp, cfg)
    return round_solution(qp, relax.x, cfg, relax)


def diversify(
    catalog: Catalog,
    pool: CandidatePool,
    k: int,
    theta: float,
    cfg: SolverConfig | None = None,
) -> Selection:
    """Select ``k`` items from ``pool`` minimizing (1-theta) H + theta R."""
    weights = compute_weights(catalog, pool, k)
    qp = build_qp(catalog, pool, weights, k, theta)
    return solve_qp(qp, cfg)
