"""Multi-aspect search result diversification with Simpson's diversity index."""

from .catalog import Catalog, IngestConfig, Item, QuerySet, aspect_value_counts, load_catalog, load_queries
from .diversity import (
    AspectWeighting,
    QuadraticProgram,
    build_qp,
    compute_weights,
    sdi_classic,
    sdi_self_pair,
)
from .relevance import CandidatePool, bm25_score, build_pool
from .solver import Selection, SolverConfig, diversify, lmo_topk, round_solution, solve_relaxation

__all__ = [
    "AspectWeighting",
    "CandidatePool",
    "Catalog",
    "IngestConfig",
    "Item",
    "QuadraticProgram",
    "QuerySet",
    "Selection",
    "SolverConfig",
    "aspect_value_counts",
    "bm25_score",
    "build_pool",
    "build_qp",
    "compute_weights",
    "diversify",
    "lmo_topk",
    "load_catalog",
    "load_queries",
    "round_solution",
    "sdi_classic",
    "sdi_self_pair",
    "solve_relaxation",
]
