"""Scale-free generalized PageRank by truncated power series.

The rank vector solves ``R = R M + Q`` with ``M = diag(C) A``, where ``A`` is
the adjacency matrix (edge multiplicities included) and
``C_j = zeta_j / max(D_j^+, 1)`` uses the realized out-degree. Zero rows of
``M`` (dangling vertices) are kept as they are. The truncation
``R^(k) = Q sum_{i<=k} M^i`` satisfies

    (1/n) ||R - R^(k)||_1 <= c^(k+1) / (1 - c) * mean(|Q|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphgen import DiGraph

DEFAULT_ITERATIONS = 30


def iteration_error_bound(damping: float, k: int, mean_abs_q: float) -> float:
    """Per-vertex L1 error of ``k`` matrix iterations: ``c^(k+1)/(1-c) * mean|Q|``."""
    return damping ** (k + 1) / (1 - damping) * mean_abs_q


def iterations_for_tolerance(damping: float, tol: float, mean_abs_q: float) -> int:
    """Smallest ``k >= 1`` with ``iteration_error_bound(damping, k, mean_abs_q) <= tol``."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if mean_abs_q == 0:
        return 1
    k = math.ceil(math.log(tol * (1 - damping) / mean_abs_q) / math.log(damping) - 1)
    k = max(k, 1)
    while iteration_error_bound(damping, k, mean_abs_q) > tol:
        k += 1
    while k > 1 and iteration_error_bound(damping, k - 1, mean_abs_q) <= tol:
        k -= 1
    return k


@dataclass(frozen=True, eq=False)
class RankVector:
    values: np.ndarray
    iterations: int
    residual_bound: float
    damping: float

    def __len__(self):
        return len(self.values)


def contribution_weights(graph: DiGraph) -> np.ndarray:
    """``C_j = zeta_j / max(D_j^+, 1)`` with the realized out-degree."""
    return graph.attrs.zeta / np.maximum(graph.out_degree, 1)


def propagate(graph: DiGraph, v: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """One product ``v M``: ``(v M)_i = sum over edges j->i of C_j v_j``."""
    return np.bincount(graph.dst, weights=(v * weights)[graph.src], minlength=graph.n)


def compute_pagerank(
    graph: DiGraph,
    damping: float = 0.85,
    k: int | None = DEFAULT_ITERATIONS,
    tol: float | None = None,
    q: np.ndarray | None = None,
) -> RankVector:
    """Return ``R^(k) = Q sum_{i=0..k} M^i`` for ``graph``.

    Personalization defaults to the attribute column ``q``. Passing ``tol``
    instead of ``k`` picks the smallest ``k`` whose error bound is below it.
    """
    if not 0 < damping < 1:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    q = graph.attrs.q if q is None else np.asarray(q, dtype=float)
    if len(q) != graph.n:
        raise ValueError(f"personalization has length {len(q)}, graph has {graph.n} vertices")
    graph.attrs.check_damping(damping)
    mean_abs_q = float(np.mean(np.abs(q))) if graph.n else 0.0
    if tol is not None:
        k = iterations_for_tolerance(damping, tol, mean_abs_q)
    if k is None or k < 1:
        raise ValueError(f"number of iterations k must be a positive integer, got {k}")

    weights = contribution_weights(graph)
    v = q.copy()
    total = q.copy()
    for _ in range(k):
        v = propagate(graph, v, weights)
        total += v
    values = total
    values.setflags(write=False)
    return RankVector(values, int(k), iteration_error_bound(damping, k, mean_abs_q), damping)
