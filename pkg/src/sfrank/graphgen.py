"""Attribute sampling and random digraph construction.

Two models are supported:

* the directed configuration model (DCM): prescribed integer in/out degrees,
  inbound and outbound half-edges paired by a uniform permutation; available
  as a raw multigraph, a "repeated" variant (re-pair until simple) and an
  "erased" variant (drop self-loops, collapse parallel edges);
* the inhomogeneous random digraph (IRD) with rank-1 kernel, where each ordered
  pair ``(i, j)``, ``i != j``, is an edge independently with probability
  ``min(1, W_i^+ W_j^- / (theta * n))`` (directed Chung-Lu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np


class Dependence(str, Enum):
    INDEPENDENT = "independent"
    POWER_COUPLED = "power_coupled"


class ModelTag(str, Enum):
    DCM_MULTIGRAPH = "dcm_multigraph"
    DCM_REPEATED = "dcm_repeated"
    DCM_ERASED = "dcm_erased"
    IRD = "ird"


DCM_TAGS = {
    "multigraph": ModelTag.DCM_MULTIGRAPH,
    "repeated": ModelTag.DCM_REPEATED,
    "erased": ModelTag.DCM_ERASED,
}


class VertexAttributes(NamedTuple):
    """Attributes of a single vertex."""

    in_param: float
    out_param: float
    q: float
    zeta: float


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Attributes:
    """Column-oriented table of :class:`VertexAttributes`.

    ``in_param``/``out_param`` hold integer degrees ``D^-``/``D^+`` for the DCM
    (stored as int64) and real weights ``W^-``/``W^+`` for the IRD.
    """

    in_param: np.ndarray
    out_param: np.ndarray
    q: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        n = len(self.in_param)
        for name in ("out_param", "q", "zeta"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"attribute column {name!r} has length {len(getattr(self, name))}, expected {n}")
        integer = np.issubdtype(np.asarray(self.in_param).dtype, np.integer) and np.issubdtype(
            np.asarray(self.out_param).dtype, np.integer
        )
        dtype = np.int64 if integer else np.float64
        object.__setattr__(self, "in_param", _frozen(self.in_param, dtype))
        object.__setattr__(self, "out_param", _frozen(self.out_param, dtype))
        object.__setattr__(self, "q", _frozen(self.q, np.float64))
        object.__setattr__(self, "zeta", _frozen(self.zeta, np.float64))
        if np.any(self.in_param < 0) or np.any(self.out_param < 0):
            raise ValueError("in_param and out_param must be non-negative")
        if not (np.all(np.isfinite(self.in_param)) and np.all(np.isfinite(self.out_param))):
            raise ValueError("in_param and out_param must be finite")

    def __len__(self) -> int:
        return len(self.in_param)

    def __getitem__(self, i: int) -> VertexAttributes:
        return VertexAttributes(self.in_param[i].item(), self.out_param[i].item(), float(self.q[i]), float(self.zeta[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def is_integer(self) -> bool:
        return np.issubdtype(self.in_param.dtype, np.integer)

    @classmethod
    def from_rows(cls, rows) -> "Attributes":
        rows = list(rows)
        cols = list(zip(*rows)) if rows else ([], [], [], [])
        return cls(*(np.asarray(c) for c in cols))

    def check_damping(self, damping: float) -> None:
        if np.any(np.abs(self.zeta) > damping * (1 + 1e-12)):
            raise ValueError(f"|zeta| exceeds the damping factor {damping}")


@dataclass(frozen=True)
class AttributeConfig:
    """Pareto-type attribute law.

    ``P(W^- > x) = (x/b)^-alpha`` for ``x >= b``; ``P(W^+ > x) = (x/c_scale)^-beta``
    for ``x >= c_scale`` (independent mode) or ``W^+ = c_scale (W^-/b)^(alpha/beta)``
    (power_coupled mode).
    """

    n: int
    alpha: float = 1.5
    b: float = 8.0
    beta: float = 2.5
    c_scale: float = 12.0
    dependence: Dependence = Dependence.INDEPENDENT
    damping: float = 0.85
    q_value: float | None = None
    zeta_value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "dependence", Dependence(self.dependence))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1 (finite mean), got {self.alpha}")
        if not self.beta > 1:
            raise ValueError(f"beta must exceed 1 (finite mean), got {self.beta}")
        if not (self.b > 0 and self.c_scale > 0):
            raise ValueError("Pareto scales b and c_scale must be positive")
        if not 0 < self.damping < 1:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")
        if abs(self.zeta) > self.damping:
            raise ValueError("|zeta_value| must not exceed damping")

    @property
    def q(self) -> float:
        return 1 - self.damping if self.q_value is None else self.q_value

    @property
    def zeta(self) -> float:
        return self.damping if self.zeta_value is None else self.zeta_value

    @property
    def mean_in(self) -> float:
        """E[W^-]."""
        return self.b * self.alpha / (self.alpha - 1)

    @property
    def mean_out(self) -> float:
        """E[W^+]; identical in both dependence modes."""
        return self.c_scale * self.beta / (self.beta - 1)

    @property
    def theta(self) -> float:
        return self.mean_in + self.mean_out

    @property
    def mean_degree(self) -> float:
        """Limiting IRD mean degree E[W^+]E[W^-]/theta."""
        return self.mean_in * self.mean_out / self.theta


def pareto(rng: np.random.Generator, index: float, scale: float, size: int) -> np.ndarray:
    """Inverse-CDF draws with survival ``(x/scale)^-index``, ``x >= scale``."""
    # 1 - U lies in (0, 1], avoiding an infinite draw
    return scale * (1.0 - rng.random(size)) ** (-1.0 / index)


def couple(w_in: np.ndarray, config: AttributeConfig) -> np.ndarray:
    return config.c_scale * (np.asarray(w_in) / config.b) ** (config.alpha / config.beta)


def sample_weights(config: AttributeConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    w_in = pareto(rng, config.alpha, config.b, config.n)
    if config.dependence is Dependence.INDEPENDENT:
        w_out = pareto(rng, config.beta, config.c_scale, config.n)
    else:
        w_out = couple(w_in, config)
    return w_in, w_out


def balance_degrees(d_in: np.ndarray, d_out: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Add one half-edge on the deficient side at ``|sum(d_in) - sum(d_out)|`` vertices.

    Vertices are chosen uniformly without replacement; if the imbalance
    exceeds ``n`` the procedure repeats.
    """
    d_in = np.array(d_in, dtype=np.int64)
    d_out = np.array(d_out, dtype=np.int64)
    n = len(d_in)
    delta = int(d_in.sum() - d_out.sum())
    deficient = d_out if delta > 0 else d_in
    remaining = abs(delta)
    while remaining > 0:
        take = min(remaining, n)
        deficient[rng.choice(n, size=take, replace=False)] += 1
        remaining -= take
    return d_in, d_out


def sample_attributes(config: AttributeConfig, rng: np.random.Generator, integer: bool = False) -> Attributes:
    """Draw ``config.n`` i.i.d. vertex attributes.

    With ``integer=True`` (DCM use) both Pareto draws are floored to integer
    degrees and the half-edge totals are balanced with
    :func:`balance_degrees`.
    """
    w_in, w_out = sample_weights(config, rng)
    q = np.full(config.n, config.q, dtype=float)
    zeta = np.full(config.n, config.zeta, dtype=float)
    if integer:
        d_in = np.maximum(np.floor(w_in), 0).astype(np.int64)
        d_out = np.maximum(np.floor(w_out), 0).astype(np.int64)
        d_in, d_out = balance_degrees(d_in, d_out, rng)
        return Attributes(d_in, d_out, q, zeta)
    return Attributes(w_in, w_out, q, zeta)


@dataclass(frozen=True, eq=False)
class DiGraph:
    """Immutable directed multigraph on vertices ``0..n-1``.

    Edges are stored as parallel ``src``/``dst`` arrays (each edge ``src -> dst``
    listed once per multiplicity), sorted by ``(src, dst)``.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    attrs: Attributes
    model_tag: ModelTag
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have equal length")
        if len(self.attrs) != self.n:
            raise ValueError(f"attribute table has {len(self.attrs)} rows for {self.n} vertices")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= self.n or dst.max() >= self.n):
            raise ValueError("edge endpoint out of range")
        order = np.lexsort((dst, src))
        object.__setattr__(self, "src", _frozen(src[order], np.int64))
        object.__setattr__(self, "dst", _frozen(dst[order], np.int64))
        object.__setattr__(self, "model_tag", ModelTag(self.model_tag))

    @property
    def num_edges(self) -> int:
        return len(self.src)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.src, minlength=self.n), np.int64)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.dst, minlength=self.n), np.int64)

    @cached_property
    def forward(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, targets)`` of out-neighbours."""
        indptr = np.concatenate(([0], np.cumsum(self.out_degree)))
        return _frozen(indptr, np.int64), self.dst

    @cached_property
    def reverse(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, sources)`` of in-neighbours."""
        order = np.lexsort((self.src, self.dst))
        indptr = np.concatenate(([0], np.cumsum(self.in_degree)))
        return _frozen(indptr, np.int64), _frozen(self.src[order], np.int64)

    def out_neighbors(self, i: int) -> np.ndarray:
        indptr, idx = self.forward
        return idx[indptr[i] : indptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        indptr, idx = self.reverse
        return idx[indptr[i] : indptr[i + 1]]

    def is_simple(self) -> bool:
        if np.any(self.src == self.dst):
            return False
        if self.num_edges < 2:
            return True
        # edges are sorted by (src, dst), so duplicates are adjacent
        return not np.any((self.src[1:] == self.src[:-1]) & (self.dst[1:] == self.dst[:-1]))

    def edge_multiset(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))


class AttemptsExhausted(RuntimeError):
    """Repeated DCM found no simple realization; ``graph`` is the last multigraph."""

    def __init__(self, attempts: int, graph: DiGraph):
        super().__init__(f"no simple DCM realization in {attempts} attempts")
        self.attempts = attempts
        self.graph = graph


def _pair(d_in: np.ndarray, d_out: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    vertices = np.arange(len(d_in))
    inbound = np.repeat(vertices, d_in)
    outbound = np.repeat(vertices, d_out)
    # the i-th inbound half-edge is paired with the x_i-th outbound half-edge
    x = rng.permutation(len(outbound))
    return outbound[x], inbound


def build_dcm(
    attrs: Attributes,
    mode: str = "multigraph",
    rng: np.random.Generator | None = None,
    max_attempts: int = 100,
) -> DiGraph:
    """Directed configuration model on the degree sequence in ``attrs``.

    Raises :class:`AttemptsExhausted` in ``repeated`` mode when no simple
    pairing is found within ``max_attempts``.
    """
    if mode not in DCM_TAGS:
        raise ValueError(f"unknown DCM mode {mode!r}; expected one of {sorted(DCM_TAGS)}")
    if rng is None:
        raise ValueError("rng is required")
    if not attrs.is_integer:
        raise ValueError("DCM requires integer degrees")
    d_in, d_out = attrs.in_param, attrs.out_param
    if d_in.sum() != d_out.sum():
        raise ValueError(f"half-edge totals differ: sum D- = {d_in.sum()}, sum D+ = {d_out.sum()}")
    n = len(attrs)
    tag = DCM_TAGS[mode]

    if mode == "repeated":
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        graph = None
        for attempt in range(1, max_attempts + 1):
            src, dst = _pair(d_in, d_out, rng)
            graph = DiGraph(n, src, dst, attrs, tag, {"attempts": attempt})
            if graph.is_simple():
                return graph
        raise AttemptsExhausted(max_attempts, DiGraph(n, graph.src, graph.dst, attrs, ModelTag.DCM_MULTIGRAPH))

    src, dst = _pair(d_in, d_out, rng)
    if mode == "erased":
        keep = src != dst
        pairs = np.unique(np.stack([src[keep], dst[keep]], axis=1), axis=0)
        src, dst = pairs[:, 0], pairs[:, 1]
    return DiGraph(n, src, dst, attrs, tag)


def edge_probabilities(attrs: Attributes, theta: float, rows: slice | None = None) -> np.ndarray:
    """Dense block of ``p_ij = min(1, W_i^+ W_j^- / (theta n))`` with ``p_ii = 0``."""
    n = len(attrs)
    rows = rows or slice(0, n)
    idx = np.arange(n)[rows]
    p = np.minimum(1.0, np.outer(attrs.out_param[rows], attrs.in_param) / (theta * n))
    p[np.arange(len(idx)), idx] = 0.0
    return p


def expected_edges(attrs: Attributes, theta: float, block: int = 2_000_000) -> float:
    """``sum_{i != j} p_ij`` computed deterministically."""
    n = len(attrs)
    rows = max(1, block // max(n, 1))
    return float(sum(edge_probabilities(attrs, theta, slice(s, min(s + rows, n))).sum() for s in range(0, n, rows)))


def _ird_dense(attrs: Attributes, theta: float, rng: np.random.Generator, block: int = 2_000_000):
    n = len(attrs)
    rows = max(1, block // max(n, 1))
    srcs, dsts = [], []
    for start in range(0, n, rows):
        stop = min(start + rows, n)
        p = edge_probabilities(attrs, theta, slice(start, stop))
        i, j = np.nonzero(rng.random(p.shape) < p)
        srcs.append(i + start)
        dsts.append(j)
    return np.concatenate(srcs) if srcs else np.empty(0, np.int64), np.concatenate(dsts) if dsts else np.empty(0, np.int64)


def _ird_skip(attrs: Attributes, theta: float, rng: np.random.Generator):
    # Per row, visit targets in decreasing W^- so p_ij is non-increasing; jump
    # geometrically with the current (upper-bound) probability and accept with
    # the true/bound ratio.
    n = len(attrs)
    order = np.argsort(-attrs.in_param, kind="stable")
    w_sorted = attrs.in_param[order]
    scale = 1.0 / (theta * n)
    srcs, dsts = [], []
    for i in range(n):
        a = attrs.out_param[i] * scale
        if a <= 0:
            continue
        j = 0
        p = min(1.0, a * w_sorted[0])
        while j < n and p > 0:
            if p < 1.0:
                j += int(math.floor(math.log(1.0 - rng.random()) / math.log1p(-p)))
            if j >= n:
                break
            q = min(1.0, a * w_sorted[j])
            if rng.random() < q / p:
                target = order[j]
                if target != i:
                    srcs.append(i)
                    dsts.append(target)
            p = q
            j += 1
    return np.asarray(srcs, dtype=np.int64), np.asarray(dsts, dtype=np.int64)


def build_ird(
    attrs: Attributes,
    theta: float | None = None,
    rng: np.random.Generator | None = None,
    method: str = "auto",
) -> DiGraph:
    """Inhomogeneous random digraph with rank-1 kernel and no perturbation.

    ``theta`` defaults to the empirical mean of ``W^- + W^+``. ``method`` is
    ``"dense"`` (O(n^2) Bernoulli trials), ``"skip"`` (geometric skipping) or
    ``"auto"`` (skip above 10^5 vertices).
    """
    if rng is None:
        raise ValueError("rng is required")
    if theta is None:
        theta = empirical_theta(attrs)
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    n = len(attrs)
    if method == "auto":
        method = "skip" if n > 100_000 else "dense"
    if method == "dense":
        src, dst = _ird_dense(attrs, theta, rng)
    elif method == "skip":
        src, dst = _ird_skip(attrs, theta, rng)
    else:
        raise ValueError(f"unknown IRD method {method!r}")
    return DiGraph(n, src, dst, attrs, ModelTag.IRD, {"theta": float(theta)})


def empirical_theta(attrs: Attributes) -> float:
    return float(np.mean(attrs.in_param + attrs.out_param))
