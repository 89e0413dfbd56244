"""Limit laws of the marked Galton-Watson tree and their fixed points.

A :class:`BranchingLaw` bundles two vectorized samplers:

* ``root(rng, size) -> (N0, Q0)``: in-degree and personalization of a
  uniformly chosen vertex;
* ``generic(rng, size) -> (N, Q, C)``: the same for a vertex reached by
  following an edge backwards, i.e. size-biased by out-degree, plus its
  contribution weight ``C``.

``X = C Q + sum_{j<=N} C X_j`` is solved by population dynamics started at
zero, and ``R* = Q0 + sum_{j<=N0} X_j`` is sampled from the resulting pool.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import special

from .alias import AliasTable
from .graphgen import AttributeConfig, Attributes, Dependence, couple, empirical_theta, pareto
from .stats import EmpiricalDistribution

RHO_WARN = 0.98
DIVERGENCE_LIMIT = 1e12
DEFAULT_POOL = 100_000
DEFAULT_GENERATIONS = 20
DEFAULT_NODE_BUDGET = 10_000_000


class Provenance(str, Enum):
    DCM_EMPIRICAL = "dcm_empirical"
    DCM_ANALYTIC = "dcm_analytic"
    IRD_EMPIRICAL = "ird_empirical"
    IRD_ANALYTIC = "ird_analytic"
    CUSTOM = "custom"


RootSampler = Callable[[np.random.Generator, int], "tuple[np.ndarray, np.ndarray]"]
GenericSampler = Callable[[np.random.Generator, int], "tuple[np.ndarray, np.ndarray, np.ndarray]"]


@dataclass(frozen=True)
class BranchingLaw:
    root_sampler: RootSampler
    generic_sampler: GenericSampler
    provenance: Provenance = Provenance.CUSTOM
    # empirical laws: (rng, vertex indices) -> (N0, Q0), enabling stratified roots
    root_emitter: Callable | None = None
    n_vertices: int = 0

    def root(self, rng: np.random.Generator, size: int, stratified: bool = False):
        if stratified and self.root_emitter is not None:
            n0, q0 = self.root_emitter(rng, stratified_vertices(rng, self.n_vertices, size))
        else:
            n0, q0 = self.root_sampler(rng, size)
        return np.asarray(n0, dtype=np.int64), np.asarray(q0, dtype=float)

    def generic(self, rng: np.random.Generator, size: int):
        n, q, c = self.generic_sampler(rng, size)
        return np.asarray(n, dtype=np.int64), np.asarray(q, dtype=float), np.asarray(c, dtype=float)


@dataclass(frozen=True)
class LawMoments:
    """Monte Carlo moments of a law, each as ``(estimate, standard error)``."""

    mean_cq: tuple[float, float]
    mean_nc: tuple[float, float]
    rho1: tuple[float, float]
    mean_n0: tuple[float, float]
    mean_q0: tuple[float, float]
    mean_abs_q0: tuple[float, float]

    @property
    def pool_mean(self) -> float:
        """``E[CQ] / (1 - E[NC])``: the mean of the fixed point."""
        return self.mean_cq[0] / (1 - self.mean_nc[0])


def stratified_vertices(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Each of ``n`` vertices ``size // n`` times plus a uniform remainder, shuffled.

    Marginally every entry is a uniform vertex; the empirical vertex
    frequencies are exact up to the remainder.
    """
    reps, rem = divmod(size, n)
    idx = np.concatenate((np.repeat(np.arange(n), reps), rng.choice(n, size=rem, replace=False)))
    return rng.permutation(idx)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


def law_moments(law: BranchingLaw, rng: np.random.Generator, size: int = 200_000) -> LawMoments:
    n, q, c = law.generic(rng, size)
    n0, q0 = law.root(rng, size)
    return LawMoments(
        mean_cq=_mean_se(c * q),
        mean_nc=_mean_se(n * c),
        rho1=_mean_se(n * np.abs(c)),
        mean_n0=_mean_se(n0),
        mean_q0=_mean_se(q0),
        mean_abs_q0=_mean_se(np.abs(q0)),
    )


def rho(law: BranchingLaw, alpha: float, rng: np.random.Generator, size: int = 200_000) -> tuple[float, float]:
    """Monte Carlo ``rho_alpha = E[N |C|^alpha]`` with its standard error."""
    n, _, c = law.generic(rng, size)
    return _mean_se(n * np.abs(c) ** alpha)


# ---------------------------------------------------------------- DCM laws


def _dcm_empirical(attrs: Attributes) -> BranchingLaw:
    if len(attrs) == 0:
        raise ValueError("attribute table is empty")
    if not attrs.is_integer:
        raise ValueError("DCM law needs integer degrees")
    d_in, d_out, q, zeta = attrs.in_param, attrs.out_param, attrs.q, attrs.zeta
    if d_out.sum() < 1:
        raise ValueError("all out-degrees are zero; the size-biased law is undefined")
    table = AliasTable(d_out)
    c = zeta / np.maximum(d_out, 1)
    n = len(attrs)

    def emit(rng, s):
        return d_in[s], q[s]

    def root(rng, size):
        return emit(rng, rng.integers(0, n, size=size))

    def generic(rng, size):
        s = table.sample(rng, size)
        return d_in[s], q[s], c[s]

    return BranchingLaw(root, generic, Provenance.DCM_EMPIRICAL, emit, n)


def _thin_by_floor(rng, draw, size):
    """Draws from ``draw`` re-weighted by ``floor(w)/w``, with ``w`` the size-bias variable."""
    parts_in, parts_out, have = [], [], 0
    while have < size:
        w_in, w_out = draw(rng, 2 * (size - have) + 16)
        keep = rng.random(w_out.size) * w_out < np.floor(w_out)
        parts_in.append(w_in[keep])
        parts_out.append(w_out[keep])
        have += int(keep.sum())
    return np.concatenate(parts_in)[:size], np.concatenate(parts_out)[:size]


def floor_mean(index: float, scale: float) -> float:
    """``E[floor(W)]`` for ``P(W > x) = (x/scale)^-index``, ``x >= scale``."""
    if not index > 1:
        raise ValueError("floor mean needs index > 1")
    k0 = math.floor(scale)
    # sum_{k>=1} P(W >= k): 1 up to floor(scale), then (k/scale)^-index
    return k0 + scale**index * float(special.zeta(index, k0 + 1))


def _extra_stubs(rng, mean: float, size: int, tilted: bool = False) -> np.ndarray:
    """Balancing stubs per vertex: ``floor(mean)`` plus a Bernoulli remainder."""
    m = math.floor(mean)
    frac = mean - m
    if tilted:
        # law of the extra count re-weighted by its own value
        frac = (m + 1) * frac / mean if mean > 0 else 0.0
    return m + (rng.random(size) < frac).astype(np.int64)


def _dcm_analytic(config: AttributeConfig) -> BranchingLaw:
    q, zeta = config.q, config.zeta
    # flooring both Pareto marginals leaves E[D-] != E[D+]; the limit of the
    # balancing step adds the difference on the deficient side
    delta = floor_mean(config.alpha, config.b) - floor_mean(config.beta, config.c_scale)
    extra_in, extra_out = max(-delta, 0.0), max(delta, 0.0)
    mean_floor_out = floor_mean(config.beta, config.c_scale)
    share_floor = mean_floor_out / (mean_floor_out + extra_out)

    def root(rng, size):
        d_in = np.floor(pareto(rng, config.alpha, config.b, size)).astype(np.int64)
        return d_in + _extra_stubs(rng, extra_in, size), np.full(size, q)

    if config.dependence is Dependence.INDEPENDENT:

        def plain(rng, size):
            return pareto(rng, config.alpha, config.b, size), pareto(rng, config.beta, config.c_scale, size)

        def tilted(rng, size):
            # W+ tilted by w is Pareto(beta - 1); W- untouched
            return pareto(rng, config.alpha, config.b, size), pareto(rng, config.beta - 1, config.c_scale, size)

    else:
        tilt_index = config.alpha * (config.beta - 1) / config.beta

        def plain(rng, size):
            w_in = pareto(rng, config.alpha, config.b, size)
            return w_in, couple(w_in, config)

        def tilted(rng, size):
            # W+ ~ (W-)^(alpha/beta): tilting W- by that power lowers its index
            w_in = pareto(rng, tilt_index, config.b, size)
            return w_in, couple(w_in, config)

    def generic(rng, size):
        # size-bias by D+ = floor(W+) + extra: a mixture that tilts one part
        on_floor = rng.random(size) < share_floor
        k = int(on_floor.sum())
        w_in = np.empty(size)
        w_out = np.empty(size)
        w_in[on_floor], w_out[on_floor] = _thin_by_floor(rng, tilted, k)
        w_in[~on_floor], w_out[~on_floor] = plain(rng, size - k)
        extra = np.empty(size, dtype=np.int64)
        extra[on_floor] = _extra_stubs(rng, extra_out, k)
        extra[~on_floor] = _extra_stubs(rng, extra_out, size - k, tilted=True)
        d_out = np.floor(w_out).astype(np.int64) + extra
        d_in = np.floor(w_in).astype(np.int64) + _extra_stubs(rng, extra_in, size)
        return d_in, np.full(size, q), zeta / np.maximum(d_out, 1)

    return BranchingLaw(root, generic, Provenance.DCM_ANALYTIC)


def law_from_dcm(source: Attributes | AttributeConfig) -> BranchingLaw:
    """Limit law for the DCM.

    From an attribute table: root = uniform vertex ``s`` emitting
    ``(D_s^-, Q_s)``; generic = vertex drawn with probability ``D_s^+/L_n``
    emitting ``(D_s^-, Q_s, zeta_s/max(D_s^+, 1))``. From an
    :class:`AttributeConfig`: the same construction on the floored Pareto law.
    """
    if isinstance(source, AttributeConfig):
        return _dcm_analytic(source)
    return _dcm_empirical(source)


# ---------------------------------------------------------------- IRD laws


def _ird_empirical(attrs: Attributes, theta: float | None) -> BranchingLaw:
    if len(attrs) == 0:
        raise ValueError("attribute table is empty")
    theta = empirical_theta(attrs) if theta is None else theta
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    w_in = attrs.in_param.astype(float)
    w_out = attrs.out_param.astype(float)
    q, zeta = attrs.q, attrs.zeta
    lam_in = w_out.mean() * w_in / theta
    lam_out = w_in.mean() * w_out / theta
    n = len(attrs)
    table = AliasTable(w_out) if w_out.sum() > 0 else None

    def emit(rng, s):
        return rng.poisson(lam_in[s]), q[s]

    def root(rng, size):
        return emit(rng, rng.integers(0, n, size=size))

    def generic(rng, size):
        if table is None:
            raise ValueError("all W+ are zero; the size-biased law is undefined")
        # one vertex draw feeds N, Z+ and the mark jointly
        s = table.sample(rng, size)
        z_out = rng.poisson(lam_out[s])
        return rng.poisson(lam_in[s]), q[s], zeta[s] / (z_out + 1)

    return BranchingLaw(root, generic, Provenance.IRD_EMPIRICAL, emit, n)


def _ird_analytic(config: AttributeConfig, theta: float | None) -> BranchingLaw:
    theta = config.theta if theta is None else theta
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    m_in, m_out = config.mean_in, config.mean_out
    q, zeta = config.q, config.zeta

    def root(rng, size):
        w_in = pareto(rng, config.alpha, config.b, size)
        return rng.poisson(m_out * w_in / theta), np.full(size, q)

    def generic(rng, size):
        if config.dependence is Dependence.INDEPENDENT:
            w_in = pareto(rng, config.alpha, config.b, size)
            w_out = pareto(rng, config.beta - 1, config.c_scale, size)
        else:
            w_in = pareto(rng, config.alpha * (config.beta - 1) / config.beta, config.b, size)
            w_out = couple(w_in, config)
        z_out = rng.poisson(m_in * w_out / theta)
        return rng.poisson(m_out * w_in / theta), np.full(size, q), zeta / (z_out + 1)

    return BranchingLaw(root, generic, Provenance.IRD_ANALYTIC)


def law_from_ird(source: Attributes | AttributeConfig, theta: float | None = None) -> BranchingLaw:
    """Limit law for the IRD.

    Root: ``N0 ~ Poisson(E[W+] W^- / theta)``. Generic: a type drawn
    proportionally to ``W^+`` emitting ``N ~ Poisson(E[W+] W^- / theta)`` and
    ``C = zeta / (Z+ + 1)``, ``Z+ ~ Poisson(E[W-] W^+ / theta)``.
    ``theta`` defaults to the empirical (table) or analytic (config) value of
    ``E[W^- + W^+]``.
    """
    if isinstance(source, AttributeConfig):
        return _ird_analytic(source, theta)
    return _ird_empirical(source, theta)


# ---------------------------------------------------------------- fixed point


class DivergenceError(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, live: int, budget: int, level: int):
        super().__init__(f"live population {live} exceeds node budget {budget} at generation {level}")
        self.live = live
        self.budget = budget
        self.level = level


@dataclass(frozen=True, eq=False)
class FixedPointPool:
    samples: np.ndarray
    generation: int
    law: BranchingLaw
    rho1: float = float("nan")

    def __len__(self):
        return self.samples.size


def _sum_children(pool: np.ndarray, counts: np.ndarray, rng: np.random.Generator, chunk: int = 4_000_000) -> np.ndarray:
    """``out[i] = sum of counts[i] uniform picks from pool``, in bounded memory."""
    counts = np.asarray(counts, dtype=np.int64)
    out = np.zeros(counts.size)
    csum = np.cumsum(counts)
    start = 0
    while start < counts.size:
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + chunk, side="right"))
        if stop == start:
            # one owner with more than `chunk` children
            left, acc = int(counts[start]), 0.0
            while left > 0:
                take = min(left, chunk)
                acc += pool[rng.integers(0, pool.size, size=take)].sum()
                left -= take
            out[start] = acc
            start += 1
            continue
        seg = counts[start:stop]
        total = int(seg.sum())
        if total:
            picks = pool[rng.integers(0, pool.size, size=total)]
            ends = np.cumsum(seg)
            running = np.concatenate(([0.0], np.cumsum(picks)))
            out[start:stop] = running[ends] - running[ends - seg]
        start = stop
    return out


def population_dynamics(
    law: BranchingLaw,
    pool_size: int = DEFAULT_POOL,
    generations: int = DEFAULT_GENERATIONS,
    rng: np.random.Generator | None = None,
    rho_check: int = 100_000,
) -> FixedPointPool:
    """Iterate ``X <- C Q + sum_{j<=N} C X_j`` on a pool started at zero."""
    if rng is None:
        raise ValueError("rng is required")
    if pool_size < 1:
        raise ValueError("pool_size must be positive")
    if generations < 0:
        raise ValueError("generations must be non-negative")
    rho1 = float("nan")
    if rho_check:
        n, _, c = law.generic(rng, rho_check)
        rho1 = float(np.mean(n * np.abs(c)))
        if rho1 >= RHO_WARN:
            warnings.warn(f"estimated rho_1 = E[N|C|] = {rho1:.4f} >= {RHO_WARN}; the fixed point may not exist", RuntimeWarning, stacklevel=2)
    pool = np.zeros(pool_size)
    for gen in range(generations):
        n, q, c = law.generic(rng, pool_size)
        pool = c * q + c * _sum_children(pool, n, rng)
        mean = pool.mean()
        if not np.isfinite(mean) or abs(mean) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"pool mean {mean:.3g} diverged at generation {gen + 1}; rho_1 = {rho1:.4f}")
    pool.setflags(write=False)
    return FixedPointPool(pool, generations, law, rho1)


def sample_r_star(
    law: BranchingLaw, pool: FixedPointPool, count: int, rng: np.random.Generator, stratified: bool = False
) -> EmpiricalDistribution:
    """``count`` draws of ``R* = Q0 + sum_{j<=N0} X_j`` with ``X_j`` resampled from the pool.

    ``stratified=True`` spreads root vertices evenly over an empirical law's
    attribute table (variance reduction; ignored for analytic laws).
    """
    if len(pool) == 0:
        raise ValueError("pool is empty")
    n0, q0 = law.root(rng, count, stratified)
    return EmpiricalDistribution(q0 + _sum_children(pool.samples, n0, rng))


def simulate_tree_ranks(
    law: BranchingLaw,
    depth: int,
    count: int,
    rng: np.random.Generator,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> np.ndarray:
    """``count`` independent draws of ``R^(k) = sum_{r<=k} sum_{j in A_r} Pi_j Q_j``.

    Trees are grown explicitly, generation by generation; each non-root node
    gets a fresh ``(N, Q, C)`` and weight ``Pi = Pi_parent * C``. Raises
    :class:`BudgetExceeded` when a generation holds more than ``node_budget``
    nodes.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    n0, q0 = law.root(rng, count)
    total = q0.copy()
    if depth == 0:
        return total
    tree = np.repeat(np.arange(count), n0)
    weight = np.ones(tree.size)
    for level in range(1, depth + 1):
        live = tree.size
        if live == 0:
            break
        if live > node_budget:
            raise BudgetExceeded(live, node_budget, level)
        n, q, c = law.generic(rng, live)
        weight = weight * c
        total += np.bincount(tree, weights=weight * q, minlength=count)
        if level < depth:
            tree = np.repeat(tree, n)
            weight = np.repeat(weight, n)
    return total


def simulate_tree_rank(law: BranchingLaw, depth: int, rng: np.random.Generator, node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """One draw of the depth-``depth`` tree rank."""
    return float(simulate_tree_ranks(law, depth, 1, rng, node_budget)[0])
