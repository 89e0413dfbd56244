"""Replication harness: Venn overlap study, d1 convergence and tail study."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import branching
from .graphgen import AttributeConfig, Dependence, DiGraph, build_dcm, build_ird, empirical_theta, sample_attributes
from .pagerank import DEFAULT_ITERATIONS, RankVector, compute_pagerank, contribution_weights
from .rng import make_rng
from .stats import DEFAULT_K_FRAC, EmpiricalDistribution, default_k, hill_index, tail_ratio, wasserstein1

REGIONS = ("A&B&C", "A&B&~C", "~A&B&C", "A&~B&C", "A&~B&~C", "~A&B&~C", "~A&~B&C", "~(A|B|C)")
H_REGIONS = ("A&H", "A&~H", "~A&H")
MODELS = ("ird", "dcm")
DCM_MODES = ("multigraph", "repeated", "erased")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "ird"
    dcm_mode: str = "multigraph"
    n: int = 10_000
    alpha: float = 1.5
    b: float = 8.0
    beta: float = 2.5
    c_scale: float = 12.0
    dependence: str = "independent"
    damping: float = 0.85
    iterations: int = DEFAULT_ITERATIONS
    top_fraction: float = 0.05
    replications: int = 20
    seed: int = 0
    theta: str = "empirical"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError("model", f"expected one of {MODELS}, got {self.model!r}")
        if self.dcm_mode not in DCM_MODES:
            raise ConfigError("dcm_mode", f"expected one of {DCM_MODES}, got {self.dcm_mode!r}")
        try:
            Dependence(self.dependence)
        except ValueError:
            raise ConfigError("dependence", f"expected independent or power_coupled, got {self.dependence!r}") from None
        if self.theta not in ("empirical", "analytic"):
            raise ConfigError("theta", f"expected 'empirical' or 'analytic', got {self.theta!r}")
        if not 0 < self.top_fraction < 0.5:
            raise ConfigError("top_fraction", f"must lie in (0, 0.5), got {self.top_fraction}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError("replications", f"must be a positive integer, got {self.replications}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigError("iterations", f"must be a positive integer, got {self.iterations}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n", f"must be a positive integer, got {self.n}")
        for name in ("alpha", "beta"):
            if not getattr(self, name) > 1:
                raise ConfigError(name, f"must exceed 1, got {getattr(self, name)}")
        for name in ("b", "c_scale"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"must be positive, got {getattr(self, name)}")
        if not 0 < self.damping < 1:
            raise ConfigError("damping", f"must lie in (0, 1), got {self.damping}")

    def attribute_config(self) -> AttributeConfig:
        return AttributeConfig(
            n=self.n,
            alpha=self.alpha,
            b=self.b,
            beta=self.beta,
            c_scale=self.c_scale,
            dependence=Dependence(self.dependence),
            damping=self.damping,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
        known = {f.name: f for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        kwargs = {}
        for key, value in data.items():
            default = known[key].default
            try:
                if isinstance(default, bool) or isinstance(default, str):
                    kwargs[key] = str(value)
                elif isinstance(default, int):
                    if isinstance(value, bool) or float(value) != int(value):
                        raise ValueError
                    kwargs[key] = int(value)
                else:
                    kwargs[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, f"invalid value {value!r}") from None
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def generate_graph(config: ExperimentConfig, rng: np.random.Generator) -> DiGraph:
    attr_config = config.attribute_config()
    if config.model == "dcm":
        attrs = sample_attributes(attr_config, rng, integer=True)
        return build_dcm(attrs, config.dcm_mode, rng)
    attrs = sample_attributes(attr_config, rng)
    theta = attr_config.theta if config.theta == "analytic" else empirical_theta(attrs)
    return build_ird(attrs, theta, rng)


def branching_law(graph: DiGraph):
    """Empirical limit law built from the graph's own attribute table."""
    if graph.model_tag.value.startswith("dcm"):
        return branching.law_from_dcm(graph.attrs)
    return branching.law_from_ird(graph.attrs, graph.meta.get("theta"))


# ------------------------------------------------------------------ Venn


def top_set(score: np.ndarray, size: int) -> np.ndarray:
    """Exactly ``size`` highest scores; ties broken by lower vertex index."""
    mask = np.zeros(score.size, dtype=bool)
    mask[np.argsort(-score, kind="stable")[:size]] = True
    return mask


def top_set_with_ties(score: np.ndarray, size: int) -> np.ndarray:
    """All vertices scoring at least the ``size``-th largest value."""
    threshold = np.sort(score)[::-1][size - 1]
    return score >= threshold


def venn_counts(graph: DiGraph, ranks: RankVector, top_fraction: float = 0.05) -> dict:
    n = graph.n
    size = math.ceil(top_fraction * n)
    r = np.asarray(ranks.values)
    a = top_set(r, size)
    b = top_set_with_ties(graph.in_degree, size)
    h = top_set(contribution_weights(graph) * r, size)
    c = np.zeros(n, dtype=bool)
    c[graph.dst[h[graph.src]]] = True
    cells = {
        "A&B&C": a & b & c,
        "A&B&~C": a & b & ~c,
        "~A&B&C": ~a & b & c,
        "A&~B&C": a & ~b & c,
        "A&~B&~C": a & ~b & ~c,
        "~A&B&~C": ~a & b & ~c,
        "~A&~B&C": ~a & ~b & c,
        "~(A|B|C)": ~(a | b | c),
        "A&H": a & h,
        "A&~H": a & ~h,
        "~A&H": ~a & h,
    }
    counts = {k: int(v.sum()) for k, v in cells.items()}
    counts.update(n=n, A=int(a.sum()), B=int(b.sum()), C=int(c.sum()), H=int(h.sum()))
    return counts


@dataclass
class VennResult:
    cell_percentages: dict
    h_overlap: dict
    replications: int
    per_replication: list = field(default_factory=list)

    def set_sizes(self) -> dict:
        """Average percentage of vertices in A, B, C and H."""
        return {
            key: float(np.mean([100.0 * rep[key] / rep["n"] for rep in self.per_replication]))
            for key in ("A", "B", "C", "H")
        }

    def to_dict(self) -> dict:
        return {
            "cell_percentages": self.cell_percentages,
            "h_overlap": self.h_overlap,
            "set_sizes": self.set_sizes(),
            "replications": self.replications,
            "per_replication": self.per_replication,
        }


def aggregate_venn(per_replication: list[dict]) -> VennResult:
    def avg(key):
        return float(np.mean([100.0 * rep[key] / rep["n"] for rep in per_replication]))

    return VennResult(
        {k: avg(k) for k in REGIONS},
        {k: avg(k) for k in H_REGIONS},
        len(per_replication),
        per_replication,
    )


def venn_replication(config: ExperimentConfig, index: int, return_ranks: bool = False):
    rng = make_rng(config.seed, index)
    try:
        graph = generate_graph(config, rng)
        ranks = compute_pagerank(graph, config.damping, config.iterations)
    except Exception as exc:
        raise RuntimeError(f"replication {index}: {exc}") from exc
    counts = venn_counts(graph, ranks, config.top_fraction)
    counts["replication"] = index
    return (counts, graph, ranks) if return_ranks else counts


def _venn_worker(args):
    config, index = args
    return venn_replication(config, index)


def run_venn(config: ExperimentConfig, workers: int = 1) -> VennResult:
    """Top-set overlap study averaged over ``config.replications`` graphs.

    A = top fraction by rank, B = top fraction by in-degree (ties included),
    H = top fraction by ``C_i R_i``, C = vertices with an in-neighbour in H.
    """
    jobs = [(config, i) for i in range(config.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_venn_worker, jobs))
    else:
        per_rep = [_venn_worker(job) for job in jobs]
    return aggregate_venn(per_rep)


# ------------------------------------------------------------ convergence


@dataclass
class ConvergenceRow:
    n: int
    seed: int
    d1: float
    rank_mean: float
    r_star_mean: float


def convergence_point(
    config: ExperimentConfig,
    n: int,
    seed: int,
    r_star_samples: int = 100_000,
    pool_size: int = 50_000,
    generations: int = 30,
) -> ConvergenceRow:
    cfg = config.replace(n=n, seed=seed)
    rng = make_rng(seed, n)
    graph = generate_graph(cfg, rng)
    ranks = compute_pagerank(graph, cfg.damping, cfg.iterations)
    law = branching_law(graph)
    pool = branching.population_dynamics(law, pool_size, generations, rng)
    r_star = branching.sample_r_star(law, pool, r_star_samples, rng, stratified=True)
    h_n = EmpiricalDistribution(ranks.values)
    return ConvergenceRow(n, seed, wasserstein1(h_n, r_star), h_n.mean(), r_star.mean())


def run_convergence(
    config: ExperimentConfig,
    n_values=(100, 1_000, 10_000),
    seeds=range(10),
    r_star_samples: int = 100_000,
    pool_size: int = 50_000,
    generations: int = 30,
) -> dict:
    """``d1(H_n, H_R*)`` per ``n`` and seed, with the law built from the same attributes."""
    n_values = list(n_values)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError("n_values", "must be strictly increasing")
    rows = [
        convergence_point(config, n, config.seed * 1_000_003 + s, r_star_samples, pool_size, generations)
        for n in n_values
        for s in seeds
    ]
    table = [(n, float(np.mean([r.d1 for r in rows if r.n == n]))) for n in n_values]
    return {"table": table, "rows": [dataclasses.asdict(r) for r in rows]}


# ------------------------------------------------------------------ tails


def run_tail(
    config: ExperimentConfig,
    k_frac: float = DEFAULT_K_FRAC,
    mc_draws: int = 1_000_000,
    quantile_grid=(0.1, 0.01, 0.001),
    pool_size: int = 100_000,
    generations: int = 30,
) -> dict:
    """Hill indexes of ranks, in-degrees, R* and the X pool, plus tail ratios.

    The ratio curves compare ``C N`` and the size-biased ``N`` against the root
    in-degree ``N0``, all drawn from the analytic limit law of the model.
    """
    if not config.alpha > 1:
        raise ConfigError("alpha", "must exceed 1")
    rng = make_rng(config.seed, 0)
    graph = generate_graph(config, rng)
    ranks = compute_pagerank(graph, config.damping, config.iterations)

    def hill(x):
        x = np.asarray(x, dtype=float)
        return hill_index(x, default_k(x.size, k_frac)).hill_index

    law = branching_law(graph)
    pool = branching.population_dynamics(law, pool_size, generations, rng)
    r_star = branching.sample_r_star(law, pool, pool_size, rng)

    attr_config = config.attribute_config()
    limit = branching.law_from_dcm(attr_config) if config.model == "dcm" else branching.law_from_ird(attr_config)
    n_gen, _, c_gen = limit.generic(rng, mc_draws)
    n_root, _ = limit.root(rng, mc_draws)
    cn = c_gen * n_gen
    return {
        "hill": {
            "pagerank": hill(ranks.values),
            "in_degree": hill(graph.in_degree),
            "r_star": hill(r_star.sorted_samples),
            "x_pool": hill(pool.samples),
            "root_in_degree": hill(n_root),
            "size_biased_in_degree": hill(n_gen),
        },
        "ratio_cn_vs_n0": tail_ratio(cn, n_root.astype(float), quantile_grid),
        "ratio_n_vs_n0": tail_ratio(n_gen.astype(float), n_root.astype(float), quantile_grid),
        "ratio_pagerank_vs_in_degree": tail_ratio(ranks.values, graph.in_degree.astype(float), quantile_grid[:2]),
        "rho1": pool.rho1,
    }
