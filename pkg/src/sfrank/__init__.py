"""Generalized PageRank on scale-free directed random graphs.

Graph generation (directed configuration model, inhomogeneous random
digraphs), truncated power-series PageRank, the limiting marked
Galton-Watson law and its fixed point, and the statistics used to compare
them.
"""

__version__ = "0.1.0"

from .branching import (  # noqa: E402
    BranchingLaw,
    FixedPointPool,
    law_from_dcm,
    law_from_ird,
    population_dynamics,
    sample_r_star,
    simulate_tree_rank,
    simulate_tree_ranks,
)
from .graphgen import (  # noqa: E402
    AttributeConfig,
    Attributes,
    DiGraph,
    VertexAttributes,
    build_dcm,
    build_ird,
    sample_attributes,
)
from .pagerank import RankVector, compute_pagerank, iteration_error_bound  # noqa: E402
from .stats import EmpiricalDistribution, TailReport, hill_index, tail_ratio, wasserstein1  # noqa: E402
