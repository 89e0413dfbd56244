import numpy as np
import pytest

from sfrank.experiments import (
    H_REGIONS,
    REGIONS,
    ConfigError,
    ExperimentConfig,
    aggregate_venn,
    run_convergence,
    run_tail,
    run_venn,
    top_set,
    top_set_with_ties,
    venn_counts,
)
from sfrank.graphgen import Attributes, DiGraph, ModelTag
from sfrank.pagerank import compute_pagerank


def test_top_set_breaks_ties_by_index():
    assert top_set(np.array([1.0, 3.0, 3.0, 2.0]), 2).tolist() == [False, True, True, False]
    assert top_set(np.array([3.0, 3.0, 3.0]), 2).tolist() == [True, True, False]


def test_top_set_with_ties_includes_all_tied():
    assert top_set_with_ties(np.array([5, 2, 2, 1]), 2).tolist() == [True, True, True, False]


def test_venn_cells_on_star():
    # vertices 1..19 each point to 0; vertex 0 has the top rank and in-degree
    n = 20
    attrs = Attributes(np.zeros(n, np.int64), np.zeros(n, np.int64), np.full(n, 0.15), np.full(n, 0.85))
    g = DiGraph(n, np.arange(1, n), np.zeros(n - 1, np.int64), attrs, ModelTag.DCM_MULTIGRAPH)
    counts = venn_counts(g, compute_pagerank(g, k=5), 0.05)
    assert counts["A"] == counts["B"] == counts["H"] == 1
    # the hub is dangling but still has the largest C_j R_j, so C is empty
    assert counts["A&H"] == 1
    assert counts["C"] == 0
    assert counts["A&B&~C"] == 1
    assert counts["~(A|B|C)"] == n - 1
    assert sum(counts[k] for k in REGIONS) == n


def test_venn_partition_sums_to_hundred():
    result = run_venn(ExperimentConfig(n=500, replications=2, seed=3))
    assert sum(result.cell_percentages.values()) == pytest.approx(100.0)
    assert set(result.h_overlap) == set(H_REGIONS)
    assert result.replications == 2


def test_venn_deterministic():
    cfg = ExperimentConfig(n=300, replications=2, seed=9, model="dcm")
    assert run_venn(cfg).to_dict() == run_venn(cfg).to_dict()


def test_aggregate_averages_percentages():
    reps = [{"n": 10, **{k: 1 for k in REGIONS + H_REGIONS}}, {"n": 20, **{k: 1 for k in REGIONS + H_REGIONS}}]
    assert aggregate_venn(reps).cell_percentages["A&B&C"] == pytest.approx(7.5)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"n": 0}, "n"),
        ({"top_fraction": 0.7}, "top_fraction"),
        ({"alpha": 1.0}, "alpha"),
        ({"model": "er"}, "model"),
        ({"dependence": "weird"}, "dependence"),
        ({"bogus": 1}, "bogus"),
        ({"replications": 2.5}, "replications"),
    ],
)
def test_config_errors_name_field(data, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(data)
    assert info.value.field == field


def test_config_round_trip():
    cfg = ExperimentConfig(model="dcm", n=123, dependence="power_coupled")
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_convergence_small_run():
    out = run_convergence(ExperimentConfig(n=100), n_values=(50, 100), seeds=range(2), r_star_samples=2000, pool_size=2000, generations=10)
    assert [n for n, _ in out["table"]] == [50, 100]
    assert len(out["rows"]) == 4
    assert all(r["d1"] >= 0 for r in out["rows"])
    with pytest.raises(ConfigError):
        run_convergence(ExperimentConfig(), n_values=(100, 50), seeds=range(1))


def test_tail_small_run():
    out = run_tail(ExperimentConfig(n=1000), mc_draws=20_000, pool_size=5000, generations=10)
    assert set(out["hill"]) >= {"pagerank", "in_degree", "r_star"}
    assert len(out["ratio_cn_vs_n0"]) == 3
    assert out["rho1"] < 1
