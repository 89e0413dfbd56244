import numpy as np
import pytest

from sfrank.graphgen import (
    AttemptsExhausted,
    AttributeConfig,
    Attributes,
    DiGraph,
    ModelTag,
    balance_degrees,
    build_dcm,
    build_ird,
    couple,
    empirical_theta,
    expected_edges,
    pareto,
    sample_attributes,
)
from sfrank.rng import make_rng


def table(d_in, d_out):
    n = len(d_in)
    return Attributes(np.asarray(d_in, dtype=np.int64), np.asarray(d_out, dtype=np.int64), np.full(n, 0.15), np.full(n, 0.85))


def test_single_vertex_self_loop():
    g = build_dcm(table([1], [1]), "multigraph", make_rng(0))
    assert g.edge_multiset() == [(0, 0)]


def test_two_vertices_forced_edge():
    # vertex 1 has one outbound stub, vertex 0 one inbound stub
    g = build_dcm(table([1, 0], [0, 1]), "multigraph", make_rng(3))
    assert g.edge_multiset() == [(1, 0)]


@pytest.mark.parametrize("seed", range(5))
def test_dcm_preserves_degrees(seed):
    rng = make_rng(seed)
    attrs = sample_attributes(AttributeConfig(n=500), rng, integer=True)
    g = build_dcm(attrs, "multigraph", rng)
    assert np.array_equal(g.in_degree, attrs.in_param)
    assert np.array_equal(g.out_degree, attrs.out_param)


def test_dcm_rejects_unbalanced():
    with pytest.raises(ValueError, match="half-edge"):
        build_dcm(table([1, 1], [1, 0]), "multigraph", make_rng(0))


def test_erased_is_simple_and_within_multigraph():
    rng = make_rng(11)
    attrs = sample_attributes(AttributeConfig(n=300), rng, integer=True)
    multi = build_dcm(attrs, "multigraph", make_rng(5))
    erased = build_dcm(attrs, "erased", make_rng(5))
    assert erased.is_simple()
    assert set(erased.edge_multiset()) <= set(multi.edge_multiset())
    assert np.all(erased.in_degree <= attrs.in_param)
    assert np.all(erased.out_degree <= attrs.out_param)


def test_repeated_returns_simple_graph_for_light_degrees():
    g = build_dcm(table([1, 1, 1, 0], [0, 1, 1, 1]), "repeated", make_rng(2))
    assert g.is_simple()
    assert np.array_equal(g.in_degree, [1, 1, 1, 0])


def test_repeated_exhausts_on_impossible_sequence():
    # a single vertex can only pair with itself
    with pytest.raises(AttemptsExhausted) as info:
        build_dcm(table([2], [2]), "repeated", make_rng(0), max_attempts=3)
    assert info.value.attempts == 3
    assert info.value.graph.num_edges == 2


def test_graph_is_immutable_and_sorted():
    attrs = table([1, 1, 1], [1, 1, 1])
    g = DiGraph(3, [2, 0, 1], [0, 1, 2], attrs, ModelTag.DCM_MULTIGRAPH)
    assert g.src.tolist() == [0, 1, 2]
    with pytest.raises(ValueError):
        g.src[0] = 5
    assert g.out_neighbors(2).tolist() == [0]
    assert g.in_neighbors(0).tolist() == [2]


def test_same_seed_same_graph():
    cfg = AttributeConfig(n=400)
    graphs = []
    for _ in range(2):
        rng = make_rng(42)
        attrs = sample_attributes(cfg, rng)
        graphs.append(build_ird(attrs, None, rng))
    assert graphs[0].edge_multiset() == graphs[1].edge_multiset()


def test_pareto_tail():
    x = pareto(make_rng(1), 2.5, 12.0, 200_000)
    assert x.min() >= 12.0
    assert np.mean(x > 24.0) == pytest.approx(2.0**-2.5, abs=0.004)


def test_power_coupling_maps_scale_to_scale():
    cfg = AttributeConfig(n=10, dependence="power_coupled")
    assert couple(np.array([8.0]), cfg)[0] == pytest.approx(12.0)
    # exponent alpha/beta keeps W+ Pareto(beta)
    w_out = couple(pareto(make_rng(2), 1.5, 8.0, 200_000), cfg)
    assert np.mean(w_out > 24.0) == pytest.approx(2.0**-2.5, abs=0.004)


def test_limiting_mean_degree():
    assert AttributeConfig(n=1).mean_degree == pytest.approx(10.909, abs=1e-3)


def test_balance_degrees_equalizes_totals():
    rng = make_rng(7)
    d_in = rng.integers(0, 30, 1000)
    d_out = rng.integers(0, 10, 1000)
    a, b = balance_degrees(d_in, d_out, rng)
    assert a.sum() == b.sum()
    assert np.all(a >= d_in) and np.all(b >= d_out)


def test_integer_attributes_are_balanced():
    attrs = sample_attributes(AttributeConfig(n=2000, dependence="power_coupled"), make_rng(8), integer=True)
    assert attrs.is_integer
    assert attrs.in_param.sum() == attrs.out_param.sum()


def test_ird_edge_count_near_expectation():
    cfg = AttributeConfig(n=1000)
    ratios = []
    for seed in range(20):
        rng = make_rng(seed)
        attrs = sample_attributes(cfg, rng)
        theta = empirical_theta(attrs)
        g = build_ird(attrs, theta, rng)
        ratios.append(g.num_edges / expected_edges(attrs, theta))
    assert abs(np.mean(ratios) - 1) < 0.05


def test_ird_is_simple():
    rng = make_rng(3)
    attrs = sample_attributes(AttributeConfig(n=800), rng)
    assert build_ird(attrs, None, rng).is_simple()


def test_ird_skip_matches_dense_in_law():
    attrs = sample_attributes(AttributeConfig(n=300), make_rng(4))
    theta = empirical_theta(attrs)
    dense = [build_ird(attrs, theta, make_rng(s), "dense").num_edges for s in range(30)]
    skip = [build_ird(attrs, theta, make_rng(s), "skip").num_edges for s in range(30)]
    expected = expected_edges(attrs, theta)
    for counts in (dense, skip):
        assert abs(np.mean(counts) - expected) < 4 * np.sqrt(expected / 30)


def test_ird_certain_edge():
    attrs = Attributes(np.array([0.0, 10.0]), np.array([10.0, 0.0]), np.full(2, 0.15), np.full(2, 0.85))
    g = build_ird(attrs, 1.0, make_rng(0))
    assert g.edge_multiset() == [(0, 1)]


def test_config_validation():
    with pytest.raises(ValueError):
        AttributeConfig(n=0)
    with pytest.raises(ValueError):
        AttributeConfig(n=10, alpha=1.0)
