import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranlab.errors import IsolatedNode
from moranlab.graphcore import build_graph, gen_cycle, gen_double_star, gen_grid, gen_random_connected, gen_torus
from moranlab.weights import (
    WeightKind,
    build_weights,
    l1_offdiag_distance,
    validate_bistochastic,
    weights_from_matrix,
)

from oracles import loop_weights, random_connected_edges, random_symmetric_bistochastic


@pytest.mark.parametrize("kind", ["A", "P", "L", "M"])
@pytest.mark.parametrize("seed", range(5))
def test_matches_loop_construction(kind, seed):
    g = gen_random_connected(15, 0.2, seed)
    W = build_weights(g, kind)
    ref = np.array(loop_weights(g.n, g.edges.tolist(), kind))
    np.testing.assert_allclose(W.dense(), ref, atol=1e-14)


def test_c4_metropolis_equals_p():
    g = gen_cycle(4)
    M = build_weights(g, "M").dense()
    P = build_weights(g, "P").dense()
    np.testing.assert_allclose(M, P, atol=1e-15)
    np.testing.assert_allclose(M, g.dense_adjacency() / 2)
    assert np.all(np.diag(M) == 0)


def test_double_star_1_metropolis():
    g = gen_double_star(1)
    M = build_weights(g, "M").dense()
    h0, h1 = g.index_of("h0"), g.index_of("h1")
    l0, l1 = g.index_of("h0.0"), g.index_of("h1.0")
    assert M[h0, h1] == 0.5 and M[h0, l0] == 0.5 and M[h1, l1] == 0.5
    assert M[h0, h0] == 0.0 and M[h1, h1] == 0.0
    assert M[l0, l0] == 0.5 and M[l1, l1] == 0.5


@pytest.mark.parametrize("g", [gen_cycle(7), gen_grid(4, 6), gen_double_star(4), gen_random_connected(20, 0.2, 3)])
def test_kind_invariants(g):
    A = build_weights(g, "A")
    P = build_weights(g, "P")
    L = build_weights(g, "L")
    M = build_weights(g, "M")
    M2 = build_weights(g, "M2")
    E = g.edge_count
    assert A.total_weight == 2 * E
    assert P.total_weight == pytest.approx(g.n)
    assert L.total_weight == 4 * E
    assert M.total_weight == pytest.approx(g.n)
    np.testing.assert_allclose(P.dense().sum(axis=1), 1.0, atol=1e-12)
    assert np.all(L.dense().sum(axis=1) == 0)
    assert np.linalg.eigvalsh(L.dense()).min() >= -1e-10
    Md = M.dense()
    np.testing.assert_allclose(Md, Md.T, atol=1e-12)
    assert Md.min() >= 0
    assert validate_bistochastic(M)
    np.testing.assert_allclose(M2.dense(), Md @ Md.T, atol=1e-12)
    assert validate_bistochastic(M2)
    assert np.linalg.eigvalsh(M2.dense()).min() >= -1e-12


@pytest.mark.parametrize("g", [gen_cycle(8), gen_torus(4, 5)])
def test_regular_graph_kinds_coincide(g):
    d = g.degrees[0]
    A = build_weights(g, "A").dense()
    np.testing.assert_allclose(build_weights(g, "P").dense(), A / d, atol=1e-12)
    np.testing.assert_allclose(build_weights(g, "M").dense(), A / d, atol=1e-12)
    np.testing.assert_allclose(build_weights(g, "L").dense(), d * np.eye(g.n) - A, atol=1e-12)


def test_p_not_bistochastic_on_double_star():
    assert not validate_bistochastic(build_weights(gen_double_star(3), "P"))


def test_identity_is_bistochastic():
    assert validate_bistochastic(np.eye(5))


def test_isolated_node_rejected_for_degree_kinds():
    g = build_graph([("a", "b")], nodes=["a", "b", "c"])
    build_weights(g, "A")
    build_weights(g, "L")
    for kind in ("P", "M", "M2"):
        with pytest.raises(IsolatedNode):
            build_weights(g, kind)


def test_custom_zero_matrix_rejected():
    with pytest.raises(Exception):
        weights_from_matrix(np.zeros((3, 3)))


def test_custom_tags_invariants():
    W = weights_from_matrix(np.eye(4))
    assert W.kind is WeightKind.CUSTOM
    assert W.symmetric and W.row_stochastic and W.bistochastic
    W2 = weights_from_matrix(np.array([[0.0, 2.0], [1.0, 0.0]]))
    assert not W2.symmetric and not W2.row_stochastic


@pytest.mark.parametrize("kind", ["A", "P", "L", "M", "M2"])
def test_sparse_matches_dense(kind):
    g = gen_random_connected(60, 0.05, 2)
    dense = build_weights(g, kind)
    sparse = build_weights(g, kind, dense_threshold=10)
    assert sparse.is_sparse and not dense.is_sparse
    np.testing.assert_allclose(sparse.dense(), dense.dense(), atol=1e-13)
    assert sparse.total_weight == pytest.approx(dense.total_weight, rel=1e-13)


def test_kind_parse_aliases():
    assert WeightKind.parse("metropolis") is WeightKind.M
    assert WeightKind.parse("M²") is WeightKind.M2
    assert WeightKind.parse("l") is WeightKind.L


def test_l1_distance_identical_is_zero():
    M = build_weights(gen_grid(3, 3), "M")
    assert l1_offdiag_distance(M, M) == 0.0


@pytest.mark.parametrize("g", [gen_cycle(6), gen_torus(3, 4)])
def test_l1_distance_regular_m_vs_p(g):
    assert l1_offdiag_distance(build_weights(g, "M"), build_weights(g, "P")) == pytest.approx(0.0, abs=1e-14)


def test_l1_distance_double_star_2():
    # hub degree 3, leaf degree 1: each hub-leaf pair differs by |1/3 - 1| in the leaf row,
    # hub-hub entries agree; 4 leaves in total
    g = gen_double_star(2)
    dist = l1_offdiag_distance(build_weights(g, "M"), build_weights(g, "P"))
    assert dist == pytest.approx(4 * (1 - 1 / 3), abs=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_metropolis_closest_to_p_among_sampled(n):
    rng = np.random.Generator(np.random.Philox(n))
    edges = random_connected_edges(rng, n, 0.4)
    g = build_graph(edges, nodes=range(n))
    M = build_weights(g, "M")
    P = build_weights(g, "P")
    d_m = l1_offdiag_distance(M, P)
    for _ in range(250):
        Q = random_symmetric_bistochastic(rng, n, edges)
        assert validate_bistochastic(Q)
        assert d_m <= l1_offdiag_distance(Q, P.dense()) + 1e-12


@given(st.integers(3, 20), st.floats(0.0, 0.6), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_metropolis_always_bistochastic(n, p, seed):
    g = gen_random_connected(n, p, seed)
    M = build_weights(g, "M").dense()
    np.testing.assert_allclose(M.sum(axis=0), 1, atol=1e-12)
    np.testing.assert_allclose(M.sum(axis=1), 1, atol=1e-12)
    np.testing.assert_array_equal(M, M.T)
