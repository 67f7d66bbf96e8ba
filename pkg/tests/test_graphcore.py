import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranlab.errors import EmptyGraph, Exhausted, InvalidParam, SelfLoop
from moranlab.graphcore import (
    Graph,
    build_graph,
    gen_cycle,
    gen_double_star,
    gen_grid,
    gen_hex_hexagon,
    gen_path,
    gen_random_connected,
    gen_torus,
    graph_from_adjacency,
    is_bipartite,
    is_connected,
    n_components,
    random_edge_deletion,
    structure_report,
    triangle_count,
)

from oracles import loop_triangles


def test_single_edge():
    g = build_graph([("a", "b")])
    assert g.n == 2 and g.edge_count == 1
    assert g.node_ids == ("a", "b")


def test_reversed_duplicate_collapses():
    g = build_graph([("a", "b"), ("b", "a"), ("a", "b")])
    assert g.edge_count == 1
    assert g == build_graph([("a", "b")])


def test_node_order_is_first_appearance():
    g = build_graph([("c", "a"), ("a", "b")])
    assert g.node_ids == ("c", "a", "b")
    g2 = build_graph([("c", "a")], nodes=["z", "a"])
    assert g2.node_ids == ("z", "a", "c")


def test_self_loop_rejected():
    with pytest.raises(SelfLoop):
        build_graph([("a", "a")])


def test_isolated_nodes_allowed():
    g = build_graph([("a", "b")], nodes=["a", "b", "c"])
    assert g.degrees.tolist() == [1, 1, 0]
    assert n_components(g) == 2


def test_graph_from_adjacency_roundtrip():
    g = gen_grid(3, 4)
    h = graph_from_adjacency(g.dense_adjacency(), node_ids=g.node_ids)
    assert h == g


def test_structure_c4():
    r = structure_report(gen_cycle(4))
    assert r.connected and r.bipartite and r.triangles == 0


def test_structure_k3():
    r = structure_report(build_graph([(0, 1), (1, 2), (0, 2)]))
    assert r.triangles == 1
    assert not r.bipartite


@pytest.mark.parametrize("k", range(2, 11))
def test_cycle_parity(k):
    assert is_bipartite(gen_cycle(2 * k))
    assert not is_bipartite(gen_cycle(2 * k + 1))


def test_double_star_smallest():
    g = gen_double_star(1)
    assert g.n == 4 and g.edge_count == 3
    assert sorted(g.degrees.tolist()) == [1, 1, 2, 2]


@pytest.mark.parametrize("leaves", [1, 5, 1000])
def test_double_star_counts(leaves):
    g = gen_double_star(leaves)
    assert g.n == 2 * leaves + 2
    assert g.edge_count == 2 * leaves + 1
    assert is_connected(g)


def test_grid_13():
    g = gen_grid(13, 13)
    assert g.n == 169 and g.edge_count == 2 * 13 * 12


@pytest.mark.parametrize("rows,cols", [(3, 3), (4, 6), (5, 7)])
def test_torus_is_4_regular(rows, cols):
    g = gen_torus(rows, cols)
    assert g.is_regular() and g.degrees[0] == 4
    assert g.edge_count == 2 * rows * cols


@pytest.mark.parametrize("side", [1, 2, 3, 8, 16])
def test_hex_hexagon_counts(side):
    g = gen_hex_hexagon(side)
    assert g.n == 3 * side**2 - 3 * side + 1
    # interior nodes have all six neighbours
    interior = [
        k for k, nid in enumerate(g.node_ids)
        if max(abs(int(nid.split(",")[0])), abs(int(nid.split(",")[1])), abs(sum(map(int, nid.split(","))))) < side - 1
    ]
    assert np.all(g.degrees[interior] == 6)


def test_hex_hexagon_8_reference():
    g = gen_hex_hexagon(8)
    assert (g.n, g.edge_count) == (169, 462)
    assert not is_bipartite(g)


@pytest.mark.parametrize("factory", [lambda: gen_path(7), lambda: gen_cycle(9), lambda: gen_grid(4, 5),
                                     lambda: gen_hex_hexagon(4), lambda: gen_double_star(3),
                                     lambda: gen_random_connected(30, 0.1, 4)])
def test_generated_adjacency_symmetric_zero_diag(factory):
    A = factory().dense_adjacency()
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)


def test_edge_count_is_half_nonzeros():
    g = gen_random_connected(40, 0.1, 1)
    assert g.adjacency.nnz == 2 * g.edge_count


@given(st.integers(2, 25), st.floats(0.0, 0.5), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_random_connected_is_connected(n, p, seed):
    g = gen_random_connected(n, p, seed)
    assert g.n == n and is_connected(g)
    assert g == gen_random_connected(n, p, seed)


@given(st.integers(3, 12), st.floats(0.0, 0.8), st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_triangle_count_matches_loops(n, p, seed):
    g = gen_random_connected(n, p, seed)
    assert triangle_count(g) == loop_triangles(n, g.edges.tolist())


def test_deletion_fraction_zero_is_identity():
    g = gen_hex_hexagon(4)
    assert random_edge_deletion(g, 0.0, seed=3) is g


def test_deletion_hex_ten_percent():
    g = gen_hex_hexagon(8)
    h = random_edge_deletion(g, 0.10, seed=7)
    assert h.n == 169 and is_connected(h)
    assert h.edge_count == 462 - round(46.2)
    assert h.node_ids == g.node_ids
    assert h == random_edge_deletion(g, 0.10, seed=7)
    assert h != random_edge_deletion(g, 0.10, seed=8)


def test_deletion_p2_exhausted():
    with pytest.raises(Exhausted):
        random_edge_deletion(gen_path(2), 0.5, seed=0, max_rejections=50)


@given(st.integers(0, 10_000), st.floats(0.0, 0.3))
@settings(max_examples=25, deadline=None)
def test_deletion_always_connected(seed, frac):
    h = random_edge_deletion(gen_grid(5, 5), frac, seed)
    assert is_connected(h)


@pytest.mark.parametrize("bad", [-0.1, 1.0])
def test_deletion_rejects_bad_fraction(bad):
    with pytest.raises(InvalidParam):
        random_edge_deletion(gen_cycle(5), bad, seed=0)


def test_empty_graph_rejected():
    with pytest.raises((EmptyGraph, InvalidParam)):
        build_graph([])


def test_graph_is_hashable_and_immutable():
    g = gen_cycle(5)
    assert hash(g) == hash(gen_cycle(5))
    with pytest.raises(Exception):
        g.node_ids = ()
    assert isinstance(g, Graph)
