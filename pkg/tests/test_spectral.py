import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranlab.errors import ConvergenceFailure, DenseOnly, Disconnected, InvalidParam, NotSymmetric
from moranlab.graphcore import (
    build_graph,
    gen_cycle,
    gen_double_star,
    gen_grid,
    gen_hex_hexagon,
    gen_path,
    gen_random_connected,
    gen_torus,
    is_connected,
    triangle_count,
)
from moranlab.moran import moran_i
from moranlab.spectral import (
    Projection,
    RangeMethod,
    achievable_range,
    decompose_i,
    degree_eigenvalue_bounds,
    dirichlet_energy,
    fiedler_vector,
    generalized_basis,
    generalized_extremes,
    lagrange_extremes_p,
    spectral_gap,
    spectrum_report,
    symmetric_spectrum,
)
from moranlab.weights import build_weights, weights_from_matrix

from oracles import loop_triangles, null_space_range


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


# ------------------------------------------------------------------ projection


@pytest.mark.parametrize("n", [2, 3, 7, 50])
def test_projection_basis_orthonormal_and_mean_zero(n):
    U = Projection(n).basis()
    np.testing.assert_allclose(U.T @ U, np.eye(n - 1), atol=1e-13)
    np.testing.assert_allclose(U.sum(axis=0), 0.0, atol=1e-13)


def test_projection_lift_restrict():
    pr = Projection(9)
    x = _rng(0).normal(size=9)
    np.testing.assert_allclose(pr.lift(pr.restrict(x)), x - x.mean(), atol=1e-13)


def test_reduced_operator_matches_dense():
    g = gen_random_connected(30, 0.1, 5)
    W = build_weights(g, "A")
    pr = Projection(g.n)
    B = pr.reduce_dense(W.dense())
    op = pr.reduced_operator(build_weights(g, "A", dense_threshold=5))
    y = _rng(1).normal(size=g.n - 1)
    np.testing.assert_allclose(op.matvec(y), B @ y, atol=1e-12)


# ------------------------------------------------------------------ spectrum


def test_c4_spectrum():
    spec = symmetric_spectrum(build_weights(gen_cycle(4), "A"))
    np.testing.assert_allclose(spec.eigenvalues, [2, 0, 0, -2], atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_spectral_sums(seed):
    g = gen_random_connected(40, 0.1, seed)
    lam = symmetric_spectrum(build_weights(g, "A")).eigenvalues
    n, t = g.n, loop_triangles(g.n, g.edges.tolist())
    assert abs(lam.sum()) <= 1e-8 * n
    assert (lam**2).sum() == pytest.approx(n * g.degree_stats().d_avg, rel=1e-8)
    assert (lam**3).sum() == pytest.approx(6 * t, rel=1e-8, abs=1e-8)
    assert t == triangle_count(g)


def test_laplacian_kernel():
    g = gen_grid(4, 5)
    spec = symmetric_spectrum(build_weights(g, "L"))
    assert spec.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)
    psi = spec.eigenvectors[:, 0]
    np.testing.assert_allclose(np.abs(psi), 1 / np.sqrt(g.n), atol=1e-12)


def test_sparse_spectrum_ends():
    g = gen_grid(30, 30)
    dense = symmetric_spectrum(build_weights(g, "A")).eigenvalues
    sparse = symmetric_spectrum(build_weights(g, "A", dense_threshold=100), k=3)
    assert not sparse.complete
    # Lanczos may drop copies of repeated eigenvalues, so compare as sets
    for lam in sparse.eigenvalues:
        assert np.min(np.abs(dense - lam)) <= 1e-9
    assert sparse.eigenvalues[0] == pytest.approx(dense[0], abs=1e-9)
    assert sparse.eigenvalues[-1] == pytest.approx(dense[-1], abs=1e-9)


def test_sparse_spectrum_k_too_large():
    with pytest.raises(DenseOnly):
        symmetric_spectrum(build_weights(gen_cycle(12), "A", dense_threshold=5), k=6)


def test_spectrum_rejects_nonsymmetric():
    with pytest.raises(NotSymmetric):
        symmetric_spectrum(build_weights(gen_double_star(2), "P"))


# ------------------------------------------------------------------ ranges


def test_c4_range():
    r = generalized_extremes(build_weights(gen_cycle(4), "A"))
    assert r.i_min == pytest.approx(-1.0, abs=1e-12)
    assert r.i_max == pytest.approx(0.0, abs=1e-12)
    assert r.method is RangeMethod.REGULAR_SHORTCUT


@pytest.mark.parametrize("k", range(2, 11))
def test_even_cycle_minimum_is_minus_one(k):
    r = generalized_extremes(build_weights(gen_cycle(2 * k), "A"))
    assert abs(r.i_min + 1) <= 1e-12


def test_two_regular_components_reach_one():
    g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    assert generalized_extremes(build_weights(g, "A")).i_max == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("g", [gen_cycle(11), gen_torus(4, 6)])
def test_regular_shortcut_matches_ordinary_spectrum(g):
    d = g.degrees[0]
    lam = np.sort(np.linalg.eigvalsh(g.dense_adjacency()))
    r = generalized_extremes(build_weights(g, "A"))
    # drop the Perron value d; the rest bound the score
    assert r.i_max == pytest.approx(lam[-2] / d, abs=1e-12)
    assert r.i_min == pytest.approx(lam[0] / d, abs=1e-12)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("kind", ["A", "L", "M", "M2"])
def test_range_matches_null_space_oracle(seed, kind):
    g = gen_random_connected(25, 0.12, seed)
    W = build_weights(g, kind)
    lo, hi = null_space_range(W.dense())
    r = generalized_extremes(W)
    assert r.i_min == pytest.approx(lo, abs=1e-10)
    assert r.i_max == pytest.approx(hi, abs=1e-10)
    assert moran_i(r.v_min, W) == pytest.approx(r.i_min, abs=1e-8)
    assert moran_i(r.v_max, W) == pytest.approx(r.i_max, abs=1e-8)


@pytest.mark.parametrize("seed", range(8))
def test_p_range_matches_null_space_oracle(seed):
    g = gen_random_connected(25, 0.12, seed)
    P = build_weights(g, "P")
    lo, hi = null_space_range(P.dense())
    r = lagrange_extremes_p(g)
    assert (r.i_min, r.i_max) == pytest.approx((lo, hi), abs=1e-10)
    assert moran_i(r.v_min, P) == pytest.approx(r.i_min, abs=1e-8)
    assert moran_i(r.v_max, P) == pytest.approx(r.i_max, abs=1e-8)
    assert r.method is RangeMethod.LAGRANGE_SYMMETRIZED


@pytest.mark.parametrize("g", [gen_cycle(10), gen_torus(3, 5)])
def test_p_range_equals_a_range_on_regular(g):
    a = achievable_range(g, "A")
    p = achievable_range(g, "P")
    assert (p.i_min, p.i_max) == pytest.approx((a.i_min, a.i_max), abs=1e-12)


@given(st.integers(4, 30), st.floats(0, 0.4), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_laplacian_min_nonnegative_and_metropolis_in_unit_interval(n, p, seed):
    g = gen_random_connected(n, p, seed)
    assert achievable_range(g, "L").i_min >= -1e-10
    m = achievable_range(g, "M")
    assert -1 - 1e-10 <= m.i_min <= m.i_max <= 1 + 1e-10


def test_generalized_pairs_satisfy_projected_equation():
    g = gen_random_connected(20, 0.15, 3)
    W = build_weights(g, "A")
    vals, vecs = generalized_basis(W)
    Pi = np.eye(g.n) - 1.0 / g.n
    PWP = Pi @ W.dense() @ Pi
    for lam, phi in zip(vals, vecs.T):
        x = Pi @ phi
        assert np.linalg.norm(PWP @ x - lam * x) <= 1e-8


def test_degenerate_flag():
    # C4 has a double eigenvalue 0 at the top of the mean-zero spectrum
    r = generalized_extremes(build_weights(gen_cycle(4), "A"))
    assert r.degenerate_max == 2 and r.degenerate_min == 1
    assert r.degenerate


def test_random_vectors_never_exceed():
    g = gen_random_connected(40, 0.08, 9)
    rng = _rng(4)
    X = rng.normal(size=(20_000, g.n))
    X -= X.mean(axis=1, keepdims=True)
    for kind in ("A", "P", "L", "M"):
        W = build_weights(g, kind)
        r = achievable_range(g, kind)
        vals = g.n / W.total_weight * np.einsum("ij,ij->i", X, (W.dense() @ X.T).T) / np.einsum("ij,ij->i", X, X)
        assert vals.min() >= r.i_min - 1e-8 and vals.max() <= r.i_max + 1e-8


# ------------------------------------------------------------------ bounds


def test_bounds_regular_degree_interval():
    b = degree_eigenvalue_bounds(gen_torus(4, 4), "A")
    assert b.degree_interval == (-1.0, 1.0)


@pytest.mark.parametrize("kind", ["A", "P"])
def test_containment_chain_strict_on_irregular_nonbipartite(kind):
    g = gen_random_connected(30, 0.1, 2)
    r = achievable_range(g, kind)
    (dl, dh), (el, eh) = r.degree_bounds, r.eigenvalue_bounds
    assert dl - 1e-8 <= el <= r.i_min + 1e-8
    assert r.i_max - 1e-8 <= eh <= dh + 1e-8
    if kind == "A":
        assert dl < r.i_min and r.i_max < dh


def test_bounds_reject_other_kinds():
    with pytest.raises(InvalidParam):
        degree_eigenvalue_bounds(gen_cycle(5), "M")


# Values printed in the paper's range figures (five significant digits).
HEX8 = {
    "A": (-0.53353, 1.0211),
    "P": (-0.5423, 0.98617),
    "M": (-0.48496, 0.98181),
}
SQUARE13 = {
    "A": (-1.0562, 1.0161),
    "P": (-1.0021, 0.98672),
    "L": (0.0078699, 1.0676),
    "M": (-0.9778, 0.98475),
}


@pytest.mark.parametrize("kind", sorted(HEX8))
def test_hex_hexagon_8_published_ranges(kind):
    r = achievable_range(gen_hex_hexagon(8), kind)
    assert r.i_min == pytest.approx(HEX8[kind][0], abs=5e-5)
    assert r.i_max == pytest.approx(HEX8[kind][1], abs=5e-5)


def test_hex_hexagon_8_laplacian():
    # the printed minimum 0.00096 drops a digit; the computed value is 0.0096
    r = achievable_range(gen_hex_hexagon(8), "L")
    assert r.i_min == pytest.approx(0.0095987, abs=1e-6)
    assert r.i_max == pytest.approx(0.81403, abs=5e-5)


@pytest.mark.parametrize("kind", sorted(SQUARE13))
def test_square_13_published_ranges(kind):
    r = achievable_range(gen_grid(13, 13), kind)
    assert r.i_min == pytest.approx(SQUARE13[kind][0], abs=5e-5)
    assert r.i_max == pytest.approx(SQUARE13[kind][1], abs=5e-5)


def test_hex_hexagon_16_published_values():
    g = gen_hex_hexagon(16)
    expected = {"A": (-0.5188, 1.0265), "P": (-0.5414, 0.9986), "L": (0.0022, 0.7817), "M": (-0.4964, 0.9958)}
    for kind, (lo, hi) in expected.items():
        r = achievable_range(g, kind, with_bounds=False)
        assert r.i_min == pytest.approx(lo, abs=5e-5)
        assert r.i_max == pytest.approx(hi, abs=5e-5)
    A = build_weights(g, "A")
    lam, vecs = np.linalg.eigh(A.dense())
    assert moran_i(vecs[:, -1], A) == pytest.approx(0.9396, abs=5e-5)
    assert moran_i(vecs[:, 0], A) == pytest.approx(-0.5188, abs=5e-5)


def test_sparse_range_matches_dense():
    g = gen_hex_hexagon(10)
    for kind in ("A", "P", "L", "M"):
        d = achievable_range(g, kind)
        s = achievable_range(g, kind, dense_threshold=50)
        assert (s.i_min, s.i_max) == pytest.approx((d.i_min, d.i_max), abs=1e-9)


def test_convergence_failure_reports_residual():
    g = gen_grid(40, 40)
    with pytest.raises(ConvergenceFailure) as info:
        achievable_range(g, "A", dense_threshold=100, maxiter=2, k=1)
    # the residual is NaN when no Ritz pair converged at all
    assert not info.value.residual <= 1e-8


# ------------------------------------------------------------------ decomposition


def test_decompose_extremal_vector():
    g = gen_grid(4, 4)
    W = build_weights(g, "A")
    r = generalized_extremes(W)
    d = decompose_i(r.v_max, W)
    assert d.energy_shares[-1] >= 1 - 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_decompose_reconstruction(seed):
    W = build_weights(gen_cycle(6), "A")
    v = _rng(seed).normal(size=6)
    assert decompose_i(v, W).reconstructed_i == pytest.approx(moran_i(v, W), abs=1e-12)


def test_decompose_midpoint():
    g = gen_random_connected(12, 0.2, 1)
    W = build_weights(g, "A")
    vals, vecs = generalized_basis(W)
    v = vecs[:, 0] + vecs[:, -1]
    scale = g.n / W.total_weight
    assert moran_i(v, W) == pytest.approx(scale * (vals[0] + vals[-1]) / 2, abs=1e-12)


# ------------------------------------------------------------------ Laplacian


def test_fiedler_path3():
    f = fiedler_vector(gen_path(3)).values
    np.testing.assert_allclose(f, [1 / np.sqrt(2), 0, -1 / np.sqrt(2)], atol=1e-12)


def test_fiedler_disconnected():
    with pytest.raises(Disconnected):
        fiedler_vector(build_graph([(0, 1), (2, 3)]))


@pytest.mark.parametrize("rows,cols", [(5, 8), (9, 4), (13, 13)])
def test_fiedler_sign_split_connected_halves(rows, cols):
    g = gen_grid(rows, cols)
    f = fiedler_vector(g).values
    for side in (f > 1e-12, f < -1e-12):
        keep = np.flatnonzero(side)
        sub = build_graph([(i, j) for i, j in g.edges if side[i] and side[j]], nodes=keep)
        assert sub.n == len(keep) and is_connected(sub)


def test_dirichlet_constant_zero():
    assert dirichlet_energy(np.ones(6), gen_cycle(6)) == 0.0


def test_dirichlet_c4_alternating():
    assert dirichlet_energy([1, -1, 1, -1], gen_cycle(4)) == pytest.approx(4.0)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_dirichlet_matches_laplacian_quadratic_form(seed):
    g = gen_random_connected(15, 0.2, seed)
    v = _rng(seed).normal(size=15)
    L = build_weights(g, "L").dense()
    mu, psi = np.linalg.eigh(L)
    alpha = psi.T @ v
    e2 = dirichlet_energy(v, g) ** 2
    assert e2 == pytest.approx(v @ L @ v, rel=1e-10)
    assert e2 == pytest.approx(alpha**2 @ mu, rel=1e-10)


def test_spectral_gap_matches_metropolis_second_eigenvalue():
    g = gen_random_connected(20, 0.1, 6)
    lam = np.linalg.eigvalsh(build_weights(g, "M").dense())
    assert spectral_gap(g) == pytest.approx(1 - lam[-2], abs=1e-12)
    assert achievable_range(g, "M").i_max == pytest.approx(lam[-2], abs=1e-12)


def test_spectrum_report_fields():
    g = gen_cycle(8)
    rep = spectrum_report(g, "L", v=[1, -1] * 4)
    assert rep.dirichlet_energy == pytest.approx(np.sqrt(32))
    assert rep.algebraic_connectivity == pytest.approx(2 - 2 * np.cos(2 * np.pi / 8))
    assert rep.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)


def test_custom_symmetric_range():
    W = weights_from_matrix(np.array([[0, 1, 0], [1, 0, 2], [0, 2, 0]], dtype=float))
    lo, hi = null_space_range(W.dense())
    r = generalized_extremes(W)
    assert (r.i_min, r.i_max) == pytest.approx((lo, hi), abs=1e-12)
