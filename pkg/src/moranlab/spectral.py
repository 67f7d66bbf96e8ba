"""Spectra, exact achievable ranges of Moran's I, and Laplacian quantities.

The score (n/w) x'Wx / x'x over nonzero mean-zero x is a Rayleigh quotient
restricted to the complement of the constant vector. Both the dense and the
sparse path reduce it to an ordinary symmetric eigenproblem of size n - 1
through a fixed orthonormal basis U of that complement: the columns 2..n of
the Householder reflector H that sends e_1 to 1/sqrt(n). H is applied in
O(n) and never stored.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceFailure,
    DenseOnly,
    DimensionMismatch,
    Disconnected,
    InvalidParam,
    IsolatedNode,
    NotSymmetric,
)
from .graphcore import Graph, n_components
from .moran import NodeVector, as_vector, moran_i
from .weights import DENSE_THRESHOLD, WeightKind, WeightMatrix, build_weights, weights_from_matrix

log = logging.getLogger(__name__)

SOLVER_TOL = 1e-10
SOLVER_MAXITER = 10_000
DEGENERACY_RTOL = 1e-9


# ------------------------------------------------------------------ projection


class Projection:
    """Orthogonal projection onto mean-zero vectors and a basis of that space."""

    def __init__(self, n: int):
        if n < 2:
            raise InvalidParam("projection needs n >= 2")
        self.n = n
        u = np.full(n, -1.0 / np.sqrt(n))
        u[0] += 1.0
        self._u = u
        self._c = 2.0 / (u @ u)

    def project(self, x: np.ndarray) -> np.ndarray:
        return x - x.mean(axis=0)

    def reflect(self, x: np.ndarray) -> np.ndarray:
        """H @ x for a vector or a stack of column vectors."""
        if x.ndim == 1:
            return x - self._c * self._u * (self._u @ x)
        return x - self._c * np.outer(self._u, self._u @ x)

    def lift(self, y: np.ndarray) -> np.ndarray:
        """U @ y: embed reduced coordinates as mean-zero vectors."""
        pad = np.zeros((self.n,) + y.shape[1:])
        pad[1:] = y
        return self.reflect(pad)

    def restrict(self, x: np.ndarray) -> np.ndarray:
        """U' @ x."""
        return self.reflect(x)[1:]

    def basis(self) -> np.ndarray:
        return self.lift(np.eye(self.n - 1))

    def reduce_dense(self, W: np.ndarray) -> np.ndarray:
        """U' W U as a dense (n-1)x(n-1) array, using two reflections."""
        hw = self.reflect(W)
        hwh = self.reflect(hw.T).T
        return hwh[1:, 1:]

    def reduced_operator(self, W: WeightMatrix) -> spla.LinearOperator:
        def mv(y):
            return self.restrict(np.asarray(W.matvec(self.lift(y))).reshape(self.n, -1)).reshape(y.shape)

        return spla.LinearOperator((self.n - 1, self.n - 1), matvec=mv, matmat=mv, dtype=float)


# ------------------------------------------------------------------ spectra


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of a symmetric weight matrix.

    Descending order for every kind except L, which is stored ascending
    (0 = mu_1 <= mu_2 <= ...). For sparse inputs only the extreme pairs are
    present (``complete`` is False).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    matrix_kind: str
    complete: bool
    residuals: np.ndarray


def _require_symmetric(W: WeightMatrix) -> None:
    if not W.symmetric:
        raise NotSymmetric(f"weights of kind {W.kind.value} are not symmetric")


def _residuals(W: WeightMatrix, vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    r = np.asarray(W.matvec(vecs)) - vecs * vals
    return np.linalg.norm(r, axis=0)


def _op_norm_estimate(W: WeightMatrix) -> float:
    m = W.entries
    # max absolute row sum bounds the 2-norm of a symmetric matrix
    return float(np.max(np.asarray(abs(m).sum(axis=1)).ravel()))


def _eigsh_pair(op, which: str, k: int, n: int, seed: int, tol: float, maxiter: int):
    v0 = np.random.Generator(np.random.Philox(seed)).standard_normal(n)
    k = min(k, n - 1)
    try:
        return spla.eigsh(op, k=k, which=which, v0=v0, tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        vals, vecs = exc.eigenvalues, exc.eigenvectors
        if len(vals):
            res = float(np.max(np.linalg.norm(op.matmat(vecs) - vecs * vals, axis=0)))
            msg = f"ARPACK did not converge for {which} eigenpairs"
        else:
            # nothing converged, so there is no Ritz pair to measure
            res = float("nan")
            msg = f"ARPACK converged no {which} eigenpair within {maxiter} iterations"
        raise ConvergenceFailure(msg, res) from exc


def symmetric_spectrum(
    W: WeightMatrix, k: int = 6, seed: int = 0, tol: float = SOLVER_TOL, maxiter: int = SOLVER_MAXITER
) -> Spectrum:
    """Full eigendecomposition (dense) or ``k`` extreme pairs at each end (sparse).

    The sparse path uses single-vector Lanczos, which finds every distinct
    extreme eigenvalue but can return fewer copies of an exactly repeated
    one than its multiplicity.
    """
    _require_symmetric(W)
    ascending = W.kind is WeightKind.L
    if not W.is_sparse:
        vals, vecs = np.linalg.eigh(W.dense())
        complete = True
    else:
        n = W.n
        if 2 * k >= n - 1:
            raise DenseOnly(f"k={k} from each end covers the whole spectrum of n={n}; use dense weights")
        op = spla.aslinearoperator(W.entries)
        lo_v, lo_x = _eigsh_pair(op, "SA", k, n, seed, tol, maxiter)
        hi_v, hi_x = _eigsh_pair(op, "LA", k, n, seed + 1, tol, maxiter)
        vals = np.concatenate([lo_v, hi_v])
        vecs = np.concatenate([lo_x, hi_x], axis=1)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        complete = False
    if not ascending:
        vals, vecs = vals[::-1], vecs[:, ::-1]
    vals = np.ascontiguousarray(vals)
    vecs = np.ascontiguousarray(vecs)
    res = _residuals(W, vals, vecs)
    bound = 1e-8 * max(_op_norm_estimate(W), 1.0)
    if np.max(res) > bound:
        raise ConvergenceFailure("eigenpair residual above tolerance", float(np.max(res)))
    return Spectrum(vals, vecs, W.kind.value, complete, res)


# ------------------------------------------------------------------ ranges


class RangeMethod(str, enum.Enum):
    GENERALIZED_SYMMETRIC = "GeneralizedSymmetric"
    LAGRANGE_SYMMETRIZED = "LagrangeSymmetrized"
    REGULAR_SHORTCUT = "RegularShortcut"


@dataclass(frozen=True)
class SpectralRange:
    """Exact range of Moran's I for one weight matrix.

    ``i_min``/``i_max`` are attained at ``v_min``/``v_max`` (mean zero,
    unit norm). The bound intervals are populated only for kinds A and P.
    """

    kind: str
    i_min: float
    i_max: float
    v_min: np.ndarray
    v_max: np.ndarray
    method: RangeMethod
    degenerate_min: int = 1
    degenerate_max: int = 1
    degree_bounds: tuple[float, float] | None = None
    eigenvalue_bounds: tuple[float, float] | None = None
    n: int = 0
    total_weight: float = 0.0
    residual: float = 0.0

    @property
    def degenerate(self) -> bool:
        return self.degenerate_min > 1 or self.degenerate_max > 1


def _sign_fix(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    nz = np.flatnonzero(np.abs(x) > tol * max(np.abs(x).max(), 1e-300))
    if len(nz) and x[nz[0]] < 0:
        return -x
    return x


def _multiplicity(vals: np.ndarray, target: float, scale: float) -> int:
    return int(np.count_nonzero(np.abs(vals - target) <= DEGENERACY_RTOL * max(scale, 1.0)))


@dataclass(frozen=True)
class _Reduced:
    values: np.ndarray  # ascending generalized eigenvalues (unscaled)
    vectors: np.ndarray  # Pi-orthonormal generalized eigenvectors, mean zero
    complete: bool
    residual: float


def _reduced_extremes(
    W: WeightMatrix,
    k: int = 6,
    seed: int = 0,
    tol: float = SOLVER_TOL,
    maxiter: int = SOLVER_MAXITER,
    full: bool = False,
) -> _Reduced:
    n = W.n
    proj = Projection(n)
    if not W.is_sparse:
        B = proj.reduce_dense(W.dense())
        B = 0.5 * (B + B.T)
        vals, Y = scipy.linalg.eigh(B)
        vecs = proj.lift(Y)
        complete = True
    else:
        if full:
            raise DenseOnly(f"a complete generalized eigenbasis needs dense weights (n={n})")
        op = proj.reduced_operator(W)
        k = min(k, (n - 2) // 2)
        lo_v, lo_y = _eigsh_pair(op, "SA", k, n - 1, seed, tol, maxiter)
        hi_v, hi_y = _eigsh_pair(op, "LA", k, n - 1, seed + 1, tol, maxiter)
        vals = np.concatenate([lo_v, hi_v])
        Y = np.concatenate([lo_y, hi_y], axis=1)
        order = np.argsort(vals)
        vals, Y = vals[order], Y[:, order]
        vecs = proj.lift(Y)
        complete = False
    # generalized pair check: Pi W Pi phi = lambda phi for mean-zero phi
    ends = [0, len(vals) - 1]
    r = np.asarray(W.matvec(vecs[:, ends]))
    r = r - r.mean(axis=0) - vecs[:, ends] * vals[ends]
    resid = float(np.max(np.linalg.norm(r, axis=0)))
    if resid > 1e-8 * max(_op_norm_estimate(W), 1.0):
        raise ConvergenceFailure("generalized eigenpair residual above tolerance", resid)
    return _Reduced(vals, vecs, complete, resid)


def generalized_extremes(
    W: WeightMatrix, k: int = 6, seed: int = 0, tol: float = SOLVER_TOL, maxiter: int = SOLVER_MAXITER
) -> SpectralRange:
    """Minimum and maximum of Moran's I for symmetric ``W`` with their maximizers.

    Solves the pencil (Pi W Pi, Pi) on the mean-zero subspace; the extreme
    generalized eigenvalues times n/w are the extreme scores.
    """
    _require_symmetric(W)
    red = _reduced_extremes(W, k=k, seed=seed, tol=tol, maxiter=maxiter)
    scale = W.n / W.total_weight
    vals = red.values
    span = max(abs(vals[0]), abs(vals[-1]))
    regular = bool(np.ptp(np.asarray(W.entries.sum(axis=1)).ravel()) <= W.tol * max(span, 1.0))
    return SpectralRange(
        kind=W.kind.value,
        i_min=float(scale * vals[0]),
        i_max=float(scale * vals[-1]),
        v_min=_sign_fix(red.vectors[:, 0]),
        v_max=_sign_fix(red.vectors[:, -1]),
        method=RangeMethod.REGULAR_SHORTCUT if regular else RangeMethod.GENERALIZED_SYMMETRIC,
        degenerate_min=_multiplicity(vals, vals[0], span),
        degenerate_max=_multiplicity(vals, vals[-1], span),
        n=W.n,
        total_weight=W.total_weight,
        residual=red.residual,
    )


def symmetrized_p(g: Graph, dense_threshold: int = DENSE_THRESHOLD) -> WeightMatrix:
    """(P + P') / 2, which has the same quadratic form as P."""
    P = build_weights(g, WeightKind.P, dense_threshold=dense_threshold)
    m = P.entries
    return weights_from_matrix(0.5 * (m + m.T))


def lagrange_extremes_p(
    g: Graph, k: int = 6, seed: int = 0, tol: float = SOLVER_TOL, maxiter: int = SOLVER_MAXITER,
    dense_threshold: int = DENSE_THRESHOLD,
) -> SpectralRange:
    """Exact range of I(.; P) through the symmetric part of P."""
    S = symmetrized_p(g, dense_threshold=dense_threshold)
    red = _reduced_extremes(S, k=k, seed=seed, tol=tol, maxiter=maxiter)
    vals = red.values
    span = max(abs(vals[0]), abs(vals[-1]))
    # w = n for row-stochastic P, so the generalized eigenvalues are the scores
    return SpectralRange(
        kind=WeightKind.P.value,
        i_min=float(vals[0]),
        i_max=float(vals[-1]),
        v_min=_sign_fix(red.vectors[:, 0]),
        v_max=_sign_fix(red.vectors[:, -1]),
        method=RangeMethod.LAGRANGE_SYMMETRIZED,
        degenerate_min=_multiplicity(vals, vals[0], span),
        degenerate_max=_multiplicity(vals, vals[-1], span),
        n=g.n,
        total_weight=float(g.n),
        residual=red.residual,
    )


@dataclass(frozen=True)
class BoundIntervals:
    kind: str
    degree_interval: tuple[float, float]
    eigenvalue_interval: tuple[float, float]
    lambda_min: float
    lambda_max: float


def adjacency_extreme_eigenvalues(g: Graph, seed: int = 0, dense_threshold: int = DENSE_THRESHOLD):
    A = build_weights(g, WeightKind.A, dense_threshold=dense_threshold)
    if not A.is_sparse:
        vals = np.linalg.eigvalsh(A.dense())
        return float(vals[0]), float(vals[-1])
    op = spla.aslinearoperator(A.entries)
    lo, _ = _eigsh_pair(op, "SA", 1, g.n, seed, SOLVER_TOL, SOLVER_MAXITER)
    hi, _ = _eigsh_pair(op, "LA", 1, g.n, seed + 1, SOLVER_TOL, SOLVER_MAXITER)
    return float(lo[0]), float(hi[0])


def degree_eigenvalue_bounds(g: Graph, kind: WeightKind | str, seed: int = 0) -> BoundIntervals:
    """A priori intervals containing every achievable I(.; A) or I(.; P).

    For A: [lambda_n, lambda_1] / d_avg inside [-d_max, d_max] / d_avg.
    For P: the same adjacency eigenvalues and d_max divided by d_min.
    """
    kind = WeightKind.parse(kind) if isinstance(kind, str) else kind
    if kind not in (WeightKind.A, WeightKind.P):
        raise InvalidParam(f"degree/eigenvalue bounds are defined for A and P only, not {kind.value}")
    stats = g.degree_stats()
    if kind is WeightKind.P and stats.d_min == 0:
        raise IsolatedNode("bounds for P need every node to have degree >= 1")
    lam_n, lam_1 = adjacency_extreme_eigenvalues(g, seed=seed)
    denom = stats.d_avg if kind is WeightKind.A else float(stats.d_min)
    return BoundIntervals(
        kind=kind.value,
        degree_interval=(-stats.d_max / denom, stats.d_max / denom),
        eigenvalue_interval=(lam_n / denom, lam_1 / denom),
        lambda_min=lam_n,
        lambda_max=lam_1,
    )


def achievable_range(
    g: Graph, kind: WeightKind | str, k: int = 6, seed: int = 0, tol: float = SOLVER_TOL,
    maxiter: int = SOLVER_MAXITER, dense_threshold: int = DENSE_THRESHOLD, with_bounds: bool = True,
) -> SpectralRange:
    """Exact range for any graph kind, with a priori bounds attached for A and P."""
    kind = WeightKind.parse(kind) if isinstance(kind, str) else kind
    if kind is WeightKind.P:
        rng = lagrange_extremes_p(g, k=k, seed=seed, tol=tol, maxiter=maxiter, dense_threshold=dense_threshold)
    else:
        W = build_weights(g, kind, dense_threshold=dense_threshold)
        rng = generalized_extremes(W, k=k, seed=seed, tol=tol, maxiter=maxiter)
    if with_bounds and kind in (WeightKind.A, WeightKind.P):
        b = degree_eigenvalue_bounds(g, kind, seed=seed)
        rng = SpectralRange(**{**rng.__dict__, "degree_bounds": b.degree_interval, "eigenvalue_bounds": b.eigenvalue_interval})
    return rng


# ------------------------------------------------------------------ decomposition


@dataclass(frozen=True)
class Decomposition:
    """x = sum_i alpha_i phi_i in a Pi-orthonormal generalized eigenbasis."""

    coefficients: np.ndarray
    eigenvalues: np.ndarray
    scale: float
    reconstructed_i: float

    @property
    def energy_shares(self) -> np.ndarray:
        a2 = self.coefficients**2
        return a2 / a2.sum()


def generalized_basis(W: WeightMatrix) -> tuple[np.ndarray, np.ndarray]:
    """All n - 1 generalized eigenpairs (ascending), dense weights only."""
    _require_symmetric(W)
    if W.is_sparse:
        raise DenseOnly(f"complete generalized eigenbasis needs dense weights (n={W.n})")
    red = _reduced_extremes(W, full=True)
    return red.values, red.vectors


def decompose_i(v, W: WeightMatrix) -> Decomposition:
    """Write Moran's I as an energy-weighted average of generalized eigenvalues."""
    v = as_vector(v)
    if v.n != W.n:
        raise DimensionMismatch(f"vector has {v.n} entries, weights are {W.n}x{W.n}")
    moran_i(v, W)  # raises ConstantVector for constant input
    vals, vecs = generalized_basis(W)
    alpha = vecs.T @ v.centered
    scale = W.n / W.total_weight
    recon = float(scale * (alpha**2 @ vals) / (alpha @ alpha))
    return Decomposition(alpha, vals, scale, recon)


# ------------------------------------------------------------------ Laplacian


def fiedler_vector(g: Graph, seed: int = 0, dense_threshold: int = DENSE_THRESHOLD) -> NodeVector:
    """Unit eigenvector of L for the second-smallest eigenvalue.

    Sign convention: the first clearly nonzero coordinate is positive.
    """
    comps = n_components(g)
    if comps > 1:
        raise Disconnected(comps, f"Fiedler vector needs a connected graph; found {comps} components (mu_2 = 0)")
    if g.n < 2:
        raise InvalidParam("Fiedler vector needs at least two nodes")
    L = build_weights(g, WeightKind.L, dense_threshold=dense_threshold)
    # on the mean-zero subspace the smallest eigenpair of L is (mu_2, Psi_2)
    red = _reduced_extremes(L, k=1 if L.is_sparse else 6, seed=seed)
    x = red.vectors[:, 0]
    return NodeVector(_sign_fix(x / np.linalg.norm(x)), name="fiedler")


def dirichlet_energy(v, g: Graph) -> float:
    """sqrt(v'Lv) = sqrt(sum over edges of (v_i - v_j)^2); constant vectors give 0."""
    vals = np.asarray(v.values if isinstance(v, NodeVector) else v, dtype=float).ravel()
    if vals.shape[0] != g.n:
        raise DimensionMismatch(f"vector has {vals.shape[0]} entries, graph has {g.n} nodes")
    diff = vals[g.edges[:, 0]] - vals[g.edges[:, 1]]
    return float(np.sqrt(diff @ diff))


def spectral_gap(g: Graph, seed: int = 0, dense_threshold: int = DENSE_THRESHOLD) -> float:
    """1 - lambda_2(M) for the Metropolis matrix of ``g``."""
    M = build_weights(g, WeightKind.M, dense_threshold=dense_threshold)
    return 1.0 - generalized_extremes(M, seed=seed).i_max


@dataclass(frozen=True)
class SpectrumReport:
    """Extreme eigenvalues of one weight matrix plus Laplacian smoothness data."""

    kind: str
    eigenvalues: tuple[float, ...]
    complete: bool
    algebraic_connectivity: float
    spectral_gap: float
    dirichlet_energy: float | None
    fiedler: np.ndarray
    node_ids: tuple[str, ...] | None = None


def spectrum_report(
    g: Graph, kind: WeightKind | str = WeightKind.L, v=None, k: int = 6, seed: int = 0,
    tol: float = SOLVER_TOL, maxiter: int = SOLVER_MAXITER, dense_threshold: int = DENSE_THRESHOLD,
) -> SpectrumReport:
    kind = WeightKind.parse(kind) if isinstance(kind, str) else kind
    W = build_weights(g, kind, dense_threshold=dense_threshold)
    spec = symmetric_spectrum(W, k=k, seed=seed, tol=tol, maxiter=maxiter)
    fied = fiedler_vector(g, seed=seed, dense_threshold=dense_threshold)
    L = build_weights(g, WeightKind.L, dense_threshold=dense_threshold)
    mu2 = float(fied.values @ L.matvec(fied.values))
    return SpectrumReport(
        kind=kind.value,
        eigenvalues=tuple(float(x) for x in spec.eigenvalues),
        complete=spec.complete,
        algebraic_connectivity=mu2,
        spectral_gap=spectral_gap(g, seed=seed, dense_threshold=dense_threshold),
        dirichlet_energy=None if v is None else dirichlet_energy(v, g),
        fiedler=fied.values,
        node_ids=tuple(g.node_ids),
    )
