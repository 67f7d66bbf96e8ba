"""Global and local Moran's I, Moran scatter data and permutation tests."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantVector, DimensionMismatch, InvalidParam
from .graphcore import Graph
from .weights import WeightKind, WeightMatrix, build_weights

log = logging.getLogger(__name__)

CONSTANT_RTOL = 1e-14
NEAR_CONSTANT_CV = 1e-6


@dataclass(frozen=True, eq=False)
class NodeVector:
    """Real values on the nodes of a graph, in graph node order."""

    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise InvalidParam(f"node vector {self.name!r} contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def centered(self) -> np.ndarray:
        return self.values - self.values.mean()

    @property
    def sum_sq(self) -> float:
        x = self.centered
        return float(x @ x)

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_vector(v) -> NodeVector:
    return v if isinstance(v, NodeVector) else NodeVector(np.asarray(v, dtype=float))


def _centered_checked(v: NodeVector, n: int) -> tuple[np.ndarray, float]:
    if v.n != n:
        raise DimensionMismatch(f"vector has {v.n} entries, weights are {n}x{n}")
    x = v.centered
    ss = float(x @ x)
    if ss <= CONSTANT_RTOL * n:
        raise ConstantVector(
            f"vector {v.name or ''} is constant (centered sum of squares {ss:.3e}); Moran's I is undefined"
        )
    mean = abs(v.mean)
    if mean > 0 and np.sqrt(ss / n) / mean < NEAR_CONSTANT_CV:
        log.warning("vector %s is nearly constant (coefficient of variation < %g)", v.name, NEAR_CONSTANT_CV)
    return x, ss


def moran_i(v, W: WeightMatrix) -> float:
    """(n / w) * x'Wx / x'x with x the centered vector and w = sum |W_ij|."""
    v = as_vector(v)
    x, ss = _centered_checked(v, W.n)
    return float(W.n / W.total_weight * (x @ W.matvec(x)) / ss)


def local_moran(v, W: WeightMatrix) -> np.ndarray:
    """Per-node share n * x_i (Wx)_i / (w * x'x); the shares sum to moran_i."""
    v = as_vector(v)
    x, ss = _centered_checked(v, W.n)
    return W.n * x * np.asarray(W.matvec(x)).ravel() / (W.total_weight * ss)


def d_i_diagnostic(v, g: Graph) -> np.ndarray:
    """|I_i(v; A) - I_i(v; M)| per node; identically zero on regular graphs."""
    a = build_weights(g, WeightKind.A)
    m = build_weights(g, WeightKind.M)
    return np.abs(local_moran(v, a) - local_moran(v, m))


@dataclass(frozen=True)
class ScatterResult:
    v: np.ndarray
    u: np.ndarray
    slope: float
    intercept: float
    row_stochastic: bool


def moran_scatter(v, W: WeightMatrix) -> ScatterResult:
    """Lagged variable u = Wv and the least-squares fit of u on v.

    The slope equals Moran's I only when W is row-stochastic; the flag
    ``row_stochastic`` records whether that holds.
    """
    v = as_vector(v)
    x, ss = _centered_checked(v, W.n)
    u = np.asarray(W.matvec(v.values)).ravel()
    slope = float(x @ (u - u.mean()) / ss)
    intercept = float(u.mean() - slope * v.mean)
    if not W.row_stochastic:
        log.info("weights of kind %s are not row-stochastic; scatter slope is not Moran's I", W.kind.value)
    return ScatterResult(v.values.copy(), u, slope, intercept, W.row_stochastic)


@dataclass(frozen=True)
class PermutationResult:
    observed: float
    null_mean: float
    null_sd: float
    p_value: float
    n_perms: int
    seed: int
    expected_null: float
    null_values: np.ndarray = field(repr=False)

    @property
    def standard_error(self) -> float:
        return self.null_sd / np.sqrt(self.n_perms)


def _perm_rng(seed: int, index: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, permutation index)
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _perm_block(x: np.ndarray, W: WeightMatrix, seed: int, start: int, stop: int) -> np.ndarray:
    n = x.shape[0]
    perms = np.stack([x[_perm_rng(seed, k).permutation(n)] for k in range(start, stop)])
    # permuting x keeps it centered with the same sum of squares
    wx = np.asarray(W.matvec(perms.T)).T
    return np.einsum("ij,ij->i", perms, wx)


def permutation_test(
    v, W: WeightMatrix, n_perms: int = 999, seed: int = 0, workers: int = 1, block: int = 2048
) -> PermutationResult:
    """Randomization test of Moran's I by permuting node values.

    Permutation ``k`` draws from a stream keyed by ``(seed, k)``, so the
    null sample is identical for any ``workers``. The two-sided p-value
    counts null draws at least as far from the null mean as the observed
    value and applies add-one smoothing: (1 + count) / (n_perms + 1).
    """
    if n_perms < 1:
        raise InvalidParam(f"n_perms must be >= 1, got {n_perms}")
    if seed < 0:
        raise InvalidParam(f"seed must be non-negative, got {seed}")
    v = as_vector(v)
    x, ss = _centered_checked(v, W.n)
    scale = W.n / (W.total_weight * ss)
    observed = float(scale * (x @ W.matvec(x)))
    bounds = [(s, min(s + block, n_perms)) for s in range(0, n_perms, block)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _perm_block(x, W, seed, *b), bounds))
    else:
        parts = [_perm_block(x, W, seed, *b) for b in bounds]
    null = scale * np.concatenate(parts)
    null_mean = float(null.mean())
    null_sd = float(null.std(ddof=1)) if n_perms > 1 else 0.0
    extreme = np.count_nonzero(np.abs(null - null_mean) >= abs(observed - null_mean))
    return PermutationResult(
        observed=observed,
        null_mean=null_mean,
        null_sd=null_sd,
        p_value=(1 + extreme) / (n_perms + 1),
        n_perms=n_perms,
        seed=seed,
        expected_null=-1.0 / (W.n - 1),
        null_values=null,
    )


@dataclass(frozen=True)
class MoranReport:
    kind: str
    global_i: float
    expected_null: float
    local_i: np.ndarray
    lagged: np.ndarray
    p_value: float | None = None
    permutations: int | None = None
    seed: int | None = None
    local_extension: bool = False
    node_ids: tuple[str, ...] | None = None


def moran_report(
    v, W: WeightMatrix, n_perms: int | None = None, seed: int = 0, node_ids=None
) -> MoranReport:
    """Global score, local shares, lagged variable and optional permutation p-value."""
    v = as_vector(v)
    gi = moran_i(v, W)
    loc = local_moran(v, W)
    lagged = np.asarray(W.matvec(v.values)).ravel()
    p = None
    if n_perms:
        p = permutation_test(v, W, n_perms=n_perms, seed=seed).p_value
    return MoranReport(
        kind=W.kind.value,
        global_i=gi,
        expected_null=-1.0 / (W.n - 1),
        local_i=loc,
        lagged=lagged,
        p_value=p,
        permutations=n_perms or None,
        seed=seed if n_perms else None,
        # local shares are only interpreted for A and M upstream
        local_extension=W.kind in (WeightKind.L, WeightKind.P),
        node_ids=tuple(node_ids) if node_ids is not None else None,
    )


@dataclass(frozen=True)
class LocalReport:
    kind: str
    global_i: float
    local_i: np.ndarray
    d_i: np.ndarray
    lagged: np.ndarray
    node_ids: tuple[str, ...] | None = None


def local_report(v, g: Graph, kind: WeightKind | str = WeightKind.A, dense_threshold: int | None = None) -> LocalReport:
    """Local shares under ``kind`` next to the A-versus-M discrepancy D_i."""
    kind = WeightKind.parse(kind) if isinstance(kind, str) else kind
    kw = {} if dense_threshold is None else {"dense_threshold": dense_threshold}
    W = build_weights(g, kind, **kw)
    v = as_vector(v)
    loc = local_moran(v, W)
    return LocalReport(
        kind=kind.value,
        global_i=float(loc.sum()),
        local_i=loc,
        d_i=d_i_diagnostic(v, g),
        lagged=np.asarray(W.matvec(v.values)).ravel(),
        node_ids=tuple(g.node_ids),
    )
