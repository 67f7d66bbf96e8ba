"""Moran's I for bistochastic weights read as one step of a random walk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InvalidParam, NotBistochastic, NotStochastic
from .moran import NodeVector, as_vector, moran_i
from .weights import WeightMatrix, weights_from_matrix


@dataclass(frozen=True)
class WalkDiagnostics:
    """One-step variance reduction and lag-1 autocorrelation of v under Q.

    Standard deviations use divisor n.
    """

    sigma0: float
    sigma1: float
    rho: float
    i_q: float
    i_qqt: float
    steps: list[float] | None = None
    spectral_gap: float | None = None

    @property
    def ratio(self) -> float:
        return self.sigma1 / self.sigma0


def walk_step(v, Q: WeightMatrix) -> NodeVector:
    """v'Q: the node values after one step of the chain Q (row-vector convention)."""
    v = as_vector(v)
    if not Q.row_stochastic:
        raise NotStochastic(f"weights of kind {Q.kind.value} are not row-stochastic")
    if v.n != Q.n:
        raise DimensionMismatch(f"vector has {v.n} entries, Q is {Q.n}x{Q.n}")
    return NodeVector(np.asarray(Q.rmatvec(v.values)).ravel(), name=v.name)


def _require_bistochastic(Q: WeightMatrix) -> None:
    if not Q.bistochastic:
        raise NotBistochastic(
            f"weights of kind {Q.kind.value} are not bistochastic; the variance-reduction identities need rows and columns summing to 1"
        )


def outer_square(Q: WeightMatrix) -> WeightMatrix:
    """Q Q' as weights."""
    m = Q.entries
    return weights_from_matrix(m @ m.T)


def walk_diagnostics(v, Q: WeightMatrix, QQt: WeightMatrix | None = None) -> WalkDiagnostics:
    """sigma1/sigma0, correlation rho(v, v'Q), I(v; Q) and I(v; QQ')."""
    _require_bistochastic(Q)
    v = as_vector(v)
    w = walk_step(v, Q).values
    x = v.centered
    y = w - w.mean()
    sigma0 = float(np.sqrt(x @ x / v.n))
    sigma1 = float(np.sqrt(y @ y / v.n))
    if sigma1 > 0.0:
        rho = float((x @ y) / (np.linalg.norm(x) * np.linalg.norm(y)))
    else:
        # v'Q is constant: no spread left to correlate with
        rho = 0.0
    i_q = moran_i(v, Q)
    i_qqt = moran_i(v, QQt if QQt is not None else outer_square(Q))
    return WalkDiagnostics(sigma0=sigma0, sigma1=sigma1, rho=rho, i_q=i_q, i_qqt=i_qqt)


def variance_profile(v, Q: WeightMatrix, steps: int) -> list[float]:
    """Population standard deviation after 0, 1, ..., ``steps`` applications of Q."""
    _require_bistochastic(Q)
    if steps < 1:
        raise InvalidParam(f"steps must be >= 1, got {steps}")
    cur = np.asarray(as_vector(v).values, dtype=float)
    m = Q.entries.T
    if sp.issparse(m):
        m = m.tocsr()
    out = [float(cur.std())]
    for _ in range(steps):
        cur = m @ cur
        out.append(float(np.asarray(cur).std()))
    return out
