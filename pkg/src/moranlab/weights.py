"""Spatial weight matrices built from a graph, plus user-supplied weights."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyGraph, InvalidParam, IsolatedNode
from .graphcore import Graph

DENSE_THRESHOLD = 2000
DENSE_TOL = 1e-12
SPARSE_TOL = 1e-10


class WeightKind(str, enum.Enum):
    A = "A"
    P = "P"
    L = "L"
    M = "M"
    M2 = "M2"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, text: str) -> "WeightKind":
        key = text.strip().upper().replace("²", "2")
        aliases = {
            "ADJACENCY": "A",
            "ROWSTOCHASTIC": "P",
            "ROW": "P",
            "LAPLACIAN": "L",
            "METROPOLIS": "M",
            "M^2": "M2",
            "MM": "M2",
            "METROPOLISSQUARED": "M2",
            "CUSTOM": "custom",
        }
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidParam(f"unknown weight kind {text!r}; expected one of A, P, L, M, M2") from None


GRAPH_KINDS = (WeightKind.A, WeightKind.P, WeightKind.L, WeightKind.M, WeightKind.M2)


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """A weight matrix together with the invariants it was checked against.

    ``entries`` is a dense ndarray below the dense threshold and a CSR
    matrix above it. ``total_weight`` is the sum of absolute entries and
    ``w_degrees`` the absolute row sums.
    """

    kind: WeightKind
    entries: np.ndarray | sp.csr_matrix
    total_weight: float
    w_degrees: np.ndarray
    symmetric: bool
    row_stochastic: bool
    bistochastic: bool

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    @property
    def tol(self) -> float:
        return SPARSE_TOL if self.is_sparse else DENSE_TOL

    def dense(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else np.asarray(self.entries)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.entries @ x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.entries.T @ x

    def scaled(self, alpha: float) -> "WeightMatrix":
        return weights_from_matrix(self.entries * alpha)


def _abs_sum(m) -> float:
    return float(abs(m).sum())


def _row_sums(m) -> np.ndarray:
    return np.asarray(m.sum(axis=1)).ravel()


def _col_sums(m) -> np.ndarray:
    return np.asarray(m.sum(axis=0)).ravel()


def _is_symmetric(m, tol: float) -> bool:
    diff = m - m.T
    if sp.issparse(diff):
        return diff.nnz == 0 or float(abs(diff).max()) <= tol
    return bool(np.all(np.abs(diff) <= tol))


def _min_entry(m) -> float:
    # sparse .min() already accounts for implicit zeros
    return float(m.min())


def validate_bistochastic(W: WeightMatrix | np.ndarray | sp.spmatrix, tol: float = 1e-10) -> bool:
    """True iff rows and columns all sum to 1 within ``tol`` and no entry is below ``-tol``."""
    m = W.entries if isinstance(W, WeightMatrix) else W
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {m.shape}")
    return bool(
        np.all(np.abs(_row_sums(m) - 1.0) <= tol)
        and np.all(np.abs(_col_sums(m) - 1.0) <= tol)
        and _min_entry(m) >= -tol
    )


def _is_row_stochastic(m, tol: float) -> bool:
    return bool(np.all(np.abs(_row_sums(m) - 1.0) <= tol) and _min_entry(m) >= -tol)


def weights_from_matrix(matrix, kind: WeightKind = WeightKind.CUSTOM, tol: float | None = None) -> WeightMatrix:
    """Wrap any nonzero square matrix, tagging the invariants it happens to satisfy."""
    m = sp.csr_matrix(matrix, dtype=float) if sp.issparse(matrix) else np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"weight matrix must be square, got shape {m.shape}")
    if m.shape[0] == 0:
        raise EmptyGraph("weight matrix has no rows")
    if tol is None:
        tol = SPARSE_TOL if sp.issparse(m) else DENSE_TOL
    total = _abs_sum(m)
    if total == 0.0:
        raise InvalidParam("weight matrix is identically zero")
    w_deg = np.asarray(abs(m).sum(axis=1)).ravel()
    return WeightMatrix(
        kind=kind,
        entries=m,
        total_weight=total,
        w_degrees=w_deg,
        symmetric=_is_symmetric(m, tol),
        row_stochastic=_is_row_stochastic(m, tol),
        bistochastic=validate_bistochastic(m, tol),
    )


def _metropolis(g: Graph) -> sp.csr_matrix:
    d = g.degrees.astype(float)
    i, j = g.edges[:, 0], g.edges[:, 1]
    off = 1.0 / np.maximum(d[i], d[j])
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    vals = np.concatenate([off, off])
    offdiag = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    diag = 1.0 - _row_sums(offdiag)
    return sp.csr_matrix(offdiag + sp.diags(diag))


def build_weights(g: Graph, kind: WeightKind | str, dense_threshold: int = DENSE_THRESHOLD) -> WeightMatrix:
    """Construct A, P, L, M or M^2 for ``g`` and assert the kind's invariants."""
    kind = WeightKind.parse(kind) if isinstance(kind, str) else kind
    if kind is WeightKind.CUSTOM:
        raise InvalidParam("custom weights come from weights_from_matrix, not a graph")
    if g.n == 0:
        raise EmptyGraph("graph has no nodes")
    if g.edge_count == 0:
        raise InvalidParam("graph has no edges; every graph weight matrix would be zero")
    sparse = g.n >= dense_threshold
    a = g.adjacency.astype(float)
    d = g.degrees.astype(float)
    if kind in (WeightKind.P, WeightKind.M, WeightKind.M2) and np.any(d == 0):
        bad = [g.node_ids[k] for k in np.flatnonzero(d == 0)[:10]]
        raise IsolatedNode(f"kind {kind.value} divides by degree; isolated node(s): {bad}")

    if kind is WeightKind.A:
        m = a
    elif kind is WeightKind.P:
        m = sp.diags(1.0 / d) @ a
    elif kind is WeightKind.L:
        m = sp.diags(d) - a
    elif kind is WeightKind.M:
        m = _metropolis(g)
    else:
        mm = _metropolis(g)
        m = mm @ mm
    m = sp.csr_matrix(m) if sparse else np.asarray(m.toarray())

    W = weights_from_matrix(m, kind=kind)
    _check_kind(W, g)
    return W


def _check_kind(W: WeightMatrix, g: Graph) -> None:
    tol = W.tol
    m = W.entries
    kind = W.kind
    problems = []
    if kind in (WeightKind.A, WeightKind.L, WeightKind.M, WeightKind.M2) and not W.symmetric:
        problems.append("not symmetric")
    if kind is WeightKind.P and not W.row_stochastic:
        problems.append("rows do not sum to 1")
    if kind is WeightKind.L:
        if np.max(np.abs(_row_sums(m))) > tol * max(1.0, g.degrees.max()):
            problems.append("rows do not sum to 0")
        if abs(W.total_weight - 4.0 * g.edge_count) > tol * W.total_weight:
            problems.append("total weight differs from 2 * sum of degrees")
    if kind in (WeightKind.M, WeightKind.M2) and not W.bistochastic:
        problems.append("not bistochastic")
    if problems:
        raise AssertionError(f"{kind.value} construction violated invariants: {', '.join(problems)}")


def l1_offdiag_distance(q1, q2) -> float:
    """Sum of |q1_ij - q2_ij| over i != j."""
    a = q1.entries if isinstance(q1, WeightMatrix) else q1
    b = q2.entries if isinstance(q2, WeightMatrix) else q2
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    if sp.issparse(diff):
        diff = sp.csr_matrix(diff)
        return float(abs(diff).sum() - np.abs(diff.diagonal()).sum())
    diff = np.asarray(diff)
    return float(np.abs(diff).sum() - np.abs(np.diag(diff)).sum())
