"""Graph container, structural diagnostics and synthetic graph families."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import EmptyGraph, Exhausted, InvalidParam, SelfLoop


@dataclass(frozen=True)
class DegreeStats:
    degrees: np.ndarray
    d_min: int
    d_avg: float
    d_max: int


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph.

    Node ``i`` of every matrix or vector built from this graph is
    ``node_ids[i]``. ``edges`` holds each undirected edge once as ``(i, j)``
    with ``i < j``, sorted lexicographically.
    """

    node_ids: tuple[str, ...]
    edges: np.ndarray
    _index: dict = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def index_of(self, node_id: str) -> int:
        return self._index[node_id]

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency, zero diagonal (cached)."""
        cached = self.__dict__.get("_adj")
        if cached is None:
            i, j = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * len(i))
            cached = sp.csr_matrix(
                (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(self.n, self.n)
            )
            object.__setattr__(self, "_adj", cached)
        return cached

    def dense_adjacency(self) -> np.ndarray:
        return self.adjacency.toarray()

    @property
    def degrees(self) -> np.ndarray:
        cached = self.__dict__.get("_deg")
        if cached is None:
            cached = np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)
            object.__setattr__(self, "_deg", cached)
        return cached

    def degree_stats(self) -> DegreeStats:
        d = self.degrees
        return DegreeStats(d.copy(), int(d.min()), float(d.mean()), int(d.max()))

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def is_regular(self) -> bool:
        d = self.degrees
        return bool(np.all(d == d[0]))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_ids == other.node_ids and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.node_ids, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


def _from_index_edges(node_ids: Sequence[str], pairs: np.ndarray) -> Graph:
    ids = tuple(node_ids)
    if not ids:
        raise EmptyGraph("graph has no nodes")
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if np.any(pairs[:, 0] == pairs[:, 1]):
        k = int(np.flatnonzero(pairs[:, 0] == pairs[:, 1])[0])
        raise SelfLoop(f"self-loop on node {ids[pairs[k, 0]]!r}")
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    canon = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(lo) else np.zeros((0, 2), np.int64)
    index = {nid: k for k, nid in enumerate(ids)}
    return Graph(ids, canon, index)


def build_graph(edges: Iterable[tuple], nodes: Iterable | None = None) -> Graph:
    """Build a graph from id pairs.

    Node order is ``nodes`` (if given) followed by first appearance in
    ``edges``. Duplicate and reversed pairs collapse to one edge.
    """
    order: dict[str, int] = {}
    for u in () if nodes is None else nodes:
        order.setdefault(str(u), len(order))
    pairs = []
    for u, v in edges:
        u, v = str(u), str(v)
        if u == v:
            raise SelfLoop(f"self-loop on node {u!r}")
        iu = order.setdefault(u, len(order))
        iv = order.setdefault(v, len(order))
        pairs.append((iu, iv))
    if not order:
        raise EmptyGraph("graph has no nodes")
    return _from_index_edges(list(order), np.array(pairs, dtype=np.int64).reshape(-1, 2))


def graph_from_adjacency(adj, node_ids: Sequence[str] | None = None) -> Graph:
    """Graph from a symmetric 0/1 matrix (dense or sparse)."""
    a = sp.coo_matrix(adj)
    n = a.shape[0]
    if node_ids is None:
        node_ids = [str(k) for k in range(n)]
    mask = a.row < a.col
    return _from_index_edges(node_ids, np.stack([a.row[mask], a.col[mask]], axis=1))


# --------------------------------------------------------------------- structure


def n_components(g: Graph) -> int:
    return int(connected_components(g.adjacency, directed=False)[0])


def is_connected(g: Graph) -> bool:
    return n_components(g) == 1


def two_coloring(g: Graph) -> np.ndarray | None:
    """Return a +1/-1 proper coloring, or None when the graph has an odd cycle."""
    a = g.adjacency
    color = np.zeros(g.n, dtype=np.int8)
    for start in range(g.n):
        if color[start]:
            continue
        color[start] = 1
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in a.indices[a.indptr[u] : a.indptr[u + 1]]:
                if color[v] == 0:
                    color[v] = -color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return color.astype(float)


def is_bipartite(g: Graph) -> bool:
    return two_coloring(g) is not None


def triangle_count(g: Graph) -> int:
    a = g.adjacency
    # each triangle is counted 6 times in sum((A @ A) o A)
    return int(round((a @ a).multiply(a).sum() / 6))


@dataclass(frozen=True)
class StructureReport:
    connected: bool
    bipartite: bool
    triangles: int
    degree_stats: DegreeStats
    components: int


def structure_report(g: Graph) -> StructureReport:
    comps = n_components(g)
    return StructureReport(
        connected=comps == 1,
        bipartite=is_bipartite(g),
        triangles=triangle_count(g),
        degree_stats=g.degree_stats(),
        components=comps,
    )


# --------------------------------------------------------------------- generators


def gen_path(n: int) -> Graph:
    if n < 2:
        raise InvalidParam(f"path needs n >= 2, got {n}")
    return build_graph((str(k), str(k + 1)) for k in range(n - 1))


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParam(f"cycle needs n >= 3, got {n}")
    return build_graph((str(k), str((k + 1) % n)) for k in range(n))


def gen_grid(rows: int, cols: int) -> Graph:
    """Rook (4-neighbour) grid; node id ``"r,c"`` in row-major order."""
    if rows < 1 or cols < 1:
        raise InvalidParam(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    ids = [f"{r},{c}" for r in range(rows) for c in range(cols)]
    pairs = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                pairs.append((k, k + 1))
            if r + 1 < rows:
                pairs.append((k, k + cols))
    return _from_index_edges(ids, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def gen_torus(rows: int, cols: int) -> Graph:
    """Periodic rook grid, 4-regular for rows, cols >= 3."""
    if rows < 3 or cols < 3:
        raise InvalidParam(f"torus needs rows, cols >= 3, got {rows}x{cols}")
    ids = [f"{r},{c}" for r in range(rows) for c in range(cols)]
    pairs = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            pairs.append((k, r * cols + (c + 1) % cols))
            pairs.append((k, ((r + 1) % rows) * cols + c))
    return _from_index_edges(ids, np.array(pairs, dtype=np.int64))


def gen_hex_hexagon(side: int) -> Graph:
    """Hexagonal patch of the triangular lattice with ``side`` vertices per side.

    Axial coordinates (q, r) with max(|q|, |r|, |q + r|) <= side - 1; the
    interior is 6-regular and the node count is 3 s^2 - 3 s + 1.
    """
    if side < 1:
        raise InvalidParam(f"hexagon needs side >= 1, got {side}")
    m = side - 1
    cells = [(q, r) for q in range(-m, m + 1) for r in range(-m, m + 1) if abs(q + r) <= m]
    index = {c: k for k, c in enumerate(cells)}
    pairs = []
    for (q, r), k in index.items():
        for dq, dr in ((1, 0), (0, 1), (-1, 1)):
            nb = index.get((q + dq, r + dr))
            if nb is not None:
                pairs.append((k, nb))
    ids = [f"{q},{r}" for q, r in cells]
    return _from_index_edges(ids, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def gen_double_star(leaves_per_hub: int) -> Graph:
    """Two adjacent hubs ``h0``, ``h1``, each with its own pendant leaves."""
    if leaves_per_hub < 0:
        raise InvalidParam(f"leaves_per_hub must be >= 0, got {leaves_per_hub}")
    edges = [("h0", "h1")]
    for hub in ("h0", "h1"):
        edges.extend((hub, f"{hub}.{k}") for k in range(leaves_per_hub))
    return build_graph(edges)


def gen_random_connected(n: int, extra_edge_prob: float, seed: int) -> Graph:
    """Random spanning tree plus independent extra edges; always connected."""
    if n < 2:
        raise InvalidParam(f"need n >= 2, got {n}")
    if not 0.0 <= extra_edge_prob <= 1.0:
        raise InvalidParam(f"extra_edge_prob must lie in [0, 1], got {extra_edge_prob}")
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(n)
    pairs = [(order[k], order[rng.integers(0, k)]) for k in range(1, n)]
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < extra_edge_prob
    pairs.extend(zip(iu[keep], ju[keep]))
    return _from_index_edges([str(k) for k in range(n)], np.array(pairs, dtype=np.int64))


def random_edge_deletion(
    g: Graph, fraction: float, seed: int, max_rejections: int = 10_000
) -> Graph:
    """Delete a seeded uniform random ``fraction`` of edges, keeping the result connected.

    The number removed is ``fraction * edge_count`` rounded half up. A draw
    that disconnects the graph is rejected and redrawn from the same stream.
    Node set and node order are unchanged.
    """
    if not 0.0 <= fraction < 1.0:
        raise InvalidParam(f"fraction must lie in [0, 1), got {fraction}")
    if not is_connected(g):
        raise InvalidParam("random_edge_deletion needs a connected input graph")
    k = int(math.floor(fraction * g.edge_count + 0.5))
    if k == 0:
        return g
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(max_rejections):
        drop = rng.choice(g.edge_count, size=k, replace=False)
        keep = np.ones(g.edge_count, dtype=bool)
        keep[drop] = False
        candidate = Graph(g.node_ids, g.edges[keep], g._index)
        if is_connected(candidate):
            return candidate
    raise Exhausted(f"no connected result after {max_rejections} draws deleting {k} edge(s)")


GENERATORS = {
    "cycle": gen_cycle,
    "path": gen_path,
    "grid": gen_grid,
    "torus": gen_torus,
    "hex-hexagon": gen_hex_hexagon,
    "double-star": gen_double_star,
    "random": gen_random_connected,
}
