"""Built-in synthetic node columns, addressable by name from the CLI.

A column spec is ``name`` or ``name(key=value, ...)``, e.g. ``v_a(a=3)``.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import InvalidParam
from .graphcore import Graph, two_coloring
from .moran import NodeVector
from .spectral import fiedler_vector


def alternating(g: Graph) -> NodeVector:
    """+1/-1 on the two sides of a bipartite graph."""
    color = two_coloring(g)
    if color is None:
        raise InvalidParam("alternating pattern needs a bipartite graph")
    return NodeVector(color, name="alternating")


def double_star_hubs(g: Graph) -> tuple[int, int, np.ndarray]:
    """Hub indices (in node order) and, per node, which hub it hangs from (-1 for hubs)."""
    d = g.degrees
    if g.n < 2 or g.edge_count != g.n - 1:
        raise InvalidParam("graph is not a double star")
    hubs = np.flatnonzero(d > 1)
    if len(hubs) == 0 and g.n == 2:
        hubs = np.array([0, 1])
    if len(hubs) != 2:
        raise InvalidParam("graph is not a double star (needs exactly two hubs)")
    h0, h1 = int(hubs[0]), int(hubs[1])
    owner = np.full(g.n, -1)
    for hub in (h0, h1):
        for nb in g.neighbors(hub):
            if nb not in (h0, h1):
                if d[nb] != 1:
                    raise InvalidParam("graph is not a double star (leaf of degree > 1)")
                owner[nb] = hub
    if h1 not in g.neighbors(h0) or np.count_nonzero(owner >= 0) != g.n - 2:
        raise InvalidParam("graph is not a double star")
    return h0, h1, owner


def hub_leaf(g: Graph, a: float | None) -> NodeVector:
    """-1 / +1 on the hubs and -1/a / +1/a on their leaves; a=None puts 0 on leaves."""
    h0, h1, owner = double_star_hubs(g)
    leaf = 0.0 if a is None else 1.0 / a
    v = np.zeros(g.n)
    v[h0], v[h1] = -1.0, 1.0
    v[owner == h0] = -leaf
    v[owner == h1] = leaf
    return NodeVector(v, name="v_inf" if a is None else f"v_a(a={a:g})")


def fiedler_sign(g: Graph) -> NodeVector:
    f = fiedler_vector(g).values
    return NodeVector(np.where(f >= 0, 1.0, 0.0), name="fiedler_sign")


def random_column(g: Graph, seed: int = 0) -> NodeVector:
    rng = np.random.Generator(np.random.Philox(seed))
    return NodeVector(rng.random(g.n), name=f"random(seed={seed})")


_SPEC = re.compile(r"^\s*([A-Za-z_][\w]*)\s*(?:\((.*)\))?\s*$")


def parse_column_spec(text: str) -> tuple[str, dict[str, str]]:
    m = _SPEC.match(text)
    if not m:
        raise InvalidParam(f"cannot parse column spec {text!r}")
    name, args = m.group(1), m.group(2)
    params = {}
    if args:
        for part in args.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise InvalidParam(f"column argument {part!r} is not key=value")
            k, val = part.split("=", 1)
            params[k.strip()] = val.strip()
    return name, params


SYNTHETIC = ("alternating", "v_a", "v_inf", "fiedler", "fiedler_sign", "random")


def is_synthetic(text: str) -> bool:
    try:
        return parse_column_spec(text)[0] in SYNTHETIC
    except InvalidParam:
        return False


def synthetic_column(g: Graph, text: str, seed: int = 0) -> NodeVector:
    name, p = parse_column_spec(text)
    if name == "alternating":
        return alternating(g)
    if name == "v_a":
        if "a" not in p:
            raise InvalidParam("v_a needs a parameter, e.g. v_a(a=3)")
        a = float(p["a"])
        if a == 0:
            raise InvalidParam("v_a needs a != 0")
        return hub_leaf(g, a)
    if name == "v_inf":
        return hub_leaf(g, None)
    if name == "fiedler":
        return fiedler_vector(g)
    if name == "fiedler_sign":
        return fiedler_sign(g)
    if name == "random":
        return random_column(g, int(p.get("seed", seed)))
    raise InvalidParam(f"unknown synthetic column {name!r}; known: {', '.join(SYNTHETIC)}")
