"""Moran's I of the hub-leaf vectors on double stars as the leaf count grows.

The vector v_a puts -1/+1 on the hubs and -1/a, +1/a on their leaves; v_inf
zeroes the leaves. Scores drift toward their large-n limits slowly, which this
table makes visible.

    python3 scripts/double_star_limits.py --a 3 --leaves 10 100 1000 10000
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

from moranlab.graphcore import gen_double_star
from moranlab.moran import moran_i
from moranlab.patterns import hub_leaf
from moranlab.weights import build_weights


@dataclass
class Config:
    a: float = 3.0
    leaves: list[int] = field(default_factory=lambda: [10, 100, 1000, 10_000, 100_000])
    kinds: tuple[str, ...] = ("A", "P", "L", "M")


def table(cfg: Config):
    rows = []
    for n in cfg.leaves:
        g = gen_double_star(n)
        W = {k: build_weights(g, k) for k in cfg.kinds}
        va, vinf = hub_leaf(g, cfg.a), hub_leaf(g, None)
        rows.append((n, [moran_i(va, W[k]) for k in cfg.kinds], [moran_i(vinf, W[k]) for k in cfg.kinds]))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--a", type=float, default=3.0)
    ap.add_argument("--leaves", type=int, nargs="+", default=Config().leaves)
    a = ap.parse_args(argv)
    cfg = Config(a=a.a, leaves=a.leaves)
    head = " ".join(f"{'v_a;' + k:>10}" for k in cfg.kinds) + " " + " ".join(f"{'v_inf;' + k:>10}" for k in cfg.kinds)
    print(f"{'leaves':>8} {head}")
    for n, xs, ys in table(cfg):
        print(f"{n:>8} " + " ".join(f"{x:>10.5f}" for x in xs + ys))


if __name__ == "__main__":
    main()
