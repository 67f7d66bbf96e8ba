"""True ranges, eigenvalue bounds and degree bounds for a dual graph file.

    python3 scripts/county_ranges.py path/to/counties.json --kinds A P
"""

from __future__ import annotations

import argparse

from moranlab.graphcore import is_connected
from moranlab.ingest import load_graph_json
from moranlab.spectral import achievable_range


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("graph", help="node-link JSON graph")
    ap.add_argument("--kinds", nargs="+", default=["A", "P"])
    a = ap.parse_args(argv)
    g = load_graph_json(a.graph)
    print(f"{g.n} nodes, {g.edge_count} edges, connected={is_connected(g)}")
    print(f"{'kind':>4} {'row':>12} {'low':>9} {'high':>9}")
    for k in a.kinds:
        r = achievable_range(g, k)
        rows = [("true range", (r.i_min, r.i_max))]
        if r.eigenvalue_bounds is not None:
            rows += [("eigenvalue", r.eigenvalue_bounds), ("degree", r.degree_bounds)]
        for name, (lo, hi) in rows:
            print(f"{k:>4} {name:>12} {lo:>9.4f} {hi:>9.4f}")


if __name__ == "__main__":
    main()
