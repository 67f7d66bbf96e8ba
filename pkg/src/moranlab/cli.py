"""``moranlab`` command line.

Every subcommand writes one report to stdout (or ``--out``) and diagnostics,
including the effective seed, to stderr. Exit status: 0 success, 2 parse
error (bad files or arguments), 3 numeric or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field

from . import __version__
from .errors import InvalidParam, MoranError
from .graphcore import (
    GENERATORS,
    Graph,
    gen_cycle,
    gen_double_star,
    gen_grid,
    gen_hex_hexagon,
    gen_path,
    gen_random_connected,
    gen_torus,
    random_edge_deletion,
)
from .ingest import SIG_DIGITS, emit_report, graph_to_json, impute_zero_population, load_attributes_csv, load_graph_json
from .moran import NodeVector, local_report, moran_i, moran_report, moran_scatter, permutation_test
from .patterns import is_synthetic, parse_column_spec, synthetic_column
from .randwalk import variance_profile, walk_diagnostics
from .spectral import SOLVER_MAXITER, SOLVER_TOL, achievable_range, spectral_gap, spectrum_report
from .weights import DENSE_THRESHOLD, GRAPH_KINDS, WeightKind, build_weights

log = logging.getLogger("moranlab")

SCHEMAS = """\
input formats:
  graph (--graph): JSON {"nodes": [{"id": ID}, ...], "links": [{"source": ID, "target": ID}, ...]}
      links may also be [ID, ID] pairs; networkx "adjacency" lists are accepted
      instead of "links". IDs are strings or integers (read as strings).
      --graph also accepts a generator spec such as gen:hex-hexagon(side=8).
  attributes (--attrs): UTF-8 CSV with a header row; --id-column names the node
      id column, other columns are numeric. With --total-column T every other
      column C also exposes C_share = C / T; zero-total rows are filled from
      populated neighbours before shares are taken.
  column (--column): an attribute column, or a built-in pattern:
      alternating, v_a(a=3), v_inf, fiedler, fiedler_sign, random(seed=1)

output formats (--format json|csv, floats at 12 significant digits):
  json: one object, "type" first, then the report fields in a fixed order.
      MoranReport: kind, global_i, expected_null, local_i, lagged, p_value,
      permutations, seed, local_extension, node_ids.
  csv: "# key=value" comment lines for scalar fields, then one row per node
      with a column per per-node field ("node" first when ids are known).
      scatter: "# slope=..." then rows "v,u". compare: long-form rows
      graph,column,kind,I. extremize: attribute CSV id,v_min,v_max.

p-values: two-sided, (1 + #{|I_perm - m| >= |I_obs - m|}) / (N + 1) with m the
  mean of the N permuted scores; never zero.
"""


@dataclass
class RunConfig:
    graph: list[str] = field(default_factory=list)
    attrs: str | None = None
    id_column: str = "id"
    column: list[str] = field(default_factory=list)
    total_column: str | None = None
    kind: list[str] = field(default_factory=list)
    seed: int = 0
    n_perms: int = 999
    fmt: str = "json"
    out: str | None = None
    dense_threshold: int = DENSE_THRESHOLD
    tol: float = SOLVER_TOL
    max_iter: int = SOLVER_MAXITER

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            graph=list(ns.graph or []),
            attrs=ns.attrs,
            id_column=ns.id_column,
            column=list(ns.column or []),
            total_column=ns.total_column,
            kind=[k for spec in (ns.kind or []) for k in spec.split(",") if k.strip()],
            seed=ns.seed,
            n_perms=ns.n_perms,
            fmt=ns.format,
            out=ns.out,
            dense_threshold=ns.dense_threshold,
            tol=ns.tol,
            max_iter=ns.max_iter,
        )

    def kinds(self, default: list[str]) -> list[WeightKind]:
        return [WeightKind.parse(k) for k in (self.kind or default)]

    def one_kind(self, default: str) -> WeightKind:
        ks = self.kinds([default])
        if len(ks) != 1:
            raise InvalidParam("this command takes a single --kind")
        return ks[0]


# ------------------------------------------------------------------ inputs

_GEN_ARGS = {
    "cycle": (gen_cycle, ["n"]),
    "path": (gen_path, ["n"]),
    "grid": (gen_grid, ["rows", "cols"]),
    "torus": (gen_torus, ["rows", "cols"]),
    "hex-hexagon": (gen_hex_hexagon, ["side"]),
    "double-star": (gen_double_star, ["leaves"]),
    "random": (gen_random_connected, ["n", "p", "seed"]),
}


def _generated(spec: str, seed: int) -> Graph:
    text = spec[len("gen:") :]
    # family names contain '-', which the column-spec grammar does not allow
    fam, _, rest = text.partition("(")
    fam = fam.strip()
    if fam not in _GEN_ARGS:
        raise InvalidParam(f"unknown graph family {fam!r}; known: {', '.join(GENERATORS)}")
    _, params = parse_column_spec("x(" + rest if rest else "x")
    fn, names = _GEN_ARGS[fam]
    params.setdefault("seed", str(seed))
    try:
        args = [float(params[k]) if k == "p" else int(params[k]) for k in names]
    except KeyError as exc:
        raise InvalidParam(f"graph family {fam} needs parameter {exc.args[0]}") from None
    except ValueError as exc:
        raise InvalidParam(f"bad parameter in {spec!r}: {exc}") from None
    return fn(*args)


def load_graph(spec: str, seed: int = 0) -> Graph:
    if spec.startswith("gen:"):
        return _generated(spec, seed)
    return load_graph_json(spec)


def load_column(cfg: RunConfig, g: Graph, column: str) -> NodeVector:
    if is_synthetic(column) and not (cfg.attrs and _attr_has(cfg, column)):
        return synthetic_column(g, column, seed=cfg.seed)
    if not cfg.attrs:
        raise InvalidParam(f"column {column!r} is not a built-in pattern and no --attrs file was given")
    table = load_attributes_csv(cfg.attrs, cfg.id_column, total_column=cfg.total_column)
    table = table.align(g)
    if cfg.total_column and table.needs_imputation:
        n_zero = len(table.needs_imputation)
        table = impute_zero_population(table, g)
        log.info("imputed %d zero-population node(s) from neighbour means", n_zero)
    return table.vector(g, column)


def _attr_has(cfg: RunConfig, column: str) -> bool:
    with open(cfg.attrs, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    return column in [h.strip() for h in header]


def _single(cfg: RunConfig) -> tuple[Graph, NodeVector | None]:
    if len(cfg.graph) != 1:
        raise InvalidParam("this command takes exactly one --graph")
    g = load_graph(cfg.graph[0], cfg.seed)
    if len(cfg.column) > 1:
        raise InvalidParam("this command takes a single --column")
    v = load_column(cfg, g, cfg.column[0]) if cfg.column else None
    return g, v


def _need_column(v):
    if v is None:
        raise InvalidParam("--column is required")
    return v


# ------------------------------------------------------------------ commands


def cmd_score(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    W = build_weights(g, cfg.one_kind("A"), dense_threshold=cfg.dense_threshold)
    n_perms = ns.n_perms if ns.n_perms_given else None
    rep = moran_report(_need_column(v), W, n_perms=n_perms, seed=cfg.seed, node_ids=g.node_ids)
    return emit_report(rep, cfg.fmt)


def cmd_range(cfg: RunConfig, ns) -> bytes:
    g, _ = _single(cfg)
    rng = achievable_range(
        g, cfg.one_kind("A"), k=ns.k, seed=cfg.seed, tol=cfg.tol, maxiter=cfg.max_iter,
        dense_threshold=cfg.dense_threshold,
    )
    return emit_report(rng, cfg.fmt, node_ids=g.node_ids)


def cmd_extremize(cfg: RunConfig, ns) -> bytes:
    g, _ = _single(cfg)
    rng = achievable_range(
        g, cfg.one_kind("A"), k=ns.k, seed=cfg.seed, tol=cfg.tol, maxiter=cfg.max_iter,
        dense_threshold=cfg.dense_threshold, with_bounds=False,
    )
    if cfg.fmt == "json":
        doc = {
            "type": "ExtremalVectors",
            "kind": rng.kind,
            "i_min": float(f"{rng.i_min:.{SIG_DIGITS}g}"),
            "i_max": float(f"{rng.i_max:.{SIG_DIGITS}g}"),
            "node_ids": list(g.node_ids),
            "v_min": [float(f"{x:.{SIG_DIGITS}g}") for x in rng.v_min],
            "v_max": [float(f"{x:.{SIG_DIGITS}g}") for x in rng.v_max],
        }
        return (json.dumps(doc, indent=1) + "\n").encode()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([cfg.id_column, "v_min", "v_max"])
    for nid, a, b in zip(g.node_ids, rng.v_min, rng.v_max):
        w.writerow([nid, f"{a:.{SIG_DIGITS}g}", f"{b:.{SIG_DIGITS}g}"])
    return buf.getvalue().encode()


def cmd_local(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    rep = local_report(_need_column(v), g, cfg.one_kind("A"), dense_threshold=cfg.dense_threshold)
    return emit_report(rep, cfg.fmt)


def cmd_scatter(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    W = build_weights(g, cfg.one_kind("P"), dense_threshold=cfg.dense_threshold)
    return emit_report(moran_scatter(_need_column(v), W), cfg.fmt)


def cmd_walk(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    kind = cfg.one_kind("M")
    Q = build_weights(g, kind, dense_threshold=cfg.dense_threshold)
    v = _need_column(v)
    diag = walk_diagnostics(v, Q)
    profile = variance_profile(v, Q, ns.steps)
    gap = spectral_gap(g, seed=cfg.seed, dense_threshold=cfg.dense_threshold)
    diag = type(diag)(**{**diag.__dict__, "steps": profile, "spectral_gap": gap})
    return emit_report(diag, cfg.fmt)


def cmd_spectrum(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    rep = spectrum_report(
        g, cfg.one_kind("L"), v=v, k=ns.k, seed=cfg.seed, tol=cfg.tol, maxiter=cfg.max_iter,
        dense_threshold=cfg.dense_threshold,
    )
    return emit_report(rep, cfg.fmt)


def cmd_generate(cfg: RunConfig, ns) -> bytes:
    fam = ns.family
    fn, names = _GEN_ARGS[fam]
    vals = {"n": ns.n, "rows": ns.rows, "cols": ns.cols, "side": ns.side, "leaves": ns.leaves, "p": ns.p, "seed": cfg.seed}
    missing = [k for k in names if vals[k] is None]
    if missing:
        raise InvalidParam(f"family {fam} needs --{' --'.join(missing)}")
    g = fn(*[vals[k] for k in names])
    if ns.delete_fraction:
        g = random_edge_deletion(g, ns.delete_fraction, cfg.seed)
    log.info("generated %s: %d nodes, %d edges", fam, g.n, g.edge_count)
    return graph_to_json(g).encode()


def cmd_test(cfg: RunConfig, ns) -> bytes:
    g, v = _single(cfg)
    W = build_weights(g, cfg.one_kind("A"), dense_threshold=cfg.dense_threshold)
    res = permutation_test(_need_column(v), W, n_perms=cfg.n_perms, seed=cfg.seed, workers=ns.workers)
    return emit_report(res, cfg.fmt)


def cmd_compare(cfg: RunConfig, ns) -> bytes:
    if not cfg.graph or not cfg.column:
        raise InvalidParam("compare needs at least one --graph and one --column")
    kinds = cfg.kinds(["A", "P", "L", "M"])
    rows = []
    for gspec in cfg.graph:
        g = load_graph(gspec, cfg.seed)
        weights = [build_weights(g, k, dense_threshold=cfg.dense_threshold) for k in kinds]
        for col in cfg.column:
            v = load_column(cfg, g, col)
            for k, W in zip(kinds, weights):
                rows.append((gspec, col, k.value, moran_i(v, W)))
    if cfg.fmt == "json":
        doc = {
            "type": "Comparison",
            "rows": [{"graph": a, "column": b, "kind": c, "I": float(f"{x:.{SIG_DIGITS}g}")} for a, b, c, x in rows],
        }
        return (json.dumps(doc, indent=1) + "\n").encode()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph", "column", "kind", "I"])
    for a, b, c, x in rows:
        w.writerow([a, b, c, f"{x:.{SIG_DIGITS}g}"])
    return buf.getvalue().encode()


COMMANDS = {
    "score": (cmd_score, "Moran's I of a column under one weight kind", "json"),
    "range": (cmd_range, "exact achievable range of I, with a priori bounds for A and P", "json"),
    "extremize": (cmd_extremize, "extremal vectors v_min, v_max as an attribute CSV", "csv"),
    "local": (cmd_local, "local shares I_i and the A-vs-M discrepancy D_i", "csv"),
    "scatter": (cmd_scatter, "Moran scatter pairs (v, Wv) and the fitted slope", "csv"),
    "walk": (cmd_walk, "random-walk variance reduction for a bistochastic kind", "json"),
    "spectrum": (cmd_spectrum, "extreme eigenvalues, Fiedler vector and Dirichlet energy", "json"),
    "generate": (cmd_generate, "write a synthetic graph as node-link JSON", "json"),
    "test": (cmd_test, "seeded permutation test of I", "json"),
    "compare": (cmd_compare, "I across weight kinds for many graph/column pairs (long-form)", "csv"),
}


def _common(p: argparse.ArgumentParser, default_fmt: str) -> None:
    p.add_argument("--graph", action="append", metavar="PATH", help="graph JSON file or gen:FAMILY(k=v,...)")
    p.add_argument("--attrs", metavar="CSV", help="attribute table")
    p.add_argument("--id-column", default="id", help="node id column in --attrs (default: id)")
    p.add_argument("--column", action="append", metavar="NAME", help="attribute column or built-in pattern")
    p.add_argument("--total-column", metavar="NAME", help="population total; enables C_share columns")
    p.add_argument("--kind", action="append", metavar="K", help=f"weight kind: {', '.join(k.value for k in GRAPH_KINDS)}")
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default: 0)")
    p.add_argument("--n-perms", type=int, default=None, help="number of permutations (test default: 999)")
    p.add_argument("--format", choices=["json", "csv"], default=default_fmt)
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD, help="use sparse matrices from this many nodes")
    p.add_argument("--tol", type=float, default=SOLVER_TOL, help="iterative eigensolver tolerance")
    p.add_argument("--max-iter", type=int, default=SOLVER_MAXITER, help="iterative eigensolver iteration cap")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moranlab",
        description="Moran's I on graphs under adjacency (A), row-stochastic (P), Laplacian (L) and Metropolis (M, M2) weights.",
        epilog=SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"moranlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, helptext, fmt) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext, epilog=SCHEMAS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "generate":
            p.add_argument("family", choices=sorted(_GEN_ARGS))
            for opt, typ in (("--n", int), ("--rows", int), ("--cols", int), ("--side", int), ("--leaves", int), ("--p", float)):
                p.add_argument(opt, type=typ)
            p.add_argument("--delete-fraction", type=float, default=0.0, help="then delete this fraction of edges, keeping connectivity")
        if name in ("range", "extremize", "spectrum"):
            p.add_argument("--k", type=int, default=6, help="eigenpairs per end on the sparse path")
        if name == "walk":
            p.add_argument("--steps", type=int, default=10, help="length of the variance profile")
        if name == "test":
            p.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")
        _common(p, fmt)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    ns.n_perms_given = ns.n_perms is not None
    if ns.n_perms is None:
        ns.n_perms = 999
    cfg = RunConfig.from_args(ns)
    print(f"seed={cfg.seed}", file=sys.stderr)
    fn = COMMANDS[ns.command][0]
    try:
        payload = fn(cfg, ns)
    except MoranError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
