"""Reading dual graphs and attribute tables, imputation, report serialization.

Graph files use the node-link JSON layout::

    {"nodes": [{"id": "a"}, {"id": "b"}, ...],
     "links": [{"source": "a", "target": "b"}, ...]}

``links`` may also be a list of two-element ``[u, v]`` arrays, and the
networkx ``"adjacency"`` layout (a list parallel to ``nodes`` whose entries
list neighbour objects ``{"id": ...}``) is accepted in place of ``links``.
Integer ids are converted to strings. Other top-level keys (``directed``,
``multigraph``, ``graph``, ``schema``, ``version``) are ignored on read.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateId,
    MissingColumn,
    MissingNode,
    NonNumericCell,
    ParseError,
    Unimputable,
    UnknownNodeId,
)
from .graphcore import Graph, StructureReport, build_graph
from .moran import LocalReport, MoranReport, NodeVector, PermutationResult, ScatterResult
from .randwalk import WalkDiagnostics
from .spectral import BoundIntervals, RangeMethod, SpectralRange, SpectrumReport

log = logging.getLogger(__name__)

GRAPH_SCHEMA = "moranlab-nodelink"
GRAPH_SCHEMA_VERSION = 1
SIG_DIGITS = 12


# ------------------------------------------------------------------ graphs


def _node_id(obj, where: str) -> str:
    if isinstance(obj, dict):
        if "id" not in obj:
            raise ParseError(f"{where}: node object has no 'id' key")
        obj = obj["id"]
    if isinstance(obj, bool) or not isinstance(obj, (str, int)):
        raise ParseError(f"{where}: node id must be a string or integer, got {obj!r}")
    return str(obj)


def parse_graph_json(text: str, source: str = "<string>") -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno} (offset {exc.pos}): {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object with 'nodes' and 'links'")
    if "nodes" not in doc:
        raise ParseError(f"{source}: missing required key 'nodes'")
    if not isinstance(doc["nodes"], list):
        raise ParseError(f"{source}: key 'nodes' must be a list")
    ids = [_node_id(nd, f"{source}: nodes[{k}]") for k, nd in enumerate(doc["nodes"])]
    seen = set()
    for nid in ids:
        if nid in seen:
            raise DuplicateId(f"{source}: node id {nid!r} declared twice")
        seen.add(nid)

    pairs = []
    if "links" in doc:
        links = doc["links"]
        if not isinstance(links, list):
            raise ParseError(f"{source}: key 'links' must be a list")
        for k, ln in enumerate(links):
            where = f"{source}: links[{k}]"
            if isinstance(ln, dict):
                if "source" not in ln or "target" not in ln:
                    raise ParseError(f"{where}: link object needs 'source' and 'target'")
                pairs.append((_node_id(ln["source"], where), _node_id(ln["target"], where)))
            elif isinstance(ln, list) and len(ln) == 2:
                pairs.append((_node_id(ln[0], where), _node_id(ln[1], where)))
            else:
                raise ParseError(f"{where}: expected {{'source', 'target'}} or [u, v], got {ln!r}")
    elif "adjacency" in doc:
        adj = doc["adjacency"]
        if not isinstance(adj, list):
            raise ParseError(f"{source}: key 'adjacency' must be a list")
        if adj and all(isinstance(r, list) and len(r) == 2 and not isinstance(r[0], (dict, list)) for r in adj) and len(adj) != len(ids):
            # flat list of id pairs
            pairs = [(_node_id(u, f"{source}: adjacency"), _node_id(v, f"{source}: adjacency")) for u, v in adj]
        else:
            if len(adj) != len(ids):
                raise ParseError(f"{source}: key 'adjacency' must have one entry per node ({len(adj)} vs {len(ids)})")
            for k, row in enumerate(adj):
                if not isinstance(row, list):
                    raise ParseError(f"{source}: adjacency[{k}] must be a list")
                for nb in row:
                    pairs.append((ids[k], _node_id(nb, f"{source}: adjacency[{k}]")))
    else:
        raise ParseError(f"{source}: missing required key 'links' (or 'adjacency')")

    for u, v in pairs:
        for x in (u, v):
            if x not in seen:
                raise UnknownNodeId(f"{source}: link references undeclared node id {x!r}")
    return build_graph(pairs, nodes=ids)


def load_graph_json(path) -> Graph:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read graph file {p}: {exc.strerror}") from None
    return parse_graph_json(text, source=str(p))


def graph_to_json(g: Graph) -> str:
    doc = {
        "schema": GRAPH_SCHEMA,
        "version": GRAPH_SCHEMA_VERSION,
        "directed": False,
        "multigraph": False,
        "nodes": [{"id": nid} for nid in g.node_ids],
        "links": [{"source": g.node_ids[i], "target": g.node_ids[j]} for i, j in g.edges],
    }
    return json.dumps(doc, indent=1) + "\n"


def save_graph_json(g: Graph, path) -> None:
    Path(path).write_text(graph_to_json(g), encoding="utf-8")


# ------------------------------------------------------------------ attributes


@dataclass(frozen=True, eq=False)
class AttributeTable:
    """Numeric columns keyed by node id, in row order.

    With a ``total_column`` every other column also has a derived share
    ``<name>_share = <name> / total``; rows with zero total get NaN shares
    and are listed by :attr:`needs_imputation`.
    """

    ids: tuple[str, ...]
    columns: dict[str, np.ndarray]
    total_column: str | None = None
    imputed: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "_index", {nid: k for k, nid in enumerate(self.ids)})

    @property
    def names(self) -> list[str]:
        names = list(self.columns)
        if self.total_column:
            names += [f"{c}_share" for c in self.columns if c != self.total_column]
        return names

    def column(self, name: str) -> np.ndarray:
        if name in self.columns:
            return self.columns[name]
        if self.total_column and name.endswith("_share"):
            base = name[: -len("_share")]
            if base in self.columns and base != self.total_column:
                total = self.columns[self.total_column]
                out = np.full(len(self.ids), np.nan)
                ok = total > 0
                out[ok] = self.columns[base][ok] / total[ok]
                return out
        raise MissingColumn(f"no column {name!r}; available: {', '.join(self.names)}")

    @property
    def needs_imputation(self) -> list[str]:
        if not self.total_column:
            return []
        total = self.columns[self.total_column]
        return [self.ids[k] for k in np.flatnonzero(total <= 0)]

    def align(self, g: Graph) -> "AttributeTable":
        """Rows reordered to graph node order; raises MissingNode for absent ids."""
        missing = [nid for nid in g.node_ids if nid not in self._index]
        if missing:
            raise MissingNode(missing)
        extra = len(self.ids) - g.n
        if extra > 0:
            log.warning("%d attribute row(s) do not match any graph node and are dropped", extra)
        order = np.array([self._index[nid] for nid in g.node_ids], dtype=np.int64)
        cols = {k: v[order] for k, v in self.columns.items()}
        return AttributeTable(tuple(g.node_ids), cols, self.total_column, self.imputed)

    def vector(self, g: Graph, name: str) -> NodeVector:
        t = self.align(g)
        vals = t.column(name)
        if np.any(np.isnan(vals)):
            bad = [t.ids[k] for k in np.flatnonzero(np.isnan(vals))[:10]]
            raise Unimputable(f"column {name!r} undefined at zero-population node(s) {bad}; run imputation first")
        return NodeVector(vals, name=name)


def load_attributes_csv(
    path, id_column: str, value_columns: list[str] | None = None, total_column: str | None = None
) -> AttributeTable:
    """Parse an RFC-4180 CSV with a header row into an AttributeTable."""
    p = Path(path)
    try:
        handle = p.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read attribute file {p}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{p}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if id_column not in header:
            raise MissingColumn(f"{p}: id column {id_column!r} not in header {header}")
        if value_columns is None:
            value_columns = [h for h in header if h != id_column]
        wanted = list(dict.fromkeys(value_columns + ([total_column] if total_column else [])))
        for c in wanted:
            if c not in header:
                raise MissingColumn(f"{p}: column {c!r} not in header {header}")
        id_pos = header.index(id_column)
        pos = {c: header.index(c) for c in wanted}
        ids: list[str] = []
        data: dict[str, list[float]] = {c: [] for c in wanted}
        seen = set()
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{p}: line {line} has {len(row)} fields, header has {len(header)}")
            nid = row[id_pos].strip()
            if nid in seen:
                raise DuplicateId(f"{p}: id {nid!r} appears twice (line {line})")
            seen.add(nid)
            ids.append(nid)
            for c in wanted:
                cell = row[pos[c]].strip()
                try:
                    val = float(cell)
                except ValueError:
                    raise NonNumericCell(line, c, cell) from None
                if not math.isfinite(val):
                    raise NonNumericCell(line, c, cell)
                data[c].append(val)
    cols = {c: np.array(data[c], dtype=float) for c in wanted}
    return AttributeTable(tuple(ids), cols, total_column)


def impute_zero_population(table: AttributeTable, g: Graph) -> AttributeTable:
    """Fill zero-total nodes with the mean counts of their populated neighbours.

    Every count column (the total and each group) is replaced by the mean of
    that column over neighbours whose total is positive. Nodes are visited in
    graph order and an imputed node counts as populated for later nodes in
    the same pass; passes repeat until no zero-total node remains.
    """
    if not table.total_column:
        raise MissingColumn("imputation needs a total-population column")
    t = table.align(g)
    cols = {k: v.copy() for k, v in t.columns.items()}
    total = cols[t.total_column]
    pending = [k for k in range(g.n) if total[k] <= 0]
    done: list[str] = list(t.imputed)
    while pending:
        progressed = []
        for k in pending:
            nbs = [j for j in g.neighbors(k) if total[j] > 0]
            if not nbs:
                continue
            for c in cols.values():
                c[k] = float(np.mean(c[nbs]))
            progressed.append(k)
        if not progressed:
            stuck = [g.node_ids[k] for k in pending[:10]]
            raise Unimputable(
                f"{len(pending)} zero-population node(s) have no populated node in their component, e.g. {stuck}"
            )
        done.extend(g.node_ids[k] for k in progressed)
        pending = [k for k in pending if total[k] <= 0]
    return AttributeTable(t.ids, cols, t.total_column, tuple(done))


# ------------------------------------------------------------------ reports

REPORT_TYPES = {
    cls.__name__: cls
    for cls in (
        MoranReport,
        LocalReport,
        SpectralRange,
        SpectrumReport,
        WalkDiagnostics,
        ScatterResult,
        PermutationResult,
        BoundIntervals,
        StructureReport,
    )
}
# bulky fields left out of serialized output
_SKIP = {"PermutationResult": {"null_values"}, "StructureReport": {"degree_stats"}}


def _round(x: float) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def _jsonable(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round(float(value))
    if isinstance(value, np.ndarray):
        return [_jsonable(x) for x in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(x) for x in value]
    if dataclasses.is_dataclass(value):
        return {f.name: _jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    return value


def report_fields(report) -> dict:
    name = type(report).__name__
    skip = _SKIP.get(name, set())
    return {f.name: getattr(report, f.name) for f in dataclasses.fields(report) if f.name not in skip}


def _scalar_and_array_fields(report):
    scalars, arrays = {}, {}
    for k, v in report_fields(report).items():
        if isinstance(v, np.ndarray) or (isinstance(v, list) and v and isinstance(v[0], (float, int))):
            arrays[k] = np.asarray(v, dtype=float)
        else:
            scalars[k] = v
    return scalars, arrays


def emit_report(report, fmt: str = "json", node_ids=None) -> bytes:
    """Serialize a report dataclass as JSON or CSV with 12 significant digits.

    JSON: ``{"type": <class>, <fields in declaration order>}``.
    CSV: ``# key=<json value>`` comment lines for scalar fields, then one row
    per node with a column per array field (``node`` first when ids are
    known).
    """
    name = type(report).__name__
    if name not in REPORT_TYPES:
        raise TypeError(f"cannot serialize {name}")
    if fmt == "json":
        doc = {"type": name}
        doc.update({k: _jsonable(v) for k, v in report_fields(report).items()})
        return (json.dumps(doc, indent=1, allow_nan=True) + "\n").encode("utf-8")
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    scalars, arrays = _scalar_and_array_fields(report)
    if node_ids is None:
        node_ids = scalars.get("node_ids")
    scalars.pop("node_ids", None)
    buf = io.StringIO()
    buf.write(f"# type={name}\n")
    for k, v in scalars.items():
        buf.write(f"# {k}={json.dumps(_jsonable(v))}\n")
    if arrays:
        lengths = {len(a) for a in arrays.values()}
        if len(lengths) != 1:
            raise ValueError(f"array fields of {name} have different lengths: {lengths}")
        w = csv.writer(buf, lineterminator="\n")
        cols = list(arrays)
        w.writerow((["node"] if node_ids is not None else []) + cols)
        for r in range(lengths.pop()):
            lead = [node_ids[r]] if node_ids is not None else []
            w.writerow(lead + [f"{arrays[c][r]:.{SIG_DIGITS}g}" for c in cols])
    return buf.getvalue().encode("utf-8")


def _rebuild(name: str, values: dict):
    cls = REPORT_TYPES[name]
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in values:
            if f.name in _SKIP.get(name, ()):
                kwargs[f.name] = np.array([]) if "ndarray" in str(f.type) else None
            continue
        val = values[f.name]
        ann = str(f.type)
        if val is None:
            kwargs[f.name] = None
        elif "ndarray" in ann:
            kwargs[f.name] = np.asarray(val, dtype=float)
        elif ann.startswith("tuple") or "tuple[" in ann:
            kwargs[f.name] = tuple(val)
        elif ann == "RangeMethod":
            kwargs[f.name] = RangeMethod(val)
        elif ann.startswith("list") and isinstance(val, np.ndarray):
            kwargs[f.name] = [float(x) for x in val]
        else:
            kwargs[f.name] = val
    return cls(**kwargs)


def parse_report(data: bytes, fmt: str = "json"):
    """Inverse of :func:`emit_report`."""
    text = data.decode("utf-8")
    if fmt == "json":
        doc = json.loads(text)
        name = doc.pop("type")
        return _rebuild(name, doc)
    scalars, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, v = line[2:].split("=", 1)
            scalars[k] = v if k == "type" else json.loads(v)
        elif line:
            body.append(line)
    name = scalars.pop("type")
    if body:
        rows = list(csv.reader(body))
        header, rows = rows[0], rows[1:]
        if header[0] == "node":
            scalars["node_ids"] = [r[0] for r in rows]
            header, rows = header[1:], [r[1:] for r in rows]
        for c, col in zip(header, zip(*rows) if rows else [[]] * len(header)):
            scalars[c] = np.array([float(x) for x in col])
    return _rebuild(name, scalars)
