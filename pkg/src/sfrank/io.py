"""File formats: edge/attribute CSVs with a JSON header, rank CSVs, sample CSVs.

A graph saved under ``PREFIX`` consists of

* ``PREFIX.edges.csv``: header ``src,dst``, one 0-indexed edge per line;
* ``PREFIX.attrs.csv``: header ``vertex,in_param,out_param,q,zeta``;
* ``PREFIX.json``: ``model_tag``, ``n``, ``seed``, ``config`` and extra metadata.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .graphgen import Attributes, DiGraph, ModelTag

EDGE_HEADER = "src,dst"
ATTR_HEADER = "vertex,in_param,out_param,q,zeta"


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_json(path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def graph_paths(prefix) -> tuple[Path, Path, Path]:
    prefix = str(prefix)
    return Path(prefix + ".edges.csv"), Path(prefix + ".attrs.csv"), Path(prefix + ".json")


def write_attributes(path, attrs: Attributes) -> None:
    lines = [ATTR_HEADER]
    for i in range(len(attrs)):
        lines.append(
            f"{i},{_fmt(attrs.in_param[i])},{_fmt(attrs.out_param[i])},{_fmt(attrs.q[i])},{_fmt(attrs.zeta[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_attributes(path) -> Attributes:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"vertex", "in_param", "out_param", "q", "zeta"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing attribute columns {sorted(missing)}")
        rows = sorted(reader, key=lambda r: int(r["vertex"]))
    if [int(r["vertex"]) for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: vertices must be numbered 0..n-1")

    def column(name):
        raw = [r[name] for r in rows]
        if all(v.lstrip("-").isdigit() for v in raw):
            return np.array([int(v) for v in raw], dtype=np.int64)
        return np.array([float(v) for v in raw])

    return Attributes(column("in_param"), column("out_param"), column("q").astype(float), column("zeta").astype(float))


def write_graph(prefix, graph: DiGraph, header: dict | None = None) -> None:
    edges_path, attrs_path, header_path = graph_paths(prefix)
    edges_path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(f"{s},{d}" for s, d in zip(graph.src.tolist(), graph.dst.tolist()))
    edges_path.write_text(EDGE_HEADER + "\n" + (body + "\n" if body else ""))
    write_attributes(attrs_path, graph.attrs)
    meta = {"model_tag": graph.model_tag.value, "n": graph.n, "num_edges": graph.num_edges}
    meta.update({k: v for k, v in graph.meta.items()})
    meta.update(header or {})
    write_json(header_path, meta)


def read_graph(prefix) -> DiGraph:
    edges_path, attrs_path, header_path = graph_paths(prefix)
    for p in (edges_path, attrs_path, header_path):
        if not p.exists():
            raise FileNotFoundError(f"graph file {p} not found")
    header = read_json(header_path)
    attrs = read_attributes(attrs_path)
    with open(edges_path) as fh:
        fh.readline()
        rest = fh.read()
    data = np.loadtxt(rest.splitlines(), delimiter=",", dtype=np.int64, ndmin=2) if rest.strip() else np.empty((0, 2), np.int64)
    src, dst = data[:, 0], data[:, 1]
    meta = {"theta": header["theta"]} if "theta" in header else {}
    return DiGraph(int(header["n"]), src, dst, attrs, ModelTag(header["model_tag"]), meta)


def write_ranks(path, values) -> None:
    lines = ["vertex,rank"] + [f"{i},{_fmt(v)}" for i, v in enumerate(np.asarray(values).tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def write_samples(path, values) -> None:
    Path(path).write_text("".join(f"{_fmt(v)}\n" for v in np.asarray(values).tolist()))


def read_samples(path) -> np.ndarray:
    """Values from a one-column sample file or the last column of a headed CSV."""
    out = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                out.append(float(row[-1]))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ValueError(f"{path}:{lineno}: not a number: {row[-1]!r}") from None
    return np.asarray(out)
