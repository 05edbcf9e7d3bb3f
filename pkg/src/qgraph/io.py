"""JSON and CSV formats for graphs, spectra and sweep tables.

Graph files::

    {"kind": "combinatorial", "vertices": 3, "edges": [[0, 1], [1, 2]]}
    {"kind": "metric", "vertices": 2, "edges": [[0, 1, 1.0]], "dirichlet": [1]}

Edge lengths may be given as numbers or as strings such as ``"2pi"``,
``"pi/2"`` or ``"0.75"``. Floats are written with ``repr`` so that reading a
file back reproduces every value exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path

from .errors import BadParameter, GraphError
from .graph_core import CombinatorialGraph, DiscreteSpectrum
from .metric_graph import Edge, MetricGraph
from .spectral_solver import MetricSpectrum

_PI_TERM = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_length(value) -> float:
    """A number, or a string like ``1.5``, ``pi``, ``2pi``, ``2*pi``, ``pi/3``."""
    if isinstance(value, bool):
        raise BadParameter("a length cannot be a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise BadParameter(f"cannot read a length from {value!r}")
    try:
        return float(value)
    except ValueError:
        pass
    m = _PI_TERM.match(value)
    if not m:
        raise BadParameter(f"cannot read a length from {value!r}")
    sign = {"": 1.0, "+": 1.0, "-": -1.0}
    factor = sign[m.group(1)] if m.group(1) in sign else float(m.group(1))
    divisor = float(m.group(2)) if m.group(2) else 1.0
    return factor * math.pi / divisor


def graph_to_dict(g) -> dict:
    if isinstance(g, MetricGraph):
        return {"kind": "metric", "vertices": g.V,
                "edges": [[e.u, e.w, e.length] for e in g.edges],
                "dirichlet": sorted(g.dirichlet)}
    if isinstance(g, CombinatorialGraph):
        return {"kind": "combinatorial", "vertices": g.V, "edges": [list(e) for e in g.edges]}
    raise BadParameter(f"unsupported graph type {type(g).__name__}")


def graph_from_dict(obj: dict):
    try:
        V = int(obj["vertices"])
        edges = obj["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph record: {exc}") from None
    kind = obj.get("kind")
    if kind is None:
        kind = "metric" if edges and len(edges[0]) == 3 else "combinatorial"
    if kind == "metric":
        return MetricGraph(V, tuple(Edge(int(u), int(w), parse_length(l)) for u, w, l in edges),
                           frozenset(int(v) for v in obj.get("dirichlet", [])))
    if kind == "combinatorial":
        return CombinatorialGraph(V, tuple((int(u), int(w)) for u, w in edges))
    raise GraphError(f"unknown graph kind {kind!r}")


def dumps_graph(g) -> str:
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def loads_graph(text: str):
    return graph_from_dict(json.loads(text))


def load_graph(path):
    return loads_graph(Path(path).read_text())


def save_graph(g, path) -> None:
    Path(path).write_text(dumps_graph(g))


def spectrum_to_dict(sp) -> dict:
    if isinstance(sp, MetricSpectrum):
        return {"kind": "metric", "convention": sp.convention, "eigenvalues": list(sp.eigenvalues),
                "multiplicity_runs": [[v, m] for v, m in sp.multiplicity_runs()],
                "k_max": sp.k_max, "diagnostics": sp.diagnostics}
    if isinstance(sp, DiscreteSpectrum):
        return {"kind": "discrete", "matrix": sp.matrix_kind, "eigenvalues": list(sp.eigenvalues)}
    raise BadParameter(f"unsupported spectrum type {type(sp).__name__}")


def spectrum_from_dict(obj: dict):
    kind = obj.get("kind")
    vals = tuple(float(x) for x in obj["eigenvalues"])
    if kind == "metric":
        return MetricSpectrum(vals, obj.get("convention", "from_zero"), float(obj.get("k_max", 0.0)),
                              obj.get("diagnostics", {}))
    if kind == "discrete":
        return DiscreteSpectrum(vals, obj.get("matrix", "Laplacian"))
    raise BadParameter(f"unknown spectrum kind {kind!r}")


def _json_default(x):
    # numpy scalars and arrays inside diagnostics
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def dumps_spectrum(sp) -> str:
    return dumps_json(spectrum_to_dict(sp))


def loads_spectrum(text: str):
    return spectrum_from_dict(json.loads(text))


def _multiplicities(values, rtol=1e-9):
    # multiplicity of the cluster each value belongs to
    out, i = [], 0
    while i < len(values):
        j = i + 1
        while j < len(values) and abs(values[j] - values[i]) <= rtol * max(1.0, abs(values[i])):
            j += 1
        out += [j - i] * (j - i)
        i = j
    return out


def spectrum_to_csv(sp) -> str:
    """Metric: index, lambda, sqrt_lambda, multiplicity (from one). Discrete: index, eigenvalue, multiplicity."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    vals = [float(x) for x in sp.eigenvalues]
    mult = _multiplicities(vals)
    if isinstance(sp, MetricSpectrum):
        w.writerow(["index", "lambda", "sqrt_lambda", "multiplicity"])
        for i, (x, m) in enumerate(zip(vals, mult), start=1):
            w.writerow([i, repr(x), repr(math.sqrt(max(x, 0.0))), m])
    else:
        w.writerow(["index", "eigenvalue", "multiplicity"])
        for i, (x, m) in enumerate(zip(vals, mult)):
            w.writerow([i, repr(x), m])
    return buf.getvalue()


def table_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if x is None else (repr(float(x)) if isinstance(x, float) else x) for x in row])
    return buf.getvalue()
