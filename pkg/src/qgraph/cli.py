"""Command-line interface.

Exit codes: 0 when everything holds, 1 when a bound is violated or a
verification criterion fails, 2 when the eigenvalue scan is incomplete and
3 for invalid input or usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import generators as G
from . import io as qio
from .bounds import CombinatorialSpectra, catalog_by_id, evaluate, evaluate_all, invariants, reports_to_csv, \
    reports_to_json, violations
from .errors import GraphError, MissingInput, ScanIncomplete
from .graph_core import (CombinatorialGraph, DiscreteSpectrum, betti_number as graph_betti, edge_connectivity,
                         laplacian_spectrum, normalized_spectrum)
from .metric_graph import (MetricGraph, betti_number, bridges, discrete_edge_connectivity, longest_edge,
                           metric_edge_connectivity, shortest_edge, validate)
from .p_laplacian import discrete_gamma1_p, metric_mu1_p_upper
from .spectral_solver import MetricSpectrum, eigenvalues
from .surgery import SURGERY_KINDS, SurgeryOp, apply_script
from .verify import DEFAULT_SEED, GROUPS, exit_code, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_INCOMPLETE, EXIT_INPUT = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    tol: Optional[float] = None
    grid: Optional[float] = None
    tau: float = 1e-7
    out: Optional[str] = None
    format: str = "json"


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# generate


_ALIASES = {"L₀": "L0", "ε": "eps", "η": "eta", "ℓ": "l"}


def _number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return qio.parse_length(text)


def _value(text: str):
    """Parse a parameter value: number, pi expression, comma list or boolean."""
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        return [_number(t) for t in text.split(",") if t.strip()]
    try:
        return _number(text)
    except Exception:
        return text


def _split_params(params):
    positional, named = [], {}
    for item in params:
        if "=" in item:
            key, val = item.split("=", 1)
            named[_ALIASES.get(key.strip(), key.strip())] = _value(val)
        else:
            positional.append(_value(item))
    return positional, named


def _as_list(x):
    return list(x) if isinstance(x, list) else [x]


def _pumpkin(args, kw):
    vals = args or _as_list(kw.get("lengths", kw.get("n", 2)))
    if len(vals) == 1 and isinstance(vals[0], list):
        vals = vals[0]
    if len(vals) == 1 and isinstance(vals[0], int):
        return G.pumpkin(vals[0])
    return G.pumpkin(vals)


def _necklace(args, kw):
    cells = kw.get("cells", args[0] if args else 1)
    ends = (float(kw.get("first", 0.0)), float(kw.get("last", 0.0)))
    return G.symmetric_necklace(cells if isinstance(cells, (int, list)) else [cells], ends)


def _stower(args, kw):
    return G.stower(_as_list(kw.get("loops", [])), _as_list(kw.get("star", [])))


# name -> (parameter names with defaults, builder); a builder given the
# string "*" takes the positional arguments as one list
FAMILIES = {
    "path": ((("V", None),), lambda V: G.path(V)),
    "cycle-graph": ((("n", None),), lambda n: G.cycle_graph(n)),
    "complete": ((("n", None),), lambda n: G.complete(n)),
    "complete-bipartite": ((("n", None), ("m", None)), lambda n, m: G.complete_bipartite(n, m)),
    "star": ((("n", None),), lambda n: G.star(n)),
    "wheel": ((("n", None),), lambda n: G.wheel(n)),
    "hypercube": ((("d", None),), lambda d: G.hypercube(d)),
    "petersen": ((), lambda: G.petersen()),
    "discrete-pumpkin-chain": ("*", lambda counts: G.discrete_pumpkin_chain(counts)),
    "interval": ((("L", 1.0), ("bc", "NN")), lambda L, bc: G.interval(L, str(bc))),
    "circle": ((("L", 2 * math.pi),), lambda L: G.cycle(L)),
    "metric-star": ("*", lambda lengths: G.metric_star(lengths)),
    "pumpkin": ("raw", _pumpkin),
    "pumpkin-chain": ((("eta", None), ("pumpkins", None), ("L", 1.0)),
                      lambda eta, pumpkins, L: G.regular_pumpkin_chain(eta, pumpkins, L)),
    "flower": ("*", lambda lengths: G.flower(lengths)),
    "stower": ("raw", _stower),
    "lollipop": ((("L0", 1.0), ("eps", 1e-3)), lambda L0, eps: G.lollipop(L0, eps)),
    "dumbbell": ((("k", 3), ("handle", 0.2), ("L", 1.0)), lambda k, handle, L: G.pumpkin_dumbbell(k, handle, L)),
    "necklace": ("raw", _necklace),
}


def build_family(family: str, params) -> object:
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    names, builder = FAMILIES[family]
    args, kw = _split_params(params)
    if names == "*":
        if len(args) == 1 and isinstance(args[0], list):
            args = args[0]
        return builder(args or _as_list(kw.get("lengths", kw.get("counts", []))))
    if names == "raw":
        return builder(args, kw)
    values = {}
    for i, (name, default) in enumerate(names):
        if name in kw:
            values[name] = kw.pop(name)
        elif i < len(args):
            values[name] = args[i]
        elif default is not None:
            values[name] = default
        else:
            raise InputError(f"{family} needs parameter {name}")
    if len(args) > len(names) or kw:
        raise InputError(f"unexpected parameters for {family}: {args[len(names):] or sorted(kw)}")
    return builder(**values)


# ---------------------------------------------------------------------------
# sweep templates


def _lollipop_template(eps):
    return G.lollipop(1.0 - eps, eps)


def _pumpkin_chain_template(m):
    return G.regular_pumpkin_chain(3, int(m), 1.0)


def _dumbbell_template(h):
    return G.pumpkin_dumbbell(3, h, 1.0)


# name -> (builder, bound ids reported as columns)
TEMPLATES = {
    "lollipop": (_lollipop_template, ("B23L", "B23U")),
    "pumpkin-chain": (_pumpkin_chain_template, ("B6", "B7", "B8")),
    "dumbbell": (_dumbbell_template, ("B4", "B7h")),
}


def sweep_rows(template: str, values, n: int, cfg: RunConfig):
    if template not in TEMPLATES:
        raise InputError(f"unknown template {template!r}; choose from {', '.join(sorted(TEMPLATES))}")
    build, ids = TEMPLATES[template]
    specs = catalog_by_id()
    header = ["param"] + [f"lambda_{k}" for k in range(1, n + 1)]
    for bid in ids:
        header += [f"{bid}[{k}]" for k in range(max(specs[bid].k_min, 1), n + 1)] if specs[bid].indexed else [bid]
    rows = []
    for x in values:
        mg = build(x)
        sp = eigenvalues(mg, n, grid=cfg.grid, tau=cfg.tau)
        inv = invariants(mg)
        row = [x] + list(sp.eigenvalues)
        for bid in ids:
            spec = specs[bid]
            ks = range(max(spec.k_min, 1), n + 1) if spec.indexed else [None]
            for k in ks:
                r = evaluate(spec, inv, sp, k)
                row.append(r.bound if r.applicable else None)
        rows.append(row)
    return header, rows


# ---------------------------------------------------------------------------
# output helpers


def _emit(cfg: RunConfig, text: str, stem: str, ext: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    target = Path(cfg.out)
    if target.is_dir():
        target = target / f"{stem}.{ext}"
    target.write_text(text)


def _load(path):
    try:
        return qio.load_graph(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph {path}: {exc}") from None


def _check_metric(g):
    if isinstance(g, MetricGraph):
        problems = validate(g)
        if problems:
            raise InputError(f"invalid metric graph: {problems[0]}")


# ---------------------------------------------------------------------------
# commands


def cmd_generate(ns, cfg):
    g = build_family(ns.family, ns.params)
    _emit(cfg, qio.dumps_graph(g), ns.family, "json")
    return EXIT_OK


def _spectrum_of(g, n, matrix, cfg):
    if isinstance(g, MetricGraph):
        _check_metric(g)
        return eigenvalues(g, n or 10, grid=cfg.grid, tau=cfg.tau)
    sp = normalized_spectrum(g) if matrix == "normalized" else laplacian_spectrum(g)
    return DiscreteSpectrum(sp.eigenvalues[:n] if n else sp.eigenvalues, sp.matrix_kind)


def cmd_spectrum(ns, cfg):
    g = _load(ns.graph)
    sp = _spectrum_of(g, ns.n, ns.matrix, cfg)
    record = qio.spectrum_to_dict(sp)
    record["graph"] = qio.graph_to_dict(g)
    if cfg.out is not None and Path(cfg.out).is_dir():
        _emit(cfg, qio.dumps_json(record), "spectrum", "json")
        _emit(cfg, qio.spectrum_to_csv(sp), "spectrum", "csv")
    elif cfg.format == "csv":
        _emit(cfg, qio.spectrum_to_csv(sp), "spectrum", "csv")
    else:
        _emit(cfg, qio.dumps_json(record), "spectrum", "json")
    return EXIT_OK


def _spectrum_for_bounds(g, path):
    obj = json.loads(Path(path).read_text())
    if "graph" in obj and qio.graph_from_dict(obj["graph"]) != g:
        raise InputError("the spectrum file was computed for a different graph")
    sp = qio.spectrum_from_dict(obj)
    if isinstance(g, MetricGraph):
        if not isinstance(sp, MetricSpectrum):
            raise InputError("a metric graph needs a metric spectrum")
        return sp
    if not isinstance(sp, DiscreteSpectrum) or len(sp) != g.V:
        raise InputError("a combinatorial graph needs its full discrete spectrum")
    both = CombinatorialSpectra.of(g)
    if sp.matrix_kind == "normalized":
        return CombinatorialSpectra(both.laplacian, sp)
    return CombinatorialSpectra(sp, both.normalized)


def cmd_bounds(ns, cfg):
    g = _load(ns.graph)
    _check_metric(g)
    spectrum = _spectrum_for_bounds(g, ns.spectrum) if ns.spectrum else None
    if spectrum is None and isinstance(g, MetricGraph):
        spectrum = eigenvalues(g, ns.k, grid=cfg.grid, tau=cfg.tau)
    p_values = {}
    if ns.p != 2.0:
        if ns.p_value is None:
            raise InputError("--p other than 2 needs --p-value")
        target = "gamma1_p" if isinstance(g, CombinatorialGraph) else ("mu1_p" if not g.dirichlet else "lambda1_p")
        p_values[target] = ns.p_value
    reports = evaluate_all(g, spectrum, k_max=ns.k, p=ns.p, p_values=p_values, tol=cfg.tol)
    if cfg.format == "csv":
        _emit(cfg, reports_to_csv(reports), "bounds", "csv")
    else:
        _emit(cfg, reports_to_json(reports) + "\n", "bounds", "json")
    return EXIT_VIOLATION if violations(reports) else EXIT_OK


def cmd_connectivity(ns, cfg):
    g = _load(ns.graph)
    if isinstance(g, MetricGraph):
        _check_metric(g)
        info = {"kind": "metric", "discrete_edge_connectivity": discrete_edge_connectivity(g),
                "metric_edge_connectivity": metric_edge_connectivity(g), "bridges": bridges(g),
                "betti_number": betti_number(g), "total_length": g.L,
                "longest_edge": longest_edge(g), "shortest_edge": shortest_edge(g)}
    else:
        info = {"kind": "combinatorial", "edge_connectivity": edge_connectivity(g),
                "betti_number": graph_betti(g), "simple": g.is_simple()}
    _emit(cfg, qio.dumps_json(info), "connectivity", "json")
    return EXIT_OK


def cmd_plap(ns, cfg):
    g = _load(ns.graph)
    seed = cfg.seed
    if isinstance(g, MetricGraph):
        _check_metric(g)
        res = metric_mu1_p_upper(g, ns.p, mesh_n=ns.mesh, restarts=ns.restarts, seed=seed)
        info = {"kind": "metric", "p": ns.p, "value": res.value, "mesh_n": res.mesh_n,
                "gradient_norm": res.gradient_norm}
    else:
        res = discrete_gamma1_p(g, ns.p, restarts=ns.restarts, seed=seed, strict=False)
        info = {"kind": "combinatorial", "p": ns.p, "value": res.value, "minimizer": list(res.minimizer),
                "gradient_norm": res.gradient_norm, "residual": res.residual,
                "converged_restarts": res.converged_restarts, "restarts": res.restarts}
    _emit(cfg, qio.dumps_json(info), "plap", "json")
    return EXIT_OK


def _parse_op(text: str) -> SurgeryOp:
    kind, *params = text.split()
    _, named = _split_params(params)
    if "edges" in named:
        named["edges"] = _as_list(named["edges"])
    return SurgeryOp(kind, named)


def cmd_surgery(ns, cfg):
    g = _load(ns.graph)
    ops = []
    if ns.script:
        ops += [SurgeryOp(d["kind"], d.get("params", {})) for d in json.loads(Path(ns.script).read_text())]
    ops += [_parse_op(t) for t in ns.op or []]
    if not ops:
        raise InputError(f"no operations given; known kinds: {', '.join(SURGERY_KINDS)}")
    _emit(cfg, qio.dumps_graph(apply_script(g, ops)), "surgery", "json")
    return EXIT_OK


def cmd_sweep(ns, cfg):
    header, rows = sweep_rows(ns.template, [_number(v) for v in ns.values], ns.n, cfg)
    _emit(cfg, qio.table_to_csv(header, rows), f"sweep_{ns.template}", "csv")
    return EXIT_OK


def cmd_verify(ns, cfg):
    def progress(res):
        print(res.line(), flush=True)
        for d in res.details[:5]:
            print(f"      {d}", flush=True)

    try:
        results = run_suite(cfg.seed, ns.only, progress=progress)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed (seed {cfg.seed})")
    if cfg.out is not None:
        _emit(cfg, qio.dumps_json({"seed": cfg.seed, "results": [asdict(r) for r in results]}), "verify", "json")
    return exit_code(results)


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="bound tolerance override")
    common.add_argument("--grid", type=float, default=argparse.SUPPRESS, help="wavenumber scan step")
    common.add_argument("--tau", type=float, default=argparse.SUPPRESS, help="singular value threshold")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")

    parser = _Parser(prog="qgraph", description="Spectral bounds for combinatorial and metric graphs.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="write a graph from a named family")
    p.add_argument("family", help=", ".join(sorted(FAMILIES)))
    p.add_argument("params", nargs="*", help="positional values or name=value pairs")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a graph file")
    p.add_argument("graph")
    p.add_argument("-n", type=int, help="number of eigenvalues (default 10 for metric graphs, all otherwise)")
    p.add_argument("--matrix", choices=("laplacian", "normalized"), default="laplacian")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bounds", parents=[common], help="evaluate every applicable bound")
    p.add_argument("graph")
    p.add_argument("--spectrum", help="precomputed spectrum file")
    p.add_argument("-k", type=int, default=20, help="largest eigenvalue index")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--p-value", type=float, help="p-eigenvalue to test when p != 2")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("connectivity", parents=[common], help="edge connectivity and related counts")
    p.add_argument("graph")
    p.set_defaults(func=cmd_connectivity)

    p = sub.add_parser("plap", parents=[common], help="first nontrivial p-Laplacian eigenvalue")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--mesh", type=int, default=32, help="elements per edge (metric graphs)")
    p.set_defaults(func=cmd_plap)

    p = sub.add_parser("surgery", parents=[common], help="apply surgery operations")
    p.add_argument("graph")
    p.add_argument("--script", help="JSON list of {kind, params}")
    p.add_argument("--op", action="append", help='e.g. "CutEdge edge=0 x=0.5" (repeatable)')
    p.set_defaults(func=cmd_surgery)

    p = sub.add_parser("sweep", parents=[common], help="eigenvalues and bounds along a one-parameter family")
    p.add_argument("template", choices=sorted(TEMPLATES))
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("-n", type=int, default=6)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", nargs="+", help=f"criterion numbers or groups ({', '.join(GROUPS)})")
    p.set_defaults(func=cmd_verify)
    return parser


def config_from(ns) -> RunConfig:
    return RunConfig(seed=getattr(ns, "seed", DEFAULT_SEED), tol=getattr(ns, "tol", None),
                     grid=getattr(ns, "grid", None), tau=getattr(ns, "tau", 1e-7),
                     out=getattr(ns, "out", None), format=getattr(ns, "format", "json"))


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from(ns)
    try:
        return ns.func(ns, cfg)
    except ScanIncomplete as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except (InputError, GraphError, MissingInput, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
