"""Reading and writing graphs, signals, responses and sweeps.

Complex numbers in files are ``[re, im]`` pairs.  Every float written goes
through ``fmt_float`` (17 significant digits) so outputs are byte-stable.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
from pathlib import Path

import numpy as np

from .graphcore import CoinSpec, GraphSpec, GraphSpecError, Port
from .polyalg import ComplexPoly
from .prune import FrequencyVertex, PrunedGraph
from .response import ImpulseResponse, Signal
from .sounding import PhaseSweep


class FormatError(ValueError):
    """Malformed input file; the message carries ``path:line``."""


def fmt_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    if x == 0.0:
        return "0"
    return "%.17g" % x


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _dump([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_dump(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj) or \
                all(isinstance(v, complex) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with fixed float formatting."""
    return _dump(obj, indent, 0) + "\n"


def cpair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _line_of(text: str, tokens) -> int | None:
    """First line mentioning every token; failing that, the last token alone."""
    if isinstance(tokens, str):
        tokens = [tokens]
    needles = [json.dumps(t) for t in dict.fromkeys(tokens)]
    if not needles:
        return None
    lines = text.splitlines()
    for subset in (needles, needles[-1:]):
        for i, line in enumerate(lines, 1):
            if all(n in line for n in subset):
                return i
    return None


def _parse_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise GraphSpecError(f"{where}: expected [re, im], got {v!r}")


def _parse_coin(c: dict, where: str) -> CoinSpec:
    if not isinstance(c, dict) or "kind" not in c:
        raise GraphSpecError(f"{where}: coin must be an object with a 'kind'")
    kind = c["kind"]
    if kind == "reflect":
        return CoinSpec("reflect", _parse_complex(c.get("phase", [1, 0]), where))
    if kind == "custom":
        rows = c.get("matrix")
        if not isinstance(rows, list):
            raise GraphSpecError(f"{where}: custom coin needs 'matrix'")
        m = np.array([[_parse_complex(x, where) for x in row] for row in rows], dtype=complex)
        return CoinSpec("custom", matrix=m)
    return CoinSpec(kind)


def _load_json(path: Path) -> tuple[dict, str]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}:1: top level must be an object")
    return data, text


def graph_from_dict(data: dict, text: str = "", path: str = "<graph>") -> PrunedGraph:
    """Build the graph (and any frequency vertices) from decoded JSON."""

    def fail(msg: str, token: str | None = None):
        line = _line_of(text, token) if token is not None else None
        raise FormatError(f"{path}:{line or 1}: {msg}")

    for key in ("vertices", "edges"):
        if not isinstance(data.get(key), list):
            fail(f"missing or non-array key {key!r}")
    verts = []
    for v in data["vertices"]:
        if not isinstance(v, dict) or "id" not in v:
            fail(f"vertex entry {v!r} needs an 'id'")
        vid = str(v["id"])
        try:
            verts.append((vid, _parse_coin(v.get("coin", {"kind": "grover"}), f"vertex {vid!r}")))
        except GraphSpecError as exc:
            fail(str(exc), vid)
    edges = []
    for e in data["edges"]:
        if not (isinstance(e, list) and len(e) == 2):
            fail(f"edge {e!r} must be a pair of ids")
        edges.append((str(e[0]), str(e[1])))
    ports = []
    for p in data.get("ports", []):
        try:
            ports.append(Port(str(p["name"]), tuple(map(str, p["in"])), tuple(map(str, p["out"]))))
        except (KeyError, TypeError):
            fail(f"port entry {p!r} needs 'name', 'in' and 'out'")
    try:
        spec = GraphSpec(verts, edges, ports)
    except GraphSpecError as exc:
        fail(str(exc), re.findall(r"'([^']*)'", str(exc)) or None)
    fvs = []
    for fv in data.get("frequency_vertices", []):
        try:
            fvs.append(FrequencyVertex(
                str(fv["id"]),
                ComplexPoly([_parse_complex(c, "numerator") for c in fv["numerator"]], trim=None),
                ComplexPoly([_parse_complex(c, "denominator") for c in fv["denominator"]], trim=None),
                int(fv.get("delay", 0))))
        except (KeyError, TypeError, ValueError) as exc:
            fail(f"frequency vertex {fv!r}: {exc}", str(fv.get("id")) if isinstance(fv, dict) else None)
    try:
        return PrunedGraph(spec, fvs)
    except GraphSpecError as exc:
        fail(str(exc), re.findall(r"'([^']*)'", str(exc)) or None)


def load_graph(path: str | Path) -> PrunedGraph:
    data, text = _load_json(Path(path))
    return graph_from_dict(data, text, str(path))


def _coin_dict(c: CoinSpec) -> dict:
    if c.kind == "reflect":
        return {"kind": "reflect", "phase": cpair(c.phase)}
    if c.kind == "custom":
        return {"kind": "custom", "matrix": [[cpair(x) for x in row] for row in c.matrix]}
    return {"kind": c.kind}


def graph_to_dict(graph: GraphSpec | PrunedGraph) -> dict:
    pg = graph if isinstance(graph, PrunedGraph) else PrunedGraph.from_spec(graph)
    spec = pg.base
    out = {
        "vertices": [{"id": v, "coin": _coin_dict(c)} for v, c in spec.vertices],
        "edges": [list(e) for e in spec.edges],
        "ports": [{"name": p.name, "in": list(p.in_state), "out": list(p.out_state)}
                  for p in spec.ports],
    }
    if pg.frequency_vertices:
        out["frequency_vertices"] = [
            {"id": fv.vertex_id,
             "numerator": [cpair(c) for c in fv.numerator.array],
             "denominator": [cpair(c) for c in fv.denominator.array],
             "delay": fv.delay}
            for fv in pg.frequency_vertices]
    return out


def save_graph(graph: GraphSpec | PrunedGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph_to_dict(graph)), encoding="utf-8")


def read_signal(path: str | Path) -> Signal:
    """Signal CSV with header ``n,re,im``; rows must run n = 0, 1, 2, ..."""
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["n", "re", "im"]:
        raise FormatError(f"{path}:1: header must be 'n,re,im'")
    vals = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            n, re_, im = int(row[0]), float(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise FormatError(f"{path}:{lineno}: malformed row {','.join(row)!r}") from None
        if n != len(vals):
            raise FormatError(f"{path}:{lineno}: expected index {len(vals)}, got {n}")
        vals.append(complex(re_, im))
    return Signal(np.array(vals, dtype=complex), "file")


def signal_csv(sig: Signal | np.ndarray) -> str:
    xs = sig.samples if isinstance(sig, Signal) else np.asarray(sig, dtype=complex)
    lines = ["n,re,im"] + [f"{n},{fmt_float(x.real)},{fmt_float(x.imag)}" for n, x in enumerate(xs)]
    return "\n".join(lines) + "\n"


def impulse_dict(h: ImpulseResponse) -> dict:
    out = {"s": h.s, "omega0": None if h.omega0 is None else cpair(h.omega0),
           "modes": [{"omega": cpair(om), "eta": cpair(eta)} for om, eta in h.modes],
           "sequence": [cpair(x) for x in h.sequence],
           "delay": h.delay, "method": h.method}
    if h.alias_bound is not None:
        out["alias_bound"] = h.alias_bound
    return out


def sweep_csv(sweep: PhaseSweep) -> str:
    lines = ["theta,re,im,phase_unwrapped"]
    for t, v, p in zip(sweep.thetas, sweep.values, sweep.unwrapped_phase):
        lines.append(f"{fmt_float(t)},{fmt_float(v.real)},{fmt_float(v.imag)},{fmt_float(p)}")
    return "\n".join(lines) + "\n"
