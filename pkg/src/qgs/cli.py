"""Command-line entry point: ``qgs <command> GRAPH [options]``.

GRAPH is a JSON file or the name of a shipped example (bolo, star, complete,
valve, valve_pi3, square, pruned_tree, reflector, star_3_1, bolo_chain).

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .graphcore import GraphSpecError, validate_partial_isometry
from .io import (
    FormatError,
    cpair,
    dumps,
    graph_to_dict,
    impulse_dict,
    load_graph,
    read_signal,
    save_graph,
    signal_csv,
    sweep_csv,
)
from .polyalg import PolyError
from .prune import PrunedGraph, prune, pruned_decompose, pruned_resolvent, verify_prune_equivalence
from .response import (
    ImpulseResponse,
    Signal,
    convolve,
    impulse_closed_form,
    impulse_dft,
    simulate_oracle,
)
from .scatter import NumericalError, ScatterFunction, check_reciprocal
from .sounding import (
    argument_principle_winding,
    dimension_lower_bound,
    estimate_complete_size,
    find_resonances,
    phase_sweep,
    star_fraction,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

_COMPLEX_RE = re.compile(
    r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"(?:\s*([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*[ij])?\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a-bi``, ``a``, ``bi`` or ``i`` (``j`` also accepted)."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?[ij]", t)
    if m and t:
        mag = m.group(1)
        if mag in (None, "+", "-"):
            mag = (mag or "") + "1"
        return complex(0.0, float(mag))
    m = _COMPLEX_RE.match(t)
    if not m or not t:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")
    re_part = float(m.group(1)) if m.group(1) else 0.0
    im = 0.0
    if m.group(2):
        im = float(m.group(3)) if m.group(3) else 1.0
        im = -im if m.group(2) == "-" else im
    return complex(re_part, im)


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def resolve_graph(name: str) -> PrunedGraph:
    path = Path(name)
    if not path.exists() and name in catalog.BUILTIN_FILES:
        path = catalog.graph_path(name)
    return load_graph(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _pair(args, pg: PrunedGraph) -> tuple[str, str]:
    names = pg.base.port_names
    if not names:
        raise GraphSpecError("graph declares no ports")
    if getattr(args, "pair", None):
        j, k = args.pair
    else:
        j = k = args.port if args.port else names[0]
    for p in (j, k):
        if p not in names:
            raise GraphSpecError(f"unknown port {p!r}; graph has {names}")
    return j, k


def _poly(p) -> list:
    return [cpair(c) for c in p.array]


def _decomposition_dict(dec, names) -> dict:
    j, k = dec.pair
    return {
        "in": names[j], "out": names[k],
        "f_full": _poly(dec.f_full), "g_full": _poly(dec.g_full),
        "b": _poly(dec.b), "scale": cpair(dec.scale),
        "f_red": _poly(dec.f_red), "g_red": _poly(dec.g_red),
        "s": dec.s, "g0": cpair(dec.g0), "d": dec.d,
        "eta": [cpair(e) for e in dec.etas.roots],
    }


def cmd_scatter(args) -> int:
    pg = resolve_graph(args.graph)
    names = pg.base.port_names
    if args.all_pairs:
        pairs = [(j, k) for j in names for k in names]
    else:
        pairs = [_pair(args, pg)]
    decs = [pruned_decompose(pg, j, k) for j, k in pairs]
    if args.format == "csv":
        K = args.grid
        th = 2 * np.pi * np.arange(K) / K
        z = np.exp(1j * th)
        cols = [ScatterFunction(d, d.pair, args.delay)(z) for d in decs]
        head = "theta," + ",".join(f"re_{j}_{k},im_{j}_{k}" for j, k in pairs)
        lines = [head] + [
            ",".join(["%.17g" % t] + ["%.17g,%.17g" % (c[i].real, c[i].imag) for c in cols])
            for i, t in enumerate(th)]
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    result = {"ports": list(names), "delay": args.delay,
              "pairs": [_decomposition_dict(d, names) for d in decs]}
    if args.eval:
        evals = []
        idx = {n: i for i, n in enumerate(names)}
        for z in args.eval:
            S = pruned_resolvent(pg, z) * z ** args.delay
            entry = {"z": cpair(z)}
            if args.all_pairs:
                entry["matrix"] = [[cpair(S[idx[k], idx[j]]) for j in names] for k in names]
            else:
                j, k = pairs[0]
                entry["S"] = cpair(S[idx[k], idx[j]])
            evals.append(entry)
        result["eval"] = evals
    _emit(dumps(result), args.out)
    return EXIT_OK


def _impulse_for(pg, j, k, args):
    dec = pruned_decompose(pg, j, k)
    method = args.method
    if method == "closed" and j != k:
        raise GraphSpecError("the closed form needs a single runway (in and out port equal)")
    if method == "closed":
        return impulse_closed_form(dec, args.n, args.delay, args.grid)
    if method == "dft":
        return impulse_dft(ScatterFunction(dec, dec.pair, args.delay), args.grid, args.n)
    raise GraphSpecError(f"unknown method {method!r}")


def cmd_impulse(args) -> int:
    pg = resolve_graph(args.graph)
    j, k = _pair(args, pg)
    if args.method == "oracle":
        if pg.frequency_vertices:
            raise GraphSpecError("the step simulation needs a graph without frequency vertices")
        y = simulate_oracle(pg.base, j, args.n + 1, out_port=k, delay=args.delay,
                            runway_len=args.runway)
        h = ImpulseResponse(y.samples, delay=args.delay, method="oracle")
    else:
        h = _impulse_for(pg, j, k, args)
    if args.format == "csv":
        _emit(signal_csv(h.sequence), args.out)
    else:
        d = impulse_dict(h)
        d.update({"in": j, "out": k})
        _emit(dumps(d), args.out)
    return EXIT_OK


def _input_signal(args) -> Signal:
    if args.signal:
        return read_signal(args.signal)
    if args.mono is not None:
        return Signal.monochromatic(args.mono, args.length)
    return Signal.delta(args.length)


def cmd_respond(args) -> int:
    pg = resolve_graph(args.graph)
    j, k = _pair(args, pg)
    x = _input_signal(args)
    n = max(len(x) - 1, 0)
    args.n = n
    grid = max(args.grid, 4 * max(n, 1))
    dec = pruned_decompose(pg, j, k)
    h = impulse_dft(ScatterFunction(dec, dec.pair, args.delay), grid, n)
    _emit(signal_csv(convolve(x, h)), args.out)
    return EXIT_OK


def cmd_sound(args) -> int:
    pg = resolve_graph(args.graph)
    j, k = _pair(args, pg)
    if j != k:
        raise GraphSpecError("sounding needs a single runway (in and out port equal)")
    dec = pruned_decompose(pg, j, k)
    S = ScatterFunction(dec, dec.pair, args.delay)
    sweep = phase_sweep(S, args.grid, auto=args.auto)
    res = find_resonances(sweep, args.threshold, args.factor)
    U, _ = pg.operator()
    summary = {
        "port": j, "grid": sweep.K, "delay": args.delay,
        "winding": sweep.winding,
        "winding_argument_principle": argument_principle_winding(S),
        "dimension_lower_bound": dimension_lower_bound(sweep),
        "edge_states": U.dim,
        "resonances": [{"center": r.center, "width": r.width,
                        "eta_estimate": cpair(r.eta_estimate), "peak_slope": r.peak_slope}
                       for r in res],
    }
    if args.infer == "star":
        summary["star_fraction"] = [star_fraction(r.center) for r in res]
    elif args.infer == "complete":
        R_sweep = phase_sweep(S.delayed(args.delay + 2), sweep.K)
        summary["complete_size"] = estimate_complete_size(R_sweep)
    if args.sweep_out:
        Path(args.sweep_out).write_text(sweep_csv(sweep), encoding="utf-8")
    if args.format == "csv":
        _emit(sweep_csv(sweep), args.out)
    else:
        _emit(dumps(summary), args.out)
    return EXIT_OK


def cmd_prune(args) -> int:
    pg = resolve_graph(args.graph)
    out = prune(pg, tuple(args.cut), delay=args.delay)
    if args.out:
        save_graph(out, args.out)
    else:
        sys.stdout.write(dumps(graph_to_dict(out)))
    return EXIT_OK


def cmd_verify(args) -> int:
    full = resolve_graph(args.graph)
    other = resolve_graph(args.against)
    rep = verify_prune_equivalence(full, other, args.grid, args.tol)
    _emit(dumps(rep.as_dict()), args.out)
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def cmd_simulate(args) -> int:
    pg = resolve_graph(args.graph)
    if pg.frequency_vertices:
        raise GraphSpecError("the step simulation needs a graph without frequency vertices")
    j, k = _pair(args, pg)
    x = _input_signal(args) if (args.signal or args.mono is not None) else None
    steps = args.steps if args.steps is not None else args.n + 1
    y = simulate_oracle(pg.base, j, steps, runway_len=args.runway, out_port=k,
                        signal=x, delay=args.delay)
    _emit(signal_csv(y), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    pg = resolve_graph(args.graph)
    U, _ = pg.operator()
    rep = validate_partial_isometry(U, tol=args.tol) if not pg.frequency_vertices else None
    out = {"edge_states": U.dim, "ports": list(U.port_names),
           "frequency_vertices": [fv.vertex_id for fv in pg.frequency_vertices]}
    ok = True
    if rep is not None:
        out["isometry"] = rep.as_dict()
        ok = rep.passed
        names = U.port_names
        if len(names) >= 1:
            recs = []
            for n in names:
                dec = pruned_decompose(pg, n, n)
                r = check_reciprocal(dec, args.tol * 100)
                recs.append({"port": n, "max_deviation": r.max_deviation, "passed": r.passed})
            out["reciprocal"] = recs
    out["valid"] = ok
    _emit(dumps(out), args.out)
    return EXIT_OK if ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgs", description="Scattering on quantum-walk graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pair=True):
        p.add_argument("graph", help="graph JSON file or shipped example name")
        if pair:
            p.add_argument("--port", help="port name (in and out)")
            p.add_argument("--pair", nargs=2, metavar=("J", "K"), help="in-port J, out-port K")
        p.add_argument("--grid", type=_positive_int, default=4096, help="circle grid size")
        p.add_argument("--n", type=_nonneg_int, default=64, help="response horizon")
        p.add_argument("--tol", type=_positive_float, default=1e-8)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--delay", type=_nonneg_int, default=0,
                       help="multiply S by z**delay before use")

    def signal_opts(p):
        p.add_argument("--signal", help="input signal CSV (n,re,im)")
        p.add_argument("--mono", type=parse_complex, help="monochromatic input lam**n")
        p.add_argument("--length", type=_positive_int, default=64, help="generated signal length")

    p = sub.add_parser("scatter", help="characteristic decomposition and S values")
    common(p)
    p.add_argument("--all-pairs", action="store_true")
    p.add_argument("--eval", type=parse_complex, action="append", metavar="Z")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("impulse", help="impulse response h[n]")
    common(p)
    p.add_argument("--method", choices=("closed", "dft", "oracle"), default="closed")
    p.add_argument("--runway", type=_positive_int)
    p.set_defaults(func=cmd_impulse)

    p = sub.add_parser("respond", help="output signal y = x * h")
    common(p)
    signal_opts(p)
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("sound", help="phase sweep, winding and resonances")
    common(p)
    p.add_argument("--auto", action="store_true", help="refine the grid until the winding settles")
    p.add_argument("--threshold", type=_positive_float, help="absolute slope threshold")
    p.add_argument("--factor", type=_positive_float, default=10.0,
                   help="threshold as a multiple of the median slope")
    p.add_argument("--infer", choices=("star", "complete"))
    p.add_argument("--sweep-out", help="also write the sweep CSV here")
    p.set_defaults(func=cmd_sound)

    p = sub.add_parser("prune", help="replace a subgraph by a frequency vertex")
    common(p, pair=False)
    p.add_argument("--cut", nargs=2, required=True, metavar=("OUTER", "ROOT"))
    p.set_defaults(func=cmd_prune, delay=2)

    p = sub.add_parser("verify", help="compare S of two graphs on the circle")
    common(p, pair=False)
    p.add_argument("against", help="second graph (e.g. the pruned one)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="step the graph with truncated runways")
    common(p)
    signal_opts(p)
    p.add_argument("--steps", type=_positive_int)
    p.add_argument("--runway", type=_positive_int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="structural and unitarity checks")
    common(p, pair=False)
    p.set_defaults(func=cmd_validate)
    return parser


def _thread_limit():
    val = os.environ.get("QGS_THREADS")
    if not val:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(1, int(val)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except (FormatError, GraphSpecError, PolyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
