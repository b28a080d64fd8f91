"""Builders for the worked example graphs shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .graphcore import CoinSpec, GraphSpec, Port

GROVER = CoinSpec("grover")


def reflect(phase: complex = 1.0) -> CoinSpec:
    return CoinSpec("reflect", complex(phase))


def bolo() -> GraphSpec:
    """One pendant vertex A and a self-loop at B; the runway attaches at 0."""
    return GraphSpec(
        vertices=[("0", reflect(1)), ("A", reflect(-1)), ("B", GROVER)],
        edges=[("0", "B"), ("A", "B"), ("B", "B")],
        ports=[Port("p", ("0", "B"), ("B", "0"))],
    )


def reflector(r: complex = -1.0) -> GraphSpec:
    """A single reflecting vertex behind one edge: S(z) = r / z**2."""
    return GraphSpec(
        vertices=[("0", reflect(1)), ("v", reflect(r))],
        edges=[("0", "v")],
        ports=[Port("p", ("0", "v"), ("v", "0"))],
    )


def _reflection_coin(weights) -> CoinSpec:
    v = np.asarray(weights, dtype=float)
    v = v / np.linalg.norm(v)
    return CoinSpec("custom", matrix=2.0 * np.outer(v, v) - np.eye(v.size))


def star(N: int, M: int, reduced: bool = True) -> GraphSpec:
    """Diffusive centre c with N leaves, M of which flip the phase.

    The reduced form keeps only the symmetric combination of each leaf type,
    carried by the single vertices ``a`` (flipping) and ``b`` (plain).
    """
    if not 0 <= M <= N:
        raise ValueError("need 0 <= M <= N")
    if reduced:
        return GraphSpec(
            vertices=[("0", reflect(1)), ("a", reflect(-1)), ("b", reflect(1)),
                      ("c", _reflection_coin([1.0, np.sqrt(M), np.sqrt(N - M)]))],
            edges=[("0", "c"), ("c", "a"), ("c", "b")],
            ports=[Port("p", ("0", "c"), ("c", "0"))],
        )
    verts = [("0", reflect(1)), ("c", GROVER)]
    edges = [("0", "c")]
    for i in range(M):
        verts.append((f"a{i}", reflect(-1)))
        edges.append(("c", f"a{i}"))
    for i in range(N - M):
        verts.append((f"b{i}", reflect(1)))
        edges.append(("c", f"b{i}"))
    return GraphSpec(verts, edges, [Port("p", ("0", "c"), ("c", "0"))])


def complete(N: int, reduced: bool = True) -> GraphSpec:
    """Complete graph on A0..AN with A0 also joined to the runway vertex 0.

    In the reduced form X stands for the symmetric state on A1..AN; the
    edges among them collapse to a self-loop at X.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if reduced:
        a, b = (N - 1) / (N + 1), 2 * np.sqrt(N) / (N + 1)
        p, q = 1 - 2 / N, 2 * np.sqrt(N - 1) / N
        return GraphSpec(
            vertices=[("0", reflect(1)),
                      ("A0", CoinSpec("custom", matrix=np.array([[-a, b], [b, a]]))),
                      ("X", CoinSpec("custom", matrix=np.array([[-p, q], [q, p]])))],
            edges=[("0", "A0"), ("A0", "X"), ("X", "X")],
            ports=[Port("p", ("0", "A0"), ("A0", "0"))],
        )
    names = [f"A{i}" for i in range(N + 1)]
    verts = [("0", reflect(1))] + [(v, GROVER) for v in names]
    edges = [("0", "A0")] + [(names[i], names[k]) for i in range(N + 1) for k in range(i + 1, N + 1)]
    return GraphSpec(verts, edges, [Port("p", ("0", "A0"), ("A0", "0"))])


def valve(c: complex = 1.0) -> GraphSpec:
    """Diffusive vertex D between runway vertices A, B and a reflector C."""
    return GraphSpec(
        vertices=[("A", reflect(1)), ("B", reflect(1)), ("C", reflect(c)), ("D", GROVER)],
        edges=[("A", "D"), ("B", "D"), ("C", "D")],
        ports=[Port("1", ("A", "D"), ("D", "A")), Port("2", ("B", "D"), ("D", "B"))],
    )


def square_junction() -> GraphSpec:
    """Four diffusive corners on a square, each with its own runway."""
    corners = "ABCD"
    verts = [(v.lower(), reflect(1)) for v in corners] + [(v, GROVER) for v in corners]
    edges = [(v.lower(), v) for v in corners] + [
        ("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")]
    ports = [Port(str(i + 1), (v.lower(), v), (v, v.lower())) for i, v in enumerate(corners)]
    return GraphSpec(verts, edges, ports)


def pruned_tree() -> GraphSpec:
    """Two-level tree: A branches to B and C, C branches to D and E."""
    return GraphSpec(
        vertices=[("0", reflect(1)), ("A", GROVER), ("B", reflect(1)), ("C", GROVER),
                  ("D", reflect(1)), ("E", reflect(-1))],
        edges=[("0", "A"), ("A", "B"), ("A", "C"), ("C", "D"), ("C", "E")],
        ports=[Port("p", ("0", "A"), ("A", "0"))],
    )


def bolo_chain() -> GraphSpec:
    """Three looped vertices in series ending in a phase flip: 0 - B0 - B1 - B2 - A.

    Pruning at (B1, B2) and then at (B0, B1) exercises a subgraph that
    itself contains a frequency vertex.
    """
    loops = ["B0", "B1", "B2"]
    edges = [("0", "B0"), ("B0", "B1"), ("B1", "B2"), ("B2", "A")] + [(b, b) for b in loops]
    return GraphSpec(
        vertices=[("0", reflect(1)), ("A", reflect(-1))] + [(b, GROVER) for b in loops],
        edges=edges,
        ports=[Port("p", ("0", "B0"), ("B0", "0"))],
    )


BUILTIN_FILES = {
    "bolo": "bolo.json",
    "star": "star_N100_M40.json",
    "star_3_1": "star_N3_M1.json",
    "complete": "complete_N10.json",
    "valve": "valve.json",
    "valve_pi3": "valve_c_pi3.json",
    "square": "square.json",
    "pruned_tree": "pruned_tree.json",
    "reflector": "reflector.json",
    "bolo_chain": "bolo_chain.json",
}


def graph_path(name: str) -> Path:
    """Filesystem path of a shipped example graph file."""
    fname = BUILTIN_FILES.get(name, name)
    return Path(str(resources.files("qgs") / "graphs" / fname))


def builtin_specs() -> dict[str, GraphSpec]:
    return {
        "bolo": bolo(),
        "star": star(100, 40),
        "star_3_1": star(3, 1),
        "complete": complete(10),
        "valve": valve(1.0),
        "valve_pi3": valve(np.exp(1j * np.pi / 3)),
        "square": square_junction(),
        "pruned_tree": pruned_tree(),
        "reflector": reflector(-1.0),
        "bolo_chain": bolo_chain(),
    }
