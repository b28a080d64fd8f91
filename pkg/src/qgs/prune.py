"""Replacing a subgraph by one vertex that reflects with r(z).

A pruned graph is an ordinary graph in which some degree-1 vertices carry a
frequency-dependent reflection ``r(z) = z**delay * num(z) / den(z)`` instead
of a constant phase.  Scattering is evaluated pointwise: substitute r(z),
then apply the resolvent at that z.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graphcore import CoinSpec, GraphSpec, GraphSpecError, Port, TimeStepOperator, assemble_U0
from .polyalg import ComplexPoly, poly_eval, poly_roots
from .scatter import (
    CharDecomposition,
    PoleError,
    SingularError,
    decompose_sampled,
    resolvent_scatter,
)

POLE_TOL = 1e-12
PLACEHOLDER = CoinSpec("reflect", 1.0)


@dataclass(frozen=True)
class FrequencyVertex:
    vertex_id: str
    numerator: ComplexPoly
    denominator: ComplexPoly
    delay: int = 0

    def __post_init__(self):
        if self.denominator.is_zero:
            raise ValueError("denominator of r(z) is identically zero")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")

    def rational(self) -> tuple[ComplexPoly, ComplexPoly]:
        """``z**delay * num / den`` with powers of z cancelled and den monic."""
        num = self.numerator.shift(self.delay) if not self.numerator.is_zero else self.numerator
        den = self.denominator
        cut = min(num.trailing_zeros(), den.trailing_zeros()) if not num.is_zero else den.trailing_zeros()
        lead = den.lead
        num = ComplexPoly(num.array[cut:] / lead, trim=None) if not num.is_zero else num
        den = ComplexPoly(den.array[cut:] / lead, trim=None)
        return num, den

    @property
    def poles(self) -> list[complex]:
        _, den = self.rational()
        return poly_roots(den).all_roots() if den.degree >= 1 else []

    def __call__(self, z):
        num, den = self.rational()
        z = np.asarray(z, dtype=complex)
        out = poly_eval(num, z) / poly_eval(den, z)
        return out if np.ndim(out) else complex(out)

    def near_pole(self, z: complex, tol: float = POLE_TOL) -> bool:
        _, den = self.rational()
        if den.degree < 1:
            return False
        return min(abs(z - p) for p in poly_roots(den).all_roots()) < tol


@dataclass(frozen=True)
class PrunedGraph:
    base: GraphSpec
    frequency_vertices: tuple[FrequencyVertex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frequency_vertices", tuple(self.frequency_vertices))
        ids = set(self.base.vertex_ids)
        seen = set()
        for fv in self.frequency_vertices:
            if fv.vertex_id not in ids:
                raise GraphSpecError(f"frequency vertex {fv.vertex_id!r} is not in the graph")
            if fv.vertex_id in seen:
                raise GraphSpecError(f"frequency vertex {fv.vertex_id!r} given twice")
            seen.add(fv.vertex_id)
            if len(self.base.neighbours(fv.vertex_id)) != 1:
                raise GraphSpecError(f"frequency vertex {fv.vertex_id!r} must have degree 1")
            if fv.vertex_id in self.base.neighbours(fv.vertex_id):
                raise GraphSpecError(f"frequency vertex {fv.vertex_id!r} cannot carry a self-loop")

    @classmethod
    def from_spec(cls, spec: GraphSpec) -> PrunedGraph:
        return cls(spec, ())

    def frequency_vertex(self, vertex: str) -> FrequencyVertex | None:
        for fv in self.frequency_vertices:
            if fv.vertex_id == vertex:
                return fv
        return None

    def operator(self) -> tuple[TimeStepOperator, list[tuple[int, int, FrequencyVertex]]]:
        """Base U0 (placeholders zeroed) and the slots each r(z) occupies."""
        U = assemble_U0(self.base)
        M = U.entries.copy()
        slots = []
        for fv in self.frequency_vertices:
            (u,) = self.base.neighbours(fv.vertex_id)
            row = U.basis.index((fv.vertex_id, u))
            col = U.basis.index((u, fv.vertex_id))
            M[row, col] = 0.0
            slots.append((row, col, fv))
        return TimeStepOperator(U.basis, M, U.in_indices, U.out_indices, U.port_names), slots

    def matrix_at(self, z: complex) -> np.ndarray:
        U, slots = self.operator()
        M = U.entries.copy()
        for row, col, fv in slots:
            if fv.near_pole(z):
                raise PoleError(f"z={z} is a pole of r(z) at vertex {fv.vertex_id!r}")
            M[row, col] = fv(z)
        return M


def _as_pruned(graph: GraphSpec | PrunedGraph) -> PrunedGraph:
    return graph if isinstance(graph, PrunedGraph) else PrunedGraph.from_spec(graph)


def _port_indices(U: TimeStepOperator, j, k) -> tuple[int, int]:
    j = U.port_index(j) if isinstance(j, str) else j
    k = j if k is None else (U.port_index(k) if isinstance(k, str) else k)
    return j, k


def pruned_decompose(graph: GraphSpec | PrunedGraph, j: int | str = 0,
                     k: int | str | None = None) -> CharDecomposition:
    """Characteristic decomposition of a graph that may contain frequency vertices.

    Each r(z) = p/q occupies one entry, so det and cofactor are affine in it;
    multiplying by the product of the q's leaves polynomials.
    """
    pg = _as_pruned(graph)
    U, slots = pg.operator()
    j, k = _port_indices(U, j, k)
    rats = [(row, col, *fv.rational()) for row, col, fv in slots]
    bound = U.dim + sum(max(num.degree if not num.is_zero else 0, den.degree)
                        for _, _, num, den in rats)
    M0 = U.entries

    def matrix_at(z):
        M = M0.copy()
        for row, col, num, den in rats:
            M[row, col] = poly_eval(num, z) / poly_eval(den, z)
        return M

    def weight_at(z):
        w = 1.0 + 0j
        for _, _, _, den in rats:
            w *= poly_eval(den, z)
        return w

    return decompose_sampled(matrix_at, U.dim, U.in_indices[j], U.out_indices[k], bound,
                             weight_at=weight_at if rats else None, pair=(j, k))


def pruned_resolvent(graph: GraphSpec | PrunedGraph, z: complex) -> np.ndarray:
    pg = _as_pruned(graph)
    U, _ = pg.operator()
    return resolvent_scatter(pg.matrix_at(z), z, U.in_indices, U.out_indices)


def pruned_scatter_eval(graph: GraphSpec | PrunedGraph, j: int | str, k: int | str | None,
                        z: complex) -> complex:
    """``-<out_k|(U'(z) - zI)^-1|in_j>`` with every r(z) substituted at z."""
    pg = _as_pruned(graph)
    U, _ = pg.operator()
    j, k = _port_indices(U, j, k)
    return complex(pruned_resolvent(pg, z)[k, j])


def pruned_scatter_eval_regularized(graph, j, k, z: complex, eps: float = 1e-8,
                                    agree_tol: float = 1e-6) -> complex:
    """Evaluate at a removable singularity from both radial sides."""
    try:
        return pruned_scatter_eval(graph, j, k, z)
    except (PoleError, SingularError):
        pass
    lo = pruned_scatter_eval(graph, j, k, z * (1 - eps))
    hi = pruned_scatter_eval(graph, j, k, z * (1 + eps))
    if abs(lo - hi) > agree_tol:
        raise PoleError(f"one-sided values at z={z} disagree by {abs(lo - hi):.3g}")
    return 0.5 * (lo + hi)


def _component(spec: GraphSpec, start: str, removed: frozenset) -> set[str]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for a, b in spec.edges:
            if frozenset((a, b)) == removed:
                continue
            for x, y in ((a, b), (b, a)):
                if x == v and y not in seen:
                    seen.add(y)
                    queue.append(y)
    return seen


def _split(spec: GraphSpec, cut: tuple[str, str]) -> set[str]:
    outer, root = cut
    key = frozenset(cut)
    if outer == root or key not in {frozenset(e) for e in spec.edges}:
        raise GraphSpecError(f"cut {cut} is not an edge between two distinct vertices")
    comp = _component(spec, root, key)
    if outer in comp:
        raise GraphSpecError(f"removing edge {cut} does not disconnect {root!r} from {outer!r}")
    for p in spec.ports:
        # a runway entering along the cut itself is fine: it probes the subgraph directly
        if p.in_state == (outer, root) and p.out_state == (root, outer):
            continue
        for st in (p.in_state, p.out_state):
            if st[0] in comp or st[1] in comp:
                raise GraphSpecError(f"port {p.name!r} lies inside the pruned subgraph")
    return comp


def subgraph_across(graph: GraphSpec | PrunedGraph, cut: tuple[str, str]) -> PrunedGraph:
    """The piece beyond ``cut`` with the cut edge as its single port."""
    pg = _as_pruned(graph)
    spec = pg.base
    outer, root = cut
    comp = _split(spec, cut)
    verts = [(outer, PLACEHOLDER)] + [(v, c) for v, c in spec.vertices if v in comp]
    edges = [e for e in spec.edges if e[0] in comp and e[1] in comp] + [(outer, root)]
    sub = GraphSpec(verts, edges, [Port("cut", (outer, root), (root, outer))])
    fvs = [fv for fv in pg.frequency_vertices if fv.vertex_id in comp]
    return PrunedGraph(sub, fvs)


def extract_subgraph_reflection(graph: GraphSpec | PrunedGraph, cut: tuple[str, str],
                                delay: int = 2) -> FrequencyVertex:
    """Reflection seen from ``cut[0]`` looking into the subgraph rooted at ``cut[1]``.

    ``delay`` removes the runway-side edge states of the cut from the
    response (two of them for a single cut edge).
    """
    sub = subgraph_across(graph, cut)
    dec = pruned_decompose(sub, 0, 0)
    return FrequencyVertex(cut[1], -dec.g_red, dec.f_red, delay)


def prune(graph: GraphSpec | PrunedGraph, cut: tuple[str, str], delay: int = 2) -> PrunedGraph:
    """Replace everything beyond ``cut`` by a single vertex reflecting with r(z)."""
    pg = _as_pruned(graph)
    spec = pg.base
    fv = extract_subgraph_reflection(pg, cut, delay)
    outer, root = cut
    comp = _split(spec, cut)
    drop = comp - {root}
    verts = [(v, c) if v != root else (v, PLACEHOLDER) for v, c in spec.vertices if v not in drop]
    edges = [e for e in spec.edges if e[0] not in comp and e[1] not in comp] + [(outer, root)]
    new_base = GraphSpec(verts, edges, spec.ports)
    kept = [f for f in pg.frequency_vertices if f.vertex_id not in comp]
    return PrunedGraph(new_base, kept + [fv])


@dataclass
class EquivalenceReport:
    max_error: dict[tuple[str, str], float]
    tol: float
    K: int
    skipped: int = 0

    @property
    def worst(self) -> float:
        return max(self.max_error.values()) if self.max_error else 0.0

    @property
    def passed(self) -> bool:
        return self.worst < self.tol

    def as_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "grid": self.K, "worst": self.worst,
                "skipped_points": self.skipped,
                "pairs": [{"in": j, "out": k, "max_error": e}
                          for (j, k), e in sorted(self.max_error.items())]}


def verify_prune_equivalence(full: GraphSpec | PrunedGraph, pg: GraphSpec | PrunedGraph,
                             K: int = 256, tol: float = 1e-8) -> EquivalenceReport:
    """Compare S_jk of two graphs on K points of the unit circle, for every port pair."""
    a, b = _as_pruned(full), _as_pruned(pg)
    names_a, names_b = a.base.port_names, b.base.port_names
    if sorted(names_a) != sorted(names_b):
        raise GraphSpecError(f"port names differ: {names_a} vs {names_b}")
    zs = np.exp(1j * (np.pi / (4 * K) + 2 * np.pi * np.arange(K) / K))
    errs = {(j, k): 0.0 for j in names_a for k in names_a}
    ia = {n: i for i, n in enumerate(names_a)}
    ib = {n: i for i, n in enumerate(names_b)}
    skipped = 0
    for z in zs:
        try:
            Sa = pruned_resolvent(a, z)
            Sb = pruned_resolvent(b, z)
        except (PoleError, SingularError):
            skipped += 1
            continue
        for j in names_a:
            for k in names_a:
                e = abs(Sa[ia[k], ia[j]] - Sb[ib[k], ib[j]])
                errs[(j, k)] = max(errs[(j, k)], float(e))
    return EquivalenceReport(errs, tol, K, skipped)
