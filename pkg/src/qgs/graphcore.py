"""Graphs in the edge-state picture and their time-step operators.

An edge state ``(u, v)`` is a walker on edge {u, v} travelling from u to v,
i.e. sitting at v having arrived from u.  Each vertex carries a coin that maps
its incoming states to its outgoing states.  Ports mark the states where a
runway is spliced on: the in-state has no pre-image and the out-state has no
image under the finite operator ``U0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

UNITARY_TOL = 1e-10

EdgeState = tuple[str, str]


class GraphSpecError(ValueError):
    """Raised when a graph description violates its structural rules."""


@dataclass(frozen=True)
class CoinSpec:
    """Local scattering rule of one vertex.

    ``kind`` is ``"grover"``, ``"reflect"`` or ``"custom"``.  A custom matrix
    has rows indexed by outgoing neighbour and columns by incoming neighbour,
    both in lexicographic order of neighbour id (a self-loop lists the vertex
    itself as its own neighbour).
    """

    kind: str = "grover"
    phase: complex = 1.0
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("grover", "reflect", "custom"):
            raise GraphSpecError(f"unknown coin kind {self.kind!r}")
        if self.kind == "reflect" and abs(abs(self.phase) - 1.0) > UNITARY_TOL:
            raise GraphSpecError(f"reflect phase must have modulus 1, got {self.phase!r}")
        if self.kind == "custom":
            if self.matrix is None:
                raise GraphSpecError("custom coin needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise GraphSpecError(f"custom coin matrix must be square, got shape {m.shape}")
            dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) if m.size else 0.0
            if dev > UNITARY_TOL:
                raise GraphSpecError(f"custom coin is not unitary (deviation {dev:.3g})")
            object.__setattr__(self, "matrix", m)

    def local_matrix(self, degree: int) -> np.ndarray:
        """Coin as a ``degree x degree`` matrix (out-neighbour, in-neighbour)."""
        if self.kind == "grover":
            return 2.0 / degree * np.ones((degree, degree), dtype=complex) - np.eye(degree)
        if self.kind == "reflect":
            if degree != 1:
                raise GraphSpecError(f"reflect coin needs a degree-1 vertex, got degree {degree}")
            return np.array([[complex(self.phase)]])
        if self.matrix.shape[0] != degree:
            raise GraphSpecError(
                f"custom coin is {self.matrix.shape[0]}x{self.matrix.shape[0]} "
                f"but the vertex has degree {degree}")
        return self.matrix


@dataclass(frozen=True)
class Port:
    name: str
    in_state: EdgeState
    out_state: EdgeState


@dataclass(frozen=True)
class GraphSpec:
    vertices: tuple[tuple[str, CoinSpec], ...]
    edges: tuple[tuple[str, str], ...]
    ports: tuple[Port, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((str(v), c) for v, c in self.vertices))
        object.__setattr__(self, "edges", tuple((str(a), str(b)) for a, b in self.edges))
        object.__setattr__(self, "ports", tuple(self.ports))
        ids = [v for v, _ in self.vertices]
        seen = set()
        for v in ids:
            if v in seen:
                raise GraphSpecError(f"duplicate vertex id {v!r}")
            seen.add(v)
        undirected = set()
        for a, b in self.edges:
            for x in (a, b):
                if x not in seen:
                    raise GraphSpecError(f"edge ({a!r}, {b!r}) references unknown vertex {x!r}")
            key = frozenset((a, b))
            if key in undirected:
                raise GraphSpecError(f"duplicate edge ({a!r}, {b!r})")
            undirected.add(key)
        claimed = {}
        names = set()
        for p in self.ports:
            if p.name in names:
                raise GraphSpecError(f"duplicate port name {p.name!r}")
            names.add(p.name)
            for role, st in (("in", p.in_state), ("out", p.out_state)):
                if frozenset(st) not in undirected:
                    raise GraphSpecError(
                        f"port {p.name!r} {role}-state {st} is not a declared edge")
                if st in claimed:
                    raise GraphSpecError(
                        f"edge state {st} claimed by ports {claimed[st]!r} and {p.name!r}")
                claimed[st] = p.name

    @property
    def vertex_ids(self) -> list[str]:
        return [v for v, _ in self.vertices]

    def coin(self, vertex: str) -> CoinSpec:
        for v, c in self.vertices:
            if v == vertex:
                return c
        raise KeyError(vertex)

    def neighbours(self, vertex: str) -> list[str]:
        out = set()
        for a, b in self.edges:
            if a == vertex:
                out.add(b)
            if b == vertex:
                out.add(a)
        return sorted(out)

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(f"no port named {name!r}")

    @property
    def port_names(self) -> list[str]:
        return [p.name for p in self.ports]


@dataclass(frozen=True)
class EdgeBasis:
    states: tuple[EdgeState, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def index(self, state: EdgeState) -> int:
        try:
            return self._index[tuple(state)]
        except KeyError:
            raise GraphSpecError(f"edge state {tuple(state)} is not in the basis") from None

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


@dataclass(frozen=True)
class TimeStepOperator:
    basis: EdgeBasis
    entries: np.ndarray = field(compare=False)
    in_indices: tuple[int, ...]
    out_indices: tuple[int, ...]
    port_names: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def port_index(self, name: str) -> int:
        return self.port_names.index(name)

    def with_feedback(self, j: int, k: int, alpha: complex) -> np.ndarray:
        """``U0 + alpha |in_j><out_k|`` as a dense matrix."""
        m = self.entries.copy()
        m[self.in_indices[j], self.out_indices[k]] += alpha
        return m


def build_edge_basis(spec: GraphSpec) -> EdgeBasis:
    states = set()
    for a, b in spec.edges:
        states.add((a, b))
        states.add((b, a))
    return EdgeBasis(tuple(sorted(states)))


def assemble_U0(spec: GraphSpec, basis: EdgeBasis | None = None) -> TimeStepOperator:
    """Assemble the finite time-step operator with port rows/columns zeroed.

    Entry ``[(v, w), (u, v)]`` is the coin amplitude at v for arriving from u
    and leaving towards w.
    """
    if basis is None:
        basis = build_edge_basis(spec)
    n = len(basis)
    U = np.zeros((n, n), dtype=complex)
    for v, coin in spec.vertices:
        nbrs = spec.neighbours(v)
        if not nbrs:
            continue
        try:
            C = coin.local_matrix(len(nbrs))
        except GraphSpecError as exc:
            raise GraphSpecError(f"vertex {v!r}: {exc}") from None
        for ci, u in enumerate(nbrs):
            col = basis.index((u, v))
            for ri, w in enumerate(nbrs):
                U[basis.index((v, w)), col] = C[ri, ci]
    ins = tuple(basis.index(p.in_state) for p in spec.ports)
    outs = tuple(basis.index(p.out_state) for p in spec.ports)
    U[:, list(outs)] = 0.0
    U[list(ins), :] = 0.0
    return TimeStepOperator(basis, U, ins, outs, tuple(spec.port_names))


@dataclass(frozen=True)
class IsometryReport:
    deviation: float
    co_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol and self.co_deviation <= self.tol

    def as_dict(self) -> dict:
        return {"deviation": self.deviation, "co_deviation": self.co_deviation,
                "tol": self.tol, "passed": self.passed}


def validate_partial_isometry(U0: TimeStepOperator | np.ndarray,
                              out_indices: Sequence[int] | None = None,
                              in_indices: Sequence[int] | None = None,
                              tol: float = UNITARY_TOL) -> IsometryReport:
    """Max entrywise deviation of U†U from I - P_out and of UU† from I - P_in."""
    if isinstance(U0, TimeStepOperator):
        M = U0.entries
        out_indices = U0.out_indices if out_indices is None else out_indices
        in_indices = U0.in_indices if in_indices is None else in_indices
    else:
        M = np.asarray(U0, dtype=complex)
    n = M.shape[0]
    target = np.eye(n)
    target[list(out_indices or ()), list(out_indices or ())] = 0.0
    co_target = np.eye(n)
    co_target[list(in_indices or ()), list(in_indices or ())] = 0.0
    dev = float(np.max(np.abs(M.conj().T @ M - target))) if n else 0.0
    co_dev = float(np.max(np.abs(M @ M.conj().T - co_target))) if n else 0.0
    return IsometryReport(dev, co_dev, tol)
