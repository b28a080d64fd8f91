import numpy as np
import pytest

from qgs import catalog as ap
from qgs.graphcore import (
    CoinSpec,
    GraphSpec,
    GraphSpecError,
    Port,
    assemble_U0,
    build_edge_basis,
    validate_partial_isometry,
)


def test_bolo_basis_order():
    basis = build_edge_basis(ap.bolo())
    assert list(basis) == [("0", "B"), ("A", "B"), ("B", "0"), ("B", "A"), ("B", "B")]


def test_bolo_operator_entries():
    U = assemble_U0(ap.bolo())
    b = U.basis.index
    M = U.entries
    # arriving at B from A: reflect back with -1/3, on to 0 and round the loop with 2/3
    assert M[b(("B", "A")), b(("A", "B"))] == pytest.approx(-1 / 3)
    assert M[b(("B", "0")), b(("A", "B"))] == pytest.approx(2 / 3)
    assert M[b(("B", "B")), b(("A", "B"))] == pytest.approx(2 / 3)
    # the loop state feeds itself with -1 + 2/3
    assert M[b(("B", "B")), b(("B", "B"))] == pytest.approx(-1 / 3)
    # the pendant vertex A flips the phase
    assert M[b(("A", "B")), b(("B", "A"))] == pytest.approx(-1)
    # in-row and out-column are empty
    assert not M[U.in_indices[0]].any()
    assert not M[:, U.out_indices[0]].any()


def test_self_loop_counts_once():
    spec = GraphSpec([("v", CoinSpec("grover"))], [("v", "v")])
    U = assemble_U0(spec)
    assert U.dim == 1
    # a degree-1 Grover coin is the identity
    assert U.entries[0, 0] == pytest.approx(1.0)


@pytest.mark.parametrize("builder", [ap.bolo, lambda: ap.star(3, 1), lambda: ap.complete(10),
                                     ap.valve, ap.square_junction, ap.pruned_tree, ap.bolo_chain])
def test_examples_are_partial_isometries(builder):
    assert validate_partial_isometry(assemble_U0(builder())).passed


def test_broken_operator_detected():
    U = assemble_U0(ap.bolo())
    M = U.entries.copy()
    M[2, 1] += 1e-6
    rep = validate_partial_isometry(M, U.out_indices, U.in_indices)
    assert not rep.passed
    assert rep.deviation > 1e-7


def test_custom_coin_orders_by_neighbour():
    # a coin sending 0 -> a and a -> 0 with b untouched; neighbours of c sort as 0, a, b
    perm = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    spec = GraphSpec(
        [("0", CoinSpec("reflect", 1)), ("a", CoinSpec("reflect", 1)),
         ("b", CoinSpec("reflect", 1)), ("c", CoinSpec("custom", matrix=perm))],
        [("0", "c"), ("a", "c"), ("b", "c")])
    U = assemble_U0(spec)
    b = U.basis.index
    assert U.entries[b(("c", "a")), b(("0", "c"))] == 1
    assert U.entries[b(("c", "0")), b(("a", "c"))] == 1
    assert U.entries[b(("c", "b")), b(("b", "c"))] == 1


@pytest.mark.parametrize("kwargs, msg", [
    (dict(vertices=[("a", CoinSpec()), ("a", CoinSpec())], edges=[]), "duplicate vertex"),
    (dict(vertices=[("a", CoinSpec())], edges=[("a", "x")]), "unknown vertex"),
    (dict(vertices=[("a", CoinSpec()), ("b", CoinSpec())], edges=[("a", "b"), ("b", "a")]),
     "duplicate edge"),
    (dict(vertices=[("a", CoinSpec()), ("b", CoinSpec())], edges=[("a", "b")],
          ports=[Port("p", ("a", "c"), ("b", "a"))]), "not a declared edge"),
    (dict(vertices=[("a", CoinSpec()), ("b", CoinSpec())], edges=[("a", "b")],
          ports=[Port("p", ("a", "b"), ("b", "a")), Port("q", ("a", "b"), ("a", "b"))]),
     "claimed by"),
])
def test_spec_validation(kwargs, msg):
    with pytest.raises(GraphSpecError, match=msg):
        GraphSpec(**kwargs)


def test_coin_validation():
    with pytest.raises(GraphSpecError, match="modulus"):
        CoinSpec("reflect", 0.5)
    with pytest.raises(GraphSpecError, match="not unitary"):
        CoinSpec("custom", matrix=np.array([[1, 1], [0, 1]]))
    with pytest.raises(GraphSpecError, match="unknown coin"):
        CoinSpec("hadamard")


def test_reflect_needs_degree_one():
    spec = GraphSpec([("a", CoinSpec("reflect", 1)), ("b", CoinSpec()), ("c", CoinSpec())],
                     [("a", "b"), ("a", "c")])
    with pytest.raises(GraphSpecError, match="degree"):
        assemble_U0(spec)


def test_custom_coin_size_mismatch():
    spec = GraphSpec([("a", CoinSpec("custom", matrix=np.eye(2))), ("b", CoinSpec())],
                     [("a", "b")])
    with pytest.raises(GraphSpecError, match="degree"):
        assemble_U0(spec)


def test_feedback_closes_to_unitary():
    U = assemble_U0(ap.bolo())
    M = U.with_feedback(0, 0, np.exp(0.3j))
    assert np.allclose(M.conj().T @ M, np.eye(U.dim), atol=1e-12)
