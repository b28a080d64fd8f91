"""Exact reference computations, written independently of the package.

Graphs are given as plain dicts; the operator is rebuilt from scratch with
sympy rationals so that characteristic polynomials come out exactly.
"""

import sympy as sp

z = sp.symbols("z")


def operator(vertices, edges, ports):
    """vertices: {id: coin}; coin is "grover", a sympy number (reflect), or a
    sympy Matrix (rows out-neighbour, columns in-neighbour, sorted)."""
    states = sorted({(a, b) for a, b in edges} | {(b, a) for a, b in edges})
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    U = sp.zeros(n, n)
    for v, coin in vertices.items():
        nb = sorted({b for a, b in edges if a == v} | {a for a, b in edges if b == v})
        d = len(nb)
        for ci, u in enumerate(nb):
            for ri, w in enumerate(nb):
                if coin == "grover":
                    amp = sp.Rational(2, d) - (1 if ri == ci else 0)
                elif isinstance(coin, sp.MatrixBase):
                    amp = coin[ri, ci]
                else:
                    amp = coin
                U[idx[(v, w)], idx[(u, v)]] = amp
    ins = [idx[p[0]] for p in ports]
    outs = [idx[p[1]] for p in ports]
    for o in outs:
        U[:, o] = sp.zeros(n, 1)
    for i in ins:
        U[i, :] = sp.zeros(1, n)
    return U, ins, outs


def charpoly(U):
    """det(U - zI), through the characteristic polynomial of a constant matrix."""
    n = U.shape[0]
    return sp.expand((-1) ** n * U.charpoly(z).as_expr())


def cofactor(U, ins, outs, j, k):
    """Coefficient of alpha in det(U + alpha|in_j><out_k| - zI)."""
    V = U.copy()
    V[ins[j], outs[k]] += 1
    return sp.expand(charpoly(V) - charpoly(U))


def scatter_exact(U, ins, outs, j, k):
    """S_jk(z) = -<out_k|(U - zI)^-1|in_j> as a cancelled rational function."""
    return sp.cancel(-cofactor(U, ins, outs, j, k) / charpoly(U))


def coeffs_ascending(expr):
    p = sp.Poly(sp.expand(expr), z)
    return [complex(c) for c in reversed(p.all_coeffs())]


BOLO = ({"0": 1, "A": -1, "B": "grover"}, [("0", "B"), ("A", "B"), ("B", "B")],
        [(("0", "B"), ("B", "0"))])

PRUNED_TREE = ({"0": 1, "A": "grover", "B": 1, "C": "grover", "D": 1, "E": -1},
               [("0", "A"), ("A", "B"), ("A", "C"), ("C", "D"), ("C", "E")],
               [(("0", "A"), ("A", "0"))])

SQUARE = ({**{c.lower(): 1 for c in "ABCD"}, **{c: "grover" for c in "ABCD"}},
          [(c.lower(), c) for c in "ABCD"] + [("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")],
          [((c.lower(), c), (c, c.lower())) for c in "ABCD"])

STAR_3_1 = ({"0": 1, "c": "grover", "a0": -1, "b0": 1, "b1": 1},
            [("0", "c"), ("c", "a0"), ("c", "b0"), ("c", "b1")],
            [(("0", "c"), ("c", "0"))])
