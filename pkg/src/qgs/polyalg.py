"""Complex polynomials: evaluation, circle interpolation, roots, common roots.

Coefficients are stored in ascending order of degree throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TRIM_TOL = 1e-9
CIRCLE_TOL = 1e-7


class PolyError(ValueError):
    pass


@dataclass(frozen=True)
class ComplexPoly:
    coeffs: tuple[complex, ...]

    def __init__(self, coeffs: Iterable[complex], trim: float = TRIM_TOL):
        c = np.atleast_1d(np.asarray(list(coeffs), dtype=complex))
        if c.size and trim is not None:
            scale = np.max(np.abs(c))
            if scale > 0:
                keep = np.nonzero(np.abs(c) > trim * scale)[0]
                c = c[: keep[-1] + 1]
            else:
                c = c[:0]
        object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> ComplexPoly:
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(lead * c, trim=None)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> complex:
        return self.coeffs[-1] if self.coeffs else 0j

    def __call__(self, z):
        return poly_eval(self, z)

    def __mul__(self, other: ComplexPoly | complex) -> ComplexPoly:
        if isinstance(other, ComplexPoly):
            if self.is_zero or other.is_zero:
                return ComplexPoly([])
            return ComplexPoly(np.convolve(self.array, other.array), trim=None)
        return ComplexPoly(self.array * other, trim=None)

    __rmul__ = __mul__

    def __neg__(self) -> ComplexPoly:
        return ComplexPoly(-self.array, trim=None)

    def monic(self) -> ComplexPoly:
        if self.is_zero:
            raise PolyError("zero polynomial has no leading coefficient")
        return ComplexPoly(self.array / self.lead, trim=None)

    def shift(self, m: int) -> ComplexPoly:
        """Multiply by z**m (m >= 0)."""
        return ComplexPoly(np.concatenate([np.zeros(m, dtype=complex), self.array]), trim=None)

    def trailing_zeros(self, tol: float = TRIM_TOL) -> int:
        c = self.array
        if not c.size:
            return 0
        small = np.abs(c) <= tol * np.max(np.abs(c))
        return int(np.argmin(small)) if not small.all() else c.size

    def __repr__(self):
        return f"ComplexPoly({list(self.coeffs)})"


def poly_eval(p: ComplexPoly, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc if acc.ndim else complex(acc)


def circle_nodes(n: int) -> np.ndarray:
    """``n`` roots of unity rotated off the real and imaginary axes."""
    rot = np.exp(1j * np.pi / (4 * n))
    return rot * np.exp(2j * np.pi * np.arange(n) / n)


def interpolate_from_circle(samples: Sequence[tuple[complex, complex]],
                            degree_bound: int | None = None,
                            trim: float = TRIM_TOL) -> ComplexPoly:
    """Polynomial of degree < len(samples) through the samples.

    Nodes laid out as ``rho * omega**m`` (rotated roots of unity, in order)
    are inverted with an FFT; anything else falls back to a Vandermonde solve.
    """
    nodes = np.array([s[0] for s in samples], dtype=complex)
    values = np.array([s[1] for s in samples], dtype=complex)
    n = nodes.size
    if n == 0:
        raise PolyError("no samples")
    if degree_bound is not None and degree_bound > n - 1:
        raise PolyError(f"{n} samples cannot fix a polynomial of degree {degree_bound}")
    diffs = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(n)
    if np.min(diffs) < 1e-14:
        raise PolyError("duplicate interpolation nodes")
    omega = np.exp(2j * np.pi * np.arange(n) / n)
    rho = nodes[0]
    if abs(abs(rho) - 1.0) < 1e-12 and np.allclose(nodes, rho * omega, atol=1e-12, rtol=0):
        c = np.fft.fft(values) / n
        c = c / rho ** np.arange(n)
    else:
        V = np.vander(nodes, n, increasing=True)
        c = np.linalg.solve(V, values)
    if degree_bound is not None:
        c = c[: degree_bound + 1]
    return ComplexPoly(c, trim=trim)


def sample_and_interpolate(fn, degree_bound: int) -> ComplexPoly:
    nodes = circle_nodes(degree_bound + 1)
    return interpolate_from_circle([(z, fn(z)) for z in nodes], degree_bound)


@dataclass(frozen=True)
class RootSet:
    """Nonzero roots plus the multiplicity of the root at the origin."""

    roots: tuple[complex, ...]
    zero_multiplicity: int = 0
    circle_tol: float = CIRCLE_TOL

    def classify(self, r: complex) -> str:
        m = abs(r)
        if abs(m - 1.0) <= self.circle_tol:
            return "on_circle"
        return "inside" if m < 1.0 - self.circle_tol else "outside"

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(self.classify(r) for r in self.roots)

    def all_roots(self) -> list[complex]:
        return [0j] * self.zero_multiplicity + list(self.roots)

    def count(self, tag: str) -> int:
        extra = self.zero_multiplicity if tag == "inside" else 0
        return extra + sum(1 for t in self.tags if t == tag)

    def __len__(self):
        return self.zero_multiplicity + len(self.roots)


def _balanced_companion_roots(c: np.ndarray) -> np.ndarray:
    c = c / c[-1]
    n = c.size - 1
    if n == 0:
        return np.array([], dtype=complex)
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1]
    # numpy/LAPACK geev balances the matrix before the QR iteration
    return np.linalg.eigvals(comp)


def poly_roots(p: ComplexPoly, trim: float = TRIM_TOL, circle_tol: float = CIRCLE_TOL) -> RootSet:
    """Roots via companion-matrix eigenvalues; zeros at the origin by trimming."""
    if p.is_zero:
        raise PolyError("the zero polynomial has no finite root set")
    if p.degree < 1:
        return RootSet((), 0, circle_tol)
    s = p.trailing_zeros(trim)
    rest = p.array[s:]
    roots = _balanced_companion_roots(rest)
    order = np.lexsort((roots.imag, roots.real))
    return RootSet(tuple(complex(r) for r in roots[order]), s, circle_tol)


def _components(idx: list[int], roots: Sequence[complex], radius: float) -> list[list[int]]:
    """Single-linkage groups of ``idx`` at the given (relative) radius."""
    parent = {i: i for i in idx}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a_pos, a in enumerate(idx):
        for b in idx[a_pos + 1:]:
            if abs(roots[a] - roots[b]) <= radius * max(1.0, abs(roots[a])):
                parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for i in idx:
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def cluster_roots(roots: Sequence[complex], radius: float = 1e-4, eps: float = 1e-14,
                  factor: float = 4.0) -> list[complex]:
    """Replace each cluster of nearby roots by its centroid.

    A root of multiplicity m perturbed by rounding spreads into m roots about
    eps**(1/m) apart whose mean is still accurate to O(eps).  A group of m
    roots is therefore accepted as one multiple root when its diameter is
    below ``max(radius, factor * eps**(1/m))``; wider groups are split by
    single linkage at successively halved radii.
    """
    roots = list(roots)
    out = list(roots)

    def limit(m: int, scale: float) -> float:
        return max(radius, factor * eps ** (1.0 / m)) * scale

    def settle(members: list[int], r: float) -> None:
        if len(members) == 1:
            return
        pts = np.array([roots[i] for i in members])
        diam = float(np.max(np.abs(pts[:, None] - pts[None, :])))
        if diam <= limit(len(members), max(1.0, float(np.max(np.abs(pts))))):
            centre = complex(np.mean(pts))
            for i in members:
                out[i] = centre
            return
        if r <= radius:
            return
        for sub in _components(members, roots, r / 2):
            settle(sub, r / 2)

    start = limit(len(roots), 1.0) if roots else radius
    for comp in _components(list(range(len(roots))), roots, start):
        settle(comp, start)
    return out


def pair_common_roots(a: RootSet | Sequence[complex], b: RootSet | Sequence[complex],
                      tol: float = 1e-7) -> list[tuple[int, int]]:
    """Greedy nearest-first matching of roots closer than ``tol``.

    Returns index pairs into the two root lists (for a RootSet, its nonzero
    roots).  Each root is used at most once.
    """
    ra = list(a.roots) if isinstance(a, RootSet) else list(a)
    rb = list(b.roots) if isinstance(b, RootSet) else list(b)
    cand = []
    for i, x in enumerate(ra):
        for j, y in enumerate(rb):
            d = abs(x - y)
            if d <= tol:
                cand.append((d, i, j))
    cand.sort()
    used_a, used_b, pairs = set(), set(), []
    for _, i, j in cand:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j))
    return sorted(pairs)


def rational_eval(num: ComplexPoly, den: ComplexPoly, z, shift: int = 0):
    """``z**shift * num(z) / den(z)``."""
    z = np.asarray(z, dtype=complex)
    out = z ** shift * poly_eval(num, z) / poly_eval(den, z)
    return out if out.ndim else complex(out)
