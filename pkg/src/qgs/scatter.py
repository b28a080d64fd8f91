"""Scattering functions from the characteristic polynomial and the resolvent.

With feedback ``alpha`` closing out-port k into in-port j,
``det(U0 + alpha|in_j><out_k| - zI) = det(U0 - zI) + alpha * cof(z)`` where
``cof`` is the cofactor of the (in_j, out_k) entry.  Removing the factor
``b`` common to both leaves ``f + alpha g`` and the scattering function is
``S = -g / f``, which also equals ``-<out_k|(U0 - zI)^-1|in_j>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graphcore import TimeStepOperator
from .polyalg import (
    ComplexPoly,
    RootSet,
    circle_nodes,
    cluster_roots,
    interpolate_from_circle,
    pair_common_roots,
    poly_eval,
    poly_roots,
)

COMMON_ROOT_TOL = 1e-7
SIMPLE_ROOT_SLACK = 300.0
SINGULAR_DET_TOL = 1e-12


class NumericalError(ArithmeticError):
    """A numerical precondition failed (singularity, tolerance, ambiguity)."""


class PoleError(NumericalError):
    pass


class SingularError(NumericalError):
    pass


@dataclass(frozen=True)
class CharDecomposition:
    f_full: ComplexPoly
    g_full: ComplexPoly
    b: ComplexPoly
    scale: complex
    f_red: ComplexPoly
    g_red: ComplexPoly
    s: int
    g0: complex
    d: int
    etas: RootSet
    pair: tuple[int, int] = (0, 0)

    @property
    def d_prime(self) -> int:
        return self.d - self.s

    def factor_residual(self) -> float:
        """Max coefficient error of f_full = scale*b*f_red and g_full = scale*b*g_red."""
        errs = []
        for full, red in ((self.f_full, self.f_red), (self.g_full, self.g_red)):
            prod = (self.b * red * self.scale).array
            ref = full.array
            n = max(prod.size, ref.size)
            a = np.zeros(n, dtype=complex)
            c = np.zeros(n, dtype=complex)
            a[: prod.size] = prod
            c[: ref.size] = ref
            norm = max(1.0, float(np.max(np.abs(ref)))) if ref.size else 1.0
            errs.append(float(np.max(np.abs(a - c))) / norm if n else 0.0)
        return max(errs)


@dataclass(frozen=True)
class ScatterFunction:
    decomposition: CharDecomposition
    pair: tuple[int, int] = (0, 0)
    delay_exponent: int = 0

    def __call__(self, z):
        return scatter_eval(self, z, check_pole=False)

    def delayed(self, m: int) -> ScatterFunction:
        return ScatterFunction(self.decomposition, self.pair, m)

    def poles(self) -> list[complex]:
        dec = self.decomposition
        return [0j] * dec.s + list(dec.etas.roots)


def _cofactor_minor(A: np.ndarray, row: int, col: int) -> complex:
    minor = np.delete(np.delete(A, row, axis=0), col, axis=1)
    sign = -1.0 if (row + col) % 2 else 1.0
    return sign * (np.linalg.det(minor) if minor.size else 1.0)


def sample_det_and_cofactor(matrix_at: Callable[[complex], np.ndarray], row: int, col: int,
                            z: complex, weight: complex = 1.0) -> tuple[complex, complex]:
    """``weight * det(M(z) - zI)`` and ``weight * cofactor(row, col)`` at one node."""
    M = matrix_at(z)
    A = M - z * np.eye(M.shape[0])
    det = np.linalg.det(A)
    if abs(det) < SINGULAR_DET_TOL:
        cof = _cofactor_minor(A, row, col)
    else:
        e = np.zeros(A.shape[0], dtype=complex)
        e[row] = 1.0
        cof = det * np.linalg.solve(A, e)[col]
    return weight * det, weight * cof


def decompose_sampled(matrix_at: Callable[[complex], np.ndarray], dim: int, row: int, col: int,
                      degree_bound: int, weight_at: Callable[[complex], complex] | None = None,
                      pair: tuple[int, int] = (0, 0),
                      common_tol: float = COMMON_ROOT_TOL,
                      cluster_radius: float = 1e-4) -> CharDecomposition:
    """Factor ``det`` and the (row, col) cofactor of ``M(z) - zI`` sampled on the circle.

    ``weight_at`` clears denominators when ``M`` depends rationally on z; the
    weighted quantities must be polynomials of degree <= ``degree_bound``.
    """
    nodes = circle_nodes(degree_bound + 1)
    fs, gs = [], []
    for z in nodes:
        w = weight_at(z) if weight_at is not None else 1.0
        fv, gv = sample_det_and_cofactor(matrix_at, row, col, z, w)
        fs.append(fv)
        gs.append(gv)
    if not np.all(np.isfinite(fs)) or np.max(np.abs(fs)) == 0:
        raise SingularError("determinant vanished at every interpolation node")
    f_full = interpolate_from_circle(list(zip(nodes, fs)), degree_bound)
    g_full = interpolate_from_circle(list(zip(nodes, gs)), degree_bound)
    return reduce_pair(f_full, g_full, pair, common_tol, cluster_radius)


def _root_error(p: ComplexPoly, r: complex, eps: float = 1e-14) -> float:
    """First-order error of a simple root from coefficient noise of relative size eps."""
    c = p.array
    k = np.arange(c.size)
    size = float(np.sum(np.abs(c) * abs(r) ** k))
    slope = abs(complex(np.sum(k[1:] * c[1:] * r ** (k[1:] - 1))))
    return eps * size / max(slope, 1e-300)


def reduce_pair(f_full: ComplexPoly, g_full: ComplexPoly, pair: tuple[int, int] = (0, 0),
                common_tol: float = COMMON_ROOT_TOL,
                cluster_radius: float = 1e-4) -> CharDecomposition:
    """Split off the common factor ``b`` and normalise ``f_red`` to be monic."""
    if f_full.is_zero:
        raise SingularError("det(U0 - zI) is identically zero")
    fr = poly_roots(f_full)
    if g_full.is_zero:
        g_roots, g_zero = [], 0
    else:
        gr = poly_roots(g_full)
        g_roots, g_zero = cluster_roots(gr.roots, cluster_radius), gr.zero_multiplicity
    f_roots = cluster_roots(fr.roots, cluster_radius)
    pairs = pair_common_roots(f_roots, g_roots, common_tol) if g_roots else []
    # Simple roots are known to near machine precision, so a 1e-7 match between
    # two of them may be a narrow resonance (|eta| just below 1 in f, 1/conj(eta)
    # in g) rather than a shared bound state.  Keep only matches that are within
    # a few hundred times the estimated root error.
    pairs = [(i, j) for i, j in pairs
             if f_roots.count(f_roots[i]) > 1 or g_roots.count(g_roots[j]) > 1
             or abs(f_roots[i] - g_roots[j]) <= SIMPLE_ROOT_SLACK * (
                 _root_error(f_full, f_roots[i]) + _root_error(g_full, g_roots[j]))]
    common_zero = min(fr.zero_multiplicity, g_zero) if not g_full.is_zero else 0
    matched_f = {i for i, _ in pairs}
    b_roots = [f_roots[i] for i, _ in pairs]
    b = ComplexPoly.from_roots([0j] * common_zero + b_roots)
    s = fr.zero_multiplicity - common_zero
    etas = [f_roots[i] for i in range(len(f_roots)) if i not in matched_f]
    f_red = ComplexPoly.from_roots([0j] * s + etas)
    scale = f_full.lead
    if g_full.is_zero:
        g_red = ComplexPoly([])
    else:
        matched_g = {j for _, j in pairs}
        g_rest = [g_roots[j] for j in range(len(g_roots)) if j not in matched_g]
        g_red = ComplexPoly.from_roots([0j] * (g_zero - common_zero) + g_rest, g_full.lead / scale)
    g0 = g_red.coeffs[0] if g_red.coeffs else 0j
    return CharDecomposition(
        f_full=f_full, g_full=g_full, b=b, scale=scale, f_red=f_red, g_red=g_red,
        s=s, g0=complex(g0), d=f_red.degree,
        etas=RootSet(tuple(etas), 0), pair=pair)


def char_decompose(U0: TimeStepOperator, j: int | str = 0, k: int | str | None = None,
                   common_tol: float = COMMON_ROOT_TOL) -> CharDecomposition:
    """Decompose the characteristic polynomial for feedback out-port k -> in-port j."""
    j = U0.port_index(j) if isinstance(j, str) else j
    k = j if k is None else (U0.port_index(k) if isinstance(k, str) else k)
    if not (0 <= j < len(U0.in_indices) and 0 <= k < len(U0.out_indices)):
        raise IndexError(f"port pair ({j}, {k}) out of range")
    M = U0.entries
    return decompose_sampled(lambda z: M, U0.dim, U0.in_indices[j], U0.out_indices[k],
                             U0.dim, pair=(j, k), common_tol=common_tol)


def scatter_function(U0: TimeStepOperator, j: int | str = 0, k: int | str | None = None,
                     delay: int = 0) -> ScatterFunction:
    dec = char_decompose(U0, j, k)
    return ScatterFunction(dec, dec.pair, delay)


def scatter_eval(S: ScatterFunction, z, check_pole: bool = True):
    """``z**delay * (-g_red(z) / f_red(z))``."""
    dec = S.decomposition
    z = np.asarray(z, dtype=complex)
    if check_pole:
        poles = np.array(S.poles(), dtype=complex)
        if poles.size and np.min(np.abs(z.reshape(-1, 1) - poles.reshape(1, -1))) < 1e-12:
            raise PoleError("evaluation point coincides with a pole of S")
    out = -(z ** S.delay_exponent) * poly_eval(dec.g_red, z) / poly_eval(dec.f_red, z)
    return out if out.ndim else complex(out)


def resolvent_scatter(U0: TimeStepOperator | np.ndarray, z: complex,
                      in_indices=None, out_indices=None) -> np.ndarray:
    """Matrix ``S[k, j] = -<out_k|(U0 - zI)^-1|in_j>`` of every port pair."""
    if isinstance(U0, TimeStepOperator):
        M = U0.entries
        in_indices = U0.in_indices if in_indices is None else in_indices
        out_indices = U0.out_indices if out_indices is None else out_indices
    else:
        M = np.asarray(U0, dtype=complex)
    n = M.shape[0]
    A = M - z * np.eye(n)
    rhs = np.zeros((n, len(in_indices)), dtype=complex)
    for c, i in enumerate(in_indices):
        rhs[i, c] = 1.0
    try:
        X = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise SingularError(f"U0 - zI is singular at z={z}") from None
    if not np.all(np.isfinite(X)):
        raise SingularError(f"U0 - zI is singular at z={z}")
    return -X[list(out_indices), :]


def leak_deviation(U0: TimeStepOperator, cluster_radius: float = 1e-4) -> float:
    """Largest violation of ``|eta|^2 = 1 - sum_out |<out|psi>|^2`` over eigenpairs.

    Eigenvalues are clustered first so that repeated roots are handled through
    a null vector of ``U0 - eta I`` rather than an ill-conditioned eigenvector.
    """
    M = U0.entries
    outs = list(U0.out_indices)
    worst = 0.0
    for eta in cluster_roots(np.linalg.eigvals(M), cluster_radius):
        if abs(eta) < cluster_radius:
            eta = 0j
        _, _, vh = np.linalg.svd(M - eta * np.eye(M.shape[0]))
        psi = vh[-1].conj()
        leak = float(np.sum(np.abs(psi[outs]) ** 2))
        worst = max(worst, abs(abs(eta) ** 2 - (1.0 - leak)))
    return worst


@dataclass(frozen=True)
class ReciprocalReport:
    max_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def check_reciprocal(dec: CharDecomposition, tol: float = 1e-8) -> ReciprocalReport:
    """Check ``f_k = g0 * conj(g_{d-k})`` coefficientwise."""
    d = dec.d
    f = np.zeros(d + 1, dtype=complex)
    g = np.zeros(d + 1, dtype=complex)
    f[: len(dec.f_red.coeffs)] = dec.f_red.coeffs
    gc = dec.g_red.array[: d + 1]
    g[: gc.size] = gc
    dev = float(np.max(np.abs(f - dec.g0 * np.conj(g[::-1]))))
    if dec.g_red.degree > d:
        dev = max(dev, float(np.max(np.abs(dec.g_red.array[d + 1:]))))
    return ReciprocalReport(dev, tol)


def alpha_phase_winding(dec: CharDecomposition, samples: int = 4096) -> float:
    """Total change of arg(alpha) while the eigenvalue e^{i theta} loops once.

    Uses ``alpha = -f(e^{it}) / g(e^{it})``; the expected value is ``2 pi d``.
    """
    th = np.linspace(0.0, 2 * np.pi, samples + 1)
    z = np.exp(1j * th)
    alpha = -poly_eval(dec.f_red, z) / poly_eval(dec.g_red, z)
    ph = np.unwrap(np.angle(alpha))
    return float(ph[-1] - ph[0])


@dataclass
class SpectralFlow:
    alphas: np.ndarray
    tracks: np.ndarray  # (len(alphas), d) moving eigenvalues, continued along the sweep
    bound: list[complex]
    permutation: list[int] | None
    min_gap: float
    ambiguous: bool = False
    message: str = ""
    refinements: int = 0

    @property
    def is_cyclic_shift(self) -> bool:
        """True when the loop maps sorted-by-arg eigenvalue i onto i+1 (mod d)."""
        if self.permutation is None:
            return False
        d = len(self.permutation)
        return all(self.permutation[i] == (i + 1) % d for i in range(d))


def _drop_bound(eigs: np.ndarray, bound: list[complex]) -> np.ndarray:
    eigs = list(eigs)
    for b in bound:
        i = int(np.argmin([abs(e - b) for e in eigs]))
        eigs.pop(i)
    return np.array(eigs)


def _match(prev: np.ndarray, new: np.ndarray) -> tuple[np.ndarray, float]:
    cost = np.abs(prev[:, None] - new[None, :])
    r, c = linear_sum_assignment(cost)
    order = np.empty_like(c)
    order[r] = c
    return new[order], float(np.max(cost[r, c])) if r.size else 0.0


def _min_gap(vals: np.ndarray) -> float:
    if vals.size < 2:
        return np.inf
    d = np.abs(vals[:, None] - vals[None, :]) + np.diag(np.full(vals.size, np.inf))
    return float(np.min(d))


def spectral_flow(U0: TimeStepOperator, j: int | str = 0, k: int | str | None = None,
                  steps: int | None = None, max_refine: int = 12,
                  dec: CharDecomposition | None = None) -> SpectralFlow:
    """Follow the eigenvalues of ``U0 + e^{ix}|in_j><out_k|`` as x runs over [0, 2pi].

    Bound eigenvalues (roots of b) are removed before matching.  A step is
    halved whenever the smallest gap falls below ten times the matching
    radius; if that cannot be resolved the result is flagged ambiguous.
    """
    j = U0.port_index(j) if isinstance(j, str) else j
    k = j if k is None else (U0.port_index(k) if isinstance(k, str) else k)
    steps = steps or 8 * U0.dim
    if steps < 8 * U0.dim:
        raise ValueError(f"steps must be at least 8*dim = {8 * U0.dim}")
    if dec is None:
        dec = char_decompose(U0, j, k)
    bound = poly_roots(dec.b).all_roots() if dec.b.degree > 0 else []

    def moving(x):
        eigs = np.linalg.eigvals(U0.with_feedback(j, k, np.exp(1j * x)))
        return _drop_bound(eigs, bound)

    start = moving(0.0)
    start = start[np.argsort(np.mod(np.angle(start), 2 * np.pi))]
    grid = np.linspace(0.0, 2 * np.pi, steps + 1)
    cur = start
    tracks = [cur]
    min_gap = _min_gap(cur)
    refinements = 0
    for a, b in zip(grid[:-1], grid[1:]):
        stack = [(a, b, 0)]
        x_cur = a
        while stack:
            lo, hi, depth = stack.pop()
            cand, radius = _match(cur, moving(hi))
            gap = _min_gap(cand)
            if gap < 10 * radius:
                if depth >= max_refine:
                    return SpectralFlow(grid, np.array(tracks), bound, None, min(min_gap, gap),
                                        True, f"tracks unresolved near alpha=exp({hi:.6f}i)",
                                        refinements)
                mid = 0.5 * (lo + hi)
                refinements += 1
                stack.append((mid, hi, depth + 1))
                stack.append((lo, mid, depth + 1))
                continue
            cur = cand
            x_cur = hi
            min_gap = min(min_gap, gap)
        assert x_cur == b
        tracks.append(cur)
    end = cur
    perm = []
    for val in end:
        perm.append(int(np.argmin(np.abs(start - val))))
    if sorted(perm) != list(range(len(start))):
        return SpectralFlow(grid, np.array(tracks), bound, None, min_gap, True,
                            "final eigenvalues do not match the initial spectrum", refinements)
    return SpectralFlow(grid, np.array(tracks), bound, perm, min_gap, False, "", refinements)
