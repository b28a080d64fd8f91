"""Probing a graph through the phase of its frequency response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scatter import PoleError, ScatterFunction, scatter_eval


@dataclass
class PhaseSweep:
    thetas: np.ndarray
    values: np.ndarray
    unwrapped_phase: np.ndarray
    winding: int
    winding_raw: float

    @property
    def K(self) -> int:
        return self.thetas.size

    def slope(self) -> np.ndarray:
        """dphi/dtheta at each grid point (periodic central differences)."""
        ph = self.unwrapped_phase
        total = self.winding_raw * 2 * np.pi
        ext = np.concatenate([[ph[-1] - total], ph, [ph[0] + total]])
        h = 2 * np.pi / self.K
        return (ext[2:] - ext[:-2]) / (2 * h)


@dataclass
class Resonance:
    center: float
    width: float
    eta_estimate: complex
    peak_slope: float


def _sweep_once(S: ScatterFunction, K: int) -> PhaseSweep:
    for attempt in range(2):
        offset = np.pi / K * attempt
        th = offset + 2 * np.pi * np.arange(K) / K
        try:
            vals = scatter_eval(S, np.exp(1j * th), check_pole=True)
            break
        except PoleError:
            if attempt:
                raise
    closed = np.concatenate([vals, vals[:1]])
    ph = np.unwrap(np.angle(closed))
    raw = (ph[-1] - ph[0]) / (2 * np.pi)
    return PhaseSweep(th, vals, ph[:-1], int(round(raw)), float(raw))


def _max_step(sweep: PhaseSweep) -> float:
    ph = np.concatenate([sweep.unwrapped_phase, [sweep.unwrapped_phase[0] + 2 * np.pi * sweep.winding]])
    return float(np.max(np.abs(np.diff(ph)))) if ph.size > 1 else 0.0


def phase_sweep(S: ScatterFunction, K: int = 4096, auto: bool = False,
                max_K: int = 1 << 22, max_step: float = np.pi / 4) -> PhaseSweep:
    """Sample S on K points of the unit circle and unwrap its phase.

    With ``auto`` the grid starts fine enough to resolve the pole closest to
    the circle, then doubles until the winding agrees across two consecutive
    sizes and no phase step exceeds ``max_step``.
    """
    if not auto:
        return _sweep_once(S, K)
    etas = S.decomposition.etas.roots
    gap = min((1 - abs(e) for e in etas if abs(e) < 1), default=1.0)
    need = int(min(max_K, 16 * np.pi / max(gap, 1e-12)))
    while K < need:
        K *= 2
    sweep = _sweep_once(S, K)
    while K < max_K:
        K *= 2
        nxt = _sweep_once(S, K)
        if (nxt.winding == sweep.winding and abs(nxt.winding_raw - nxt.winding) < 1e-3
                and _max_step(nxt) < max_step):
            return nxt
        sweep = nxt
    return sweep


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def find_resonances(sweep: PhaseSweep, jump_threshold: float | None = None,
                    factor: float = 10.0) -> list[Resonance]:
    """Locate the narrow windows where the phase drops steeply.

    A grid point is steep when ``|dphi/dtheta|`` exceeds ``jump_threshold``
    (default ``factor`` times the median slope).  Each contiguous steep run
    is one resonance centred on its steepest point.  The width is the extent
    around the centre over which the phase sits more than pi/2 away from the
    background line; the root estimate is ``(1 - width/2) e^{i center}``.
    """
    slope = sweep.slope()
    mag = np.abs(slope)
    base = float(np.median(mag))
    thr = jump_threshold if jump_threshold is not None else factor * max(base, 1e-12)
    steep = mag > thr
    K = sweep.K
    if not steep.any() or steep.all():
        return []
    # rotate so that index 0 is not inside a steep run
    start = int(np.argmin(steep))
    idx = (np.arange(K) + start) % K
    runs, cur = [], []
    for i in idx:
        if steep[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    h = 2 * np.pi / K
    bg_slope = float(np.median(slope))
    ph = sweep.unwrapped_phase
    out = []
    for run in runs:
        c = run[int(np.argmax(mag[run]))]
        left = (run[0] - 1) % K

        def departed(i):
            # offsets are taken mod 2pi, so wrap-around of the grid is harmless
            n = (i - left) % K
            return abs(_wrap(ph[i] - ph[left] - bg_slope * n * h)) > np.pi / 2

        n_lo = 0
        while n_lo < K // 2 and departed((c - n_lo - 1) % K):
            n_lo += 1
        n_hi = 0
        while n_hi < K // 2 and departed((c + n_hi + 1) % K):
            n_hi += 1
        width = (n_lo + n_hi + 1) * h
        center = float(sweep.thetas[c])
        center = (center + np.pi) % (2 * np.pi) - np.pi
        out.append(Resonance(center, width, (1 - width / 2) * np.exp(1j * center), float(mag[c])))
    out.sort(key=lambda r: r.center)
    return out


def argument_principle_winding(S: ScatterFunction) -> int:
    """Zeros minus poles of S inside the unit disc, from the root sets."""
    dec = S.decomposition
    from .polyalg import poly_roots

    zeros_in = 0
    if not dec.g_red.is_zero and dec.g_red.degree >= 1:
        gr = poly_roots(dec.g_red)
        zeros_in = gr.count("inside")
    poles_in = dec.s + dec.etas.count("inside")
    return zeros_in - poles_in + S.delay_exponent


def dimension_lower_bound(sweep: PhaseSweep) -> int:
    return abs(sweep.winding)


def star_fraction(theta: float) -> float:
    """Fraction L = M/N of phase-flipping leaves from a star resonance angle.

    The first-quadrant resonance sits at tau with sin(2 tau) = 2 sqrt(L(1-L));
    of the two solutions L = sin(tau)**2 is the one consistent with
    cos(2 tau) = 1 - 2L.
    """
    tau = abs(theta) % np.pi
    tau = min(tau, np.pi - tau)
    return float(np.sin(tau) ** 2)


def unit_crossings(sweep: PhaseSweep) -> list[float]:
    """Angles where the sampled response passes through +1 (phase crossing 0)."""
    ph = _wrap(np.angle(sweep.values))
    nxt = np.roll(ph, -1)
    hit = (np.sign(ph) != np.sign(nxt)) & (np.abs(ph - nxt) < np.pi)
    h = 2 * np.pi / sweep.K
    out = []
    for i in np.flatnonzero(hit):
        frac = ph[i] / (ph[i] - nxt[i])
        out.append(float(_wrap(sweep.thetas[i] + frac * h)))
    return sorted(out)


def complete_graph_size(theta: float) -> float:
    """Vertex count estimate from the angle +-(pi/2 + 1/N) where R = 1."""
    return 1.0 / (abs(theta) - np.pi / 2)


def estimate_complete_size(R_sweep: PhaseSweep) -> float:
    """N from a sweep of the vertex reflection R(z) = z**2 S(z).

    Of the crossings through R = 1, the ones just past +-pi/2 carry the size;
    their two estimates are averaged.
    """
    cands = [t for t in unit_crossings(R_sweep) if abs(t) > np.pi / 2]
    if not cands:
        raise ValueError("no crossing through R = 1 beyond +-pi/2")
    pos = [t for t in cands if t > 0]
    neg = [t for t in cands if t < 0]
    picks = [min(grp, key=lambda t: abs(t) - np.pi / 2) for grp in (pos, neg) if grp]
    return float(np.mean([complete_graph_size(t) for t in picks]))
