"""Impulse responses, convolution, and the truncated-runway simulation.

Sequences follow the anticipation convention: at step n the input x[n] sits
on the runway state |1,0> and y[n-1] on |0,1>, so a constant reflector r
gives y[n] = r x[n].  Hence h[n] = <0,1|U^(n+1)|1,0>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .graphcore import GraphSpec, assemble_U0
from .scatter import CharDecomposition, PoleError, ScatterFunction, scatter_eval

DISTINCT_TOL = 1e-7


class DegenerateModesWarning(RuntimeWarning):
    pass


@dataclass
class ImpulseResponse:
    sequence: np.ndarray
    s: int | None = None
    omega0: complex | None = None
    modes: list[tuple[complex, complex]] = field(default_factory=list)
    delay: int = 0
    method: str = "closed"
    alias_bound: float | None = None

    @property
    def max_n(self) -> int:
        return len(self.sequence) - 1

    def closed_form_value(self, n: int) -> complex:
        """``omega0*delta[n - s] + sum_j omega_j eta_j**n`` at the undelayed index n."""
        if self.s is None:
            raise ValueError("no closed form attached to this response")
        if n < self.s:
            return 0j
        val = self.omega0 if n == self.s else 0j
        return val + sum(om * eta ** n for om, eta in self.modes)


@dataclass
class Signal:
    samples: np.ndarray
    generator: str = "custom"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)

    @classmethod
    def delta(cls, length: int) -> Signal:
        x = np.zeros(length, dtype=complex)
        x[0] = 1.0
        return cls(x, "delta")

    @classmethod
    def monochromatic(cls, lam: complex, length: int) -> Signal:
        return cls(complex(lam) ** np.arange(length), "monochromatic")

    def __len__(self):
        return self.samples.size


def closed_form_coefficients(dec: CharDecomposition) -> tuple[complex, list[tuple[complex, complex]]]:
    """Residues of ``-z**(n-1) g/f`` inside the unit circle.

    Returns ``omega0`` and the list of ``(omega_j, eta_j)``.
    """
    etas = list(dec.etas.roots)
    g0, s = dec.g0, dec.s
    omega0 = -g0 * np.prod([1.0 / (-e) for e in etas]) if etas else -g0
    modes = []
    for jdx, ej in enumerate(etas):
        prod = 1.0 + 0j
        for kdx, ek in enumerate(etas):
            if kdx != jdx:
                prod *= (1 - ej * np.conj(ek)) / (ej - ek)
        om = -g0 * (1 - abs(ej) ** 2) / ej ** (s + 1) * prod
        modes.append((complex(om), complex(ej)))
    return complex(omega0), modes


def _min_separation(etas) -> float:
    etas = list(etas)
    best = np.inf
    for a in range(len(etas)):
        for b in range(a + 1, len(etas)):
            best = min(best, abs(etas[a] - etas[b]))
    return best


def impulse_closed_form(dec: CharDecomposition, max_n: int = 64, delay: int = 0,
                        K: int = 4096) -> ImpulseResponse:
    """Single-runway impulse response from the roots of f.

    ``delay`` shifts the readout earlier by that many steps (the response of
    ``z**delay * S``).  Near-degenerate or zero roots fall back to the DFT
    route with a warning.
    """
    etas = dec.etas.roots
    if _min_separation(etas) < DISTINCT_TOL or any(abs(e) < DISTINCT_TOL for e in etas):
        warnings.warn("roots of f are (nearly) degenerate; using the DFT route",
                      DegenerateModesWarning, stacklevel=2)
        return impulse_dft(ScatterFunction(dec, dec.pair, delay), K, max_n)
    omega0, modes = closed_form_coefficients(dec)
    n = np.arange(max_n + 1) + delay
    seq = np.zeros(max_n + 1, dtype=complex)
    live = n >= dec.s
    for om, eta in modes:
        seq[live] += om * eta ** n[live]
    seq[n == dec.s] += omega0
    return ImpulseResponse(seq, dec.s, omega0, modes, delay, "closed")


def impulse_dft(S: ScatterFunction, K: int = 4096, max_n: int = 64) -> ImpulseResponse:
    """``h[n] ~ (1/K) sum_m z_m**n S(z_m)`` on K points of the unit circle.

    The aliasing error is about ``|eta_max|**K`` times the largest residue and
    is reported in ``alias_bound``.
    """
    if K < 4 * max_n:
        raise ValueError(f"grid K={K} must be at least 4*max_n={4 * max_n}")
    for attempt in range(2):
        phase = np.pi / K * attempt
        z = np.exp(1j * (phase + 2 * np.pi * np.arange(K) / K))
        try:
            vals = scatter_eval(S, z, check_pole=True)
            break
        except PoleError:
            if attempt:
                raise
    h = np.fft.ifft(vals)[: max_n + 1] * np.exp(1j * phase * np.arange(max_n + 1))
    etas = S.decomposition.etas.roots
    rmax = max((abs(e) for e in etas), default=0.0)
    bound = float(np.max(np.abs(vals))) * rmax ** (K - max_n) / max(1e-300, 1 - rmax) if etas else 0.0
    return ImpulseResponse(h, None, None, [], S.delay_exponent, "dft", bound)


def convolve(x: Signal | np.ndarray, h: ImpulseResponse | np.ndarray) -> Signal:
    """Causal convolution truncated to the length of ``x``."""
    xs = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=complex)
    hs = h.sequence if isinstance(h, ImpulseResponse) else np.asarray(h, dtype=complex)
    y = np.convolve(xs, hs)[: xs.size]
    return Signal(y, "response")


@dataclass
class OracleRun:
    output: Signal
    norms: np.ndarray
    leaked: float

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))


def simulate_oracle(spec: GraphSpec, port: str, steps: int, runway_len: int | None = None,
                    out_port: str | None = None, signal: Signal | np.ndarray | None = None,
                    delay: int = 0, full: bool = False):
    """Step the finite graph with one truncated runway per port.

    The probed runway starts in ``sum_k x[k] |k+1,k>`` (a delta by default);
    ``y[n]`` is the amplitude on |0,1> of ``out_port``'s runway after n+1
    steps.  Returns the output Signal, or an :class:`OracleRun` with norm
    history when ``full`` is true.
    """
    out_port = port if out_port is None else out_port
    U = assemble_U0(spec)
    names = list(U.port_names)
    if port not in names or out_port not in names:
        raise KeyError(f"unknown port {port if port not in names else out_port!r}")
    x = Signal.delta(1).samples if signal is None else (
        signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=complex))
    total = steps + delay
    need = max(total + 2, x.size)
    if runway_len is None:
        runway_len = need
    if runway_len < need:
        raise ValueError(f"runway_len={runway_len} too short; need at least {need}")
    L = runway_len
    P = len(names)
    G = U.entries
    g = np.zeros(U.dim, dtype=complex)
    # incoming[p, j] is |j+1, j>, outgoing[p, j] is |j, j+1> on runway p
    incoming = np.zeros((P, L), dtype=complex)
    outgoing = np.zeros((P, L), dtype=complex)
    incoming[names.index(port), : x.size] = x
    k_out = names.index(out_port)
    ins, outs = list(U.in_indices), list(U.out_indices)

    def norm():
        return np.sqrt(np.sum(np.abs(g) ** 2) + np.sum(np.abs(incoming) ** 2)
                       + np.sum(np.abs(outgoing) ** 2))

    norms = [norm()]
    leaked = 0.0
    y = np.zeros(total, dtype=complex)
    for n in range(total):
        new_g = G @ g
        new_g[ins] += incoming[:, 0]
        new_out = np.zeros_like(outgoing)
        new_out[:, 1:] = outgoing[:, :-1]
        new_out[:, 0] = g[outs]
        leaked += float(np.sum(np.abs(outgoing[:, -1]) ** 2))
        new_in = np.zeros_like(incoming)
        new_in[:, :-1] = incoming[:, 1:]
        g, outgoing, incoming = new_g, new_out, new_in
        y[n] = outgoing[k_out, 0]
        norms.append(np.sqrt(norm() ** 2 + leaked))
    out = Signal(y[delay:], "oracle")
    if full:
        return OracleRun(out, np.array(norms), leaked)
    return out
