import dataclasses

import numpy as np
import pytest

from qgs import catalog as ap
from qgs.graphcore import assemble_U0
from qgs.polyalg import RootSet
from qgs.response import (
    DegenerateModesWarning,
    Signal,
    closed_form_coefficients,
    convolve,
    impulse_closed_form,
    impulse_dft,
    simulate_oracle,
)
from qgs.scatter import char_decompose, scatter_function


@pytest.fixture(scope="module")
def bolo_dec():
    return char_decompose(assemble_U0(ap.bolo()))


def test_bolo_residues(bolo_dec):
    omega0, modes = closed_form_coefficients(bolo_dec)
    assert abs(omega0 + 3) < 1e-9
    got = sorted((om for om, _ in modes), key=lambda w: w.imag)
    assert abs(got[0] + 3 * np.sqrt(2) * 1j) < 1e-9
    assert abs(got[1] - 3 * np.sqrt(2) * 1j) < 1e-9


def test_bolo_sequence(bolo_dec):
    h = impulse_closed_form(bolo_dec, max_n=5).sequence
    assert np.allclose(h[:2], 0, atol=1e-14)
    assert np.allclose(h[2:6], [-1 / 3, 4 / 9, -16 / 27, -44 / 81], atol=1e-10)


def test_three_routes_agree(bolo_dec):
    n = 20
    closed = impulse_closed_form(bolo_dec, n).sequence
    dft = impulse_dft(scatter_function(assemble_U0(ap.bolo())), 512, n).sequence
    oracle = simulate_oracle(ap.bolo(), "p", n + 1, runway_len=32).samples
    assert np.max(np.abs(closed - dft)) < 1e-8
    assert np.max(np.abs(closed - oracle)) < 1e-8


def test_closed_form_value_matches_sequence(bolo_dec):
    h = impulse_closed_form(bolo_dec, 10)
    assert all(abs(h.closed_form_value(n) - h.sequence[n]) < 1e-12 for n in range(11))


def test_reflector_lag_and_delay():
    spec = ap.reflector(-1)
    S = scatter_function(assemble_U0(spec))
    raw = impulse_dft(S, 64, 8).sequence
    assert abs(raw[2] + 1) < 1e-12
    assert np.max(np.abs(np.delete(raw, 2))) < 1e-12
    shifted = impulse_dft(S.delayed(2), 64, 8).sequence
    assert abs(shifted[0] + 1) < 1e-12
    y = simulate_oracle(spec, "p", 6, delay=2)
    assert abs(y.samples[0] + 1) < 1e-12


def test_square_pair_oracle():
    spec = ap.square_junction()
    S = scatter_function(assemble_U0(spec), "1", "2")
    h = impulse_dft(S, 1024, 30).sequence
    y = simulate_oracle(spec, "1", 31, out_port="2").samples
    assert np.max(np.abs(h - y)) < 1e-10


def test_monochromatic_ratio_tends_to_S():
    spec = ap.bolo()
    x = Signal.monochromatic(1j, 80)
    y = simulate_oracle(spec, "p", 80, signal=x)
    n = 79
    assert abs(y.samples[n] / x.samples[n] - 1j) < 1e-8
    h = impulse_closed_form(char_decompose(assemble_U0(spec)), 79)
    conv = convolve(x, h)
    assert np.max(np.abs(conv.samples - y.samples)) < 1e-10


def test_delta_convolution_returns_h(bolo_dec):
    h = impulse_closed_form(bolo_dec, 15)
    y = convolve(Signal.delta(16), h)
    assert np.allclose(y.samples, h.sequence)


def test_norm_is_conserved():
    run = simulate_oracle(ap.square_junction(), "3", 100, full=True)
    assert run.norm_drift < 1e-12


def test_short_runway_rejected():
    with pytest.raises(ValueError, match="too short"):
        simulate_oracle(ap.bolo(), "p", 20, runway_len=10)


def test_dft_grid_bound():
    with pytest.raises(ValueError, match="at least"):
        impulse_dft(scatter_function(assemble_U0(ap.bolo())), 16, 10)


def test_degenerate_roots_fall_back(bolo_dec):
    eta = bolo_dec.etas.roots[0]
    fake = dataclasses.replace(bolo_dec, etas=RootSet((eta, eta), 0))
    with pytest.warns(DegenerateModesWarning):
        h = impulse_closed_form(fake, 10)
    assert h.method == "dft"
