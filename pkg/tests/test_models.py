import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chanshort.dsp import AutocorrTaps, ChannelTaps, complex_noise, make_rng, rrc_pulse
from chanshort.models import (BlockUngerboeckModel, FdmSpec, ForneyModel, UngerboeckModel,
                              fdm_stationary_model, min_phase_from_spectrum, simulate_forney,
                              simulate_ungerboeck, spectral_factorize, ungerboeck_from_pulse)
from oracles import EPR4


def _is_min_phase(h):
    r = np.roots(h)
    return np.all(np.abs(r) <= 1 + 1e-6)


@pytest.mark.parametrize("h", [EPR4, [2.0, 1.0], [0.407, 0.815, 0.407], [1, 0.3j, -0.2]])
def test_factorization_reconstructs(h):
    g = ChannelTaps(np.array(h, complex)).autocorr()
    f = spectral_factorize(g).taps
    assert np.allclose(ChannelTaps(f).autocorr().taps, g.taps, atol=1e-9)
    assert _is_min_phase(f)
    assert abs(f[0].imag) < 1e-12 and f[0].real > 0


def test_factorization_known_pair():
    f = spectral_factorize(AutocorrTaps(np.array([2.5, 1.0]))).taps
    assert np.allclose(f, [np.sqrt(2), 1 / np.sqrt(2)])


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6), st.lists(st.floats(-1, 1), min_size=2, max_size=6))
@settings(max_examples=30, deadline=None)
def test_factorization_random(re, im):
    n = min(len(re), len(im))
    h = np.array(re[:n]) + 1j * np.array(im[:n])
    if np.linalg.norm(h) < 1e-2 or abs(h[-1]) < 1e-3:
        return
    g = ChannelTaps(h).autocorr()
    f = spectral_factorize(g).taps
    assert np.allclose(ChannelTaps(f).autocorr().taps, g.taps, atol=1e-6 * g.taps[0].real)


def test_cepstral_method_close():
    g = ChannelTaps(np.array([1.0, 0.4, 0.1])).autocorr()
    assert np.allclose(spectral_factorize(g, "cepstral").taps, spectral_factorize(g, "roots").taps,
                       atol=1e-9)


def test_min_phase_from_spectrum_energy():
    h = np.array([1.0, -0.5])
    G = ChannelTaps(h).spectrum(1024).values
    f = min_phase_from_spectrum(np.abs(G) ** 2, 4)
    assert np.allclose(f[:2], h, atol=1e-9)


def test_negative_spectrum_rejected():
    with pytest.raises(ValueError):
        spectral_factorize(AutocorrTaps(np.array([1.0, 0.8])))


def test_ungerboeck_equals_matched_forney():
    h = ChannelTaps(np.array([0.8, 0.5, -0.3j]))
    N0 = 0.3
    rng = make_rng(3)
    c = np.sign(rng.standard_normal(200)) + 0j
    # same noise realization through both paths
    w = complex_noise(make_rng(4), len(c) + 2, N0)
    r = np.convolve(h.taps, c) + w
    y_mf = np.correlate(r, h.taps, "full")[2:2 + len(c)]
    um = UngerboeckModel.from_forney(ForneyModel(h, N0))
    y = simulate_ungerboeck(um, c, make_rng(4))
    assert np.allclose(y, y_mf, atol=1e-12)


def test_simulators_noise_power():
    h = ChannelTaps(np.array([1.0, 0.5]))
    r = simulate_forney(ForneyModel(h, 0.5), np.zeros(20000, complex), make_rng(1))
    assert abs(np.var(r) - 0.5) < 0.02


def test_block_model_requires_hermitian():
    G = np.zeros((3, 2, 2), complex)
    G[1] = np.eye(2)
    G[0] = [[0, 1], [0, 0]]
    with pytest.raises(ValueError):
        BlockUngerboeckModel(G)
    G[2] = G[0].conj().T
    m = BlockUngerboeckModel(G)
    assert m.K == 2 and m.memory == 1


def test_pulse_model_time_packing():
    p = rrc_pulse(0.3, span=48)
    g = ungerboeck_from_pulse(p, 0.8).g
    assert g.memory > 0 and np.isclose(g.taps[0].real, 1.0, atol=1e-6)


def test_fdm_model_is_hermitian_and_diagonal_for_spaced_carriers():
    p = rrc_pulse(0.2, span=32)
    model, rot = fdm_stationary_model(FdmSpec((p, p), 1.3, 1.0))
    Lg = model.memory
    assert np.allclose(model.G[Lg], np.eye(2), atol=5e-3)
    assert np.allclose(np.abs(rot), 1)
