import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chanshort.dsp import (AutocorrTaps, ChannelTaps, SpectrumSamples, block_toeplitz, dtft,
                           idtft_taps, make_constellation, make_rng, rc_autocorr, rrc_pulse,
                           szego_logdet, toeplitz_from_taps)
from chanshort.models import pulse_autocorr

taps = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=8)


@given(taps)
@settings(max_examples=40, deadline=None)
def test_dtft_roundtrip(x):
    x = np.array(x)
    s = dtft(x, 64)
    back = idtft_taps(s, len(x) - 1, 0)
    assert np.allclose(back, x, atol=1e-12)


def test_dtft_sign_convention():
    # X(w) = sum x_i exp(-j w i) at w = -pi + 2 pi n / N
    x = np.array([1.0, 2.0, -0.5j])
    s = dtft(x, 16)
    w = s.omega
    ref = x[0] + x[1] * np.exp(-1j * w) + x[2] * np.exp(-2j * w)
    assert np.allclose(s.values, ref)


def test_toeplitz_convention():
    T = toeplitz_from_taps([1, 2, 3], 4, first_lag=-1)
    # T[l, m] = x_{l-m}, lags -1, 0, 1
    assert T[0, 1] == 1 and T[1, 1] == 2 and T[2, 1] == 3 and T[0, 2] == 0


def test_block_toeplitz_shape():
    blocks = np.arange(12).reshape(3, 2, 2)
    B = block_toeplitz(blocks, 3, first_lag=-1)
    assert B.shape == (6, 6)
    assert np.array_equal(B[2:4, 0:2], blocks[2])


@given(taps)
@settings(max_examples=30, deadline=None)
def test_autocorr_spectrum_is_power(x):
    h = ChannelTaps(np.array(x) + 1e-3)
    g = h.autocorr()
    assert np.allclose(g.spectrum(128).values, np.abs(h.spectrum(128).values) ** 2, atol=1e-10)


@pytest.mark.parametrize("kind", ["bpsk", "qpsk", "8psk", "16apsk", "32apsk"])
def test_constellations_unit_energy(kind):
    c = make_constellation(kind)
    assert np.isclose(np.mean(np.abs(c.points) ** 2), 1.0)
    assert abs(np.mean(c.points)) < 1e-12
    assert c.M == {"bpsk": 2, "qpsk": 4, "8psk": 8, "16apsk": 16, "32apsk": 32}[kind]


def test_gaussian_marker():
    g = make_constellation("gaussian")
    assert g.is_gaussian and g.M == 0
    with pytest.raises(ValueError):
        make_constellation("64qam")


def test_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        SpectrumSamples(np.ones(100))


def test_rng_substreams_are_deterministic_and_distinct():
    a = make_rng(7, 1).standard_normal(4)
    b = make_rng(7, 1).standard_normal(4)
    c = make_rng(7, 2).standard_normal(4)
    assert np.array_equal(a, b) and not np.allclose(a, c)


def test_szego_finite_approaches_asymptotic():
    g = ChannelTaps(np.array([0.5, 0.5, -0.5, -0.5])).autocorr()
    errs = [abs(np.subtract(*szego_logdet(g, N, 0.25))) for N in (16, 64, 256)]
    assert errs[0] > errs[1] > errs[2]


def test_rrc_autocorr_nyquist():
    p = rrc_pulse(0.2, span=48)
    t = np.arange(-3, 4, dtype=float)
    g = pulse_autocorr(p, t).real
    assert np.allclose(g, (t == 0).astype(float), atol=2e-3)
    assert np.allclose(rc_autocorr(t, 0.2), (t == 0).astype(float), atol=1e-15)
    assert np.allclose(pulse_autocorr(p, np.array([0.75])).real, rc_autocorr(np.array([0.75]), 0.2),
                       atol=2e-3)


def test_autocorr_trim():
    g = AutocorrTaps(np.array([1.0, 0.5, 1e-9]))
    assert g.trimmed(1e-6).memory == 1
