import math

import numpy as np
import pytest

from chanshort.dsp import make_constellation, rrc_pulse
from chanshort.satchan import (SalehHpa, SatelliteLink, apsk_block_statistics, default_transponder,
                               fit_volterra, modulate, nominal_input_power, psk_equivalent_pulse,
                               satellite_air, simulate_transponder)
from chanshort.shortening import design_block_cs


@pytest.fixture(scope="module")
def pulse():
    return rrc_pulse(0.05, span=64, sps=8)


def test_saleh_peak_and_linear():
    hpa = SalehHpa()
    r = hpa.rho_sat
    assert abs(hpa.am(r) ** 2 - hpa.p_sat) < 1e-12
    rr = np.linspace(0, 3, 3001)
    assert hpa.am(rr).max() <= hpa.am(r) + 1e-12
    x = np.array([0.3 + 0.1j, -1.2j])
    assert np.array_equal(SalehHpa(linear=True)(x, 1.0), x)
    with pytest.raises(ValueError):
        hpa(np.array([np.nan + 0j]), 1.0)


def test_cw_at_saturation_has_zero_obo():
    spec = default_transponder(0.0)
    spec = type(spec)(None, None, spec.hpa, 8)
    x = np.exp(2j * np.pi * 0.0 * np.arange(4000))
    out = simulate_transponder(x, spec)
    assert abs(out.obo_db) < 1e-9


def test_obo_is_invariant_to_oversampling():
    obos = []
    c = make_constellation("8psk").points[np.random.default_rng(3).integers(0, 8, 4000)]
    for sps in (8, 16):
        p = rrc_pulse(0.05, span=64, sps=sps)
        spec = default_transponder(0.0, sps)
        obos.append(simulate_transponder(modulate(c, p), spec, nominal_input_power(p, spec)).obo_db)
    assert abs(obos[0] - obos[1]) < 0.05
    assert obos[0] > 0
    with pytest.raises(ValueError):
        simulate_transponder(np.ones(10), default_transponder(0.0, 4))


def test_linear_transponder_recovers_cascade(pulse):
    spec = default_transponder(0.0, linear=True)
    con = make_constellation("16apsk")  # non-constant modulus makes kernels identifiable
    m = fit_volterra(3, spec, con, pulse, n_symbols=8000, span=32, ridge=1e-9)
    pad = np.zeros(len(pulse.samples) + 400, dtype=complex)
    pad[200:200 + len(pulse.samples)] = pulse.samples
    q = np.convolve(np.convolve(pad, spec.imux, "same"), spec.omux, "same")
    c0 = 200 + pulse.center
    ref = q[c0 - m.center:c0 - m.center + m.kernels.shape[1]]
    err = np.linalg.norm(m.kernels[0] - ref) / np.linalg.norm(ref)
    # what remains is the pulse tail beyond the kernel span
    assert err < 5e-3
    assert np.linalg.norm(m.kernels[1]) < 5e-3 * np.linalg.norm(ref)
    assert m.residual_db < -40


def test_residual_non_increasing_in_order(pulse):
    spec = default_transponder(0.0)
    con = make_constellation("16apsk")
    res = [fit_volterra(v, spec, con, pulse, n_symbols=6000).residual_db for v in (1, 3)]
    assert res[1] <= res[0] + 1e-9
    with pytest.raises(ValueError):
        fit_volterra(2, spec, con, pulse)


def test_psk_pulse_is_kernel_sum(pulse):
    m = fit_volterra(3, default_transponder(0.0), make_constellation("8psk"), pulse, n_symbols=4000)
    assert np.allclose(psk_equivalent_pulse(m).samples, m.kernels.sum(axis=0))
    assert np.allclose(psk_equivalent_pulse(m, 0.5).samples, m.kernels[0] + 0.25 * m.kernels[1])


def test_apsk_statistics(pulse):
    spec = default_transponder(0.0)
    m8 = fit_volterra(3, spec, make_constellation("8psk"), pulse, n_symbols=3000)
    with pytest.raises(ValueError):
        apsk_block_statistics(m8, make_constellation("8psk"))
    m16 = fit_volterra(5, spec, make_constellation("16apsk"), pulse, n_symbols=4000)
    with pytest.raises(ValueError, match="order <= 3"):
        apsk_block_statistics(m16, make_constellation("16apsk"))
    con = make_constellation("32apsk")
    m32 = fit_volterra(5, spec, con, pulse, n_symbols=6000)
    blk, st = apsk_block_statistics(m32, con, N0=0.1)
    assert st.V.shape == (3, 3) and np.linalg.eigvalsh(st.V).min() > 0
    G = blk.spectrum().values
    vals = [design_block_cs(L, 0.1, G=G, V=st.V).i_opt for L in (0, 1, 2)]
    assert np.all(np.diff(vals) >= -1e-9)


def test_satellite_air_smoke():
    link = SatelliteLink.build(make_constellation("qpsk"), n_probe=4000)
    a = satellite_air(link, 12.0, "cs", 1, n_symbols=1500, blocks=2, pilot_symbols=500)
    t = satellite_air(link, 12.0, "truncation", 1, n_symbols=1500, blocks=2, noise_scales=(1.0,))
    assert 0 < a.estimate.value <= 2 and 0 < t.estimate.value <= 2
    assert a.noise_scale in (0.5, 1.0, 2.0, 4.0) and t.noise_scale == 1.0
    assert a.obo_db > 0
    with pytest.raises(ValueError):
        satellite_air(link, 12.0, "mmse")
