import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chanshort.dsp import AutocorrTaps, ChannelTaps, SpectrumSamples, dtft, make_constellation, make_rng
from chanshort.models import ForneyModel, simulate_forney
from chanshort.shortening import (adaptive_cs, cs_from_error_acf, design_block_cs, design_scalar_cs,
                                  finite_gaussian_air, gaussian_air_of_law, mmse_legacy_cs,
                                  truncation_baseline)
from oracles import EPR4, MIMO_TAPS, dense_gaussian_air, grid_cs

N0_6DB = 10 ** -0.6


@pytest.mark.parametrize("L", range(4))
def test_scalar_design_matches_quadrature(L):
    d = design_scalar_cs(ChannelTaps(EPR4), N0_6DB, L)
    b, C, iopt = grid_cs(EPR4, N0_6DB, L)
    assert np.allclose(d.b, b, atol=1e-9)
    assert abs(d.C - C) < 1e-9 and abs(d.i_opt - iopt) < 1e-9


def test_iopt_monotone_and_exact_at_channel_memory():
    h = ChannelTaps(EPR4)
    vals = [design_scalar_cs(h, N0_6DB, L).i_opt for L in range(5)]
    assert np.all(np.diff(vals) >= -1e-12)
    asym = np.mean(np.log2(1 + np.abs(h.spectrum(1 << 14).values) ** 2 / N0_6DB))
    assert abs(vals[3] - asym) < 1e-6 and abs(vals[4] - asym) < 1e-6


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=5), st.floats(0.05, 2.0), st.integers(0, 3))
@settings(max_examples=25, deadline=None)
def test_iopt_bounded_by_capacity(h, N0, L):
    h = np.array(h)
    if np.linalg.norm(h) < 1e-2:
        return
    ch = ChannelTaps(h)
    d = design_scalar_cs(ch, N0, L)
    cap = np.mean(np.log2(1 + np.abs(ch.spectrum().values) ** 2 / N0))
    mf = np.log2(1 + np.sum(h ** 2) / N0)
    assert d.i_opt <= cap + 1e-9
    assert d.i_opt <= mf + 1e-9


def test_scalar_is_block_with_k1():
    H = ChannelTaps(EPR4).spectrum().values
    blk = design_block_cs(2, 0.3, H=H[:, None, None])
    sc = design_scalar_cs(ChannelTaps(EPR4), 0.3, 2)
    assert np.array_equal(sc.gr, blk.Gr[:, 0, 0]) and sc.i_opt == blk.i_opt
    assert np.array_equal(sc.front_taps, blk.front_taps[:, 0, 0])


def test_target_from_error_acf_roundtrip():
    d = design_scalar_cs(ChannelTaps(EPR4), N0_6DB, 2)
    C, u, gr, iopt = cs_from_error_acf(d.b)
    assert np.allclose(gr, d.gr) and abs(iopt - d.i_opt) < 1e-12


def test_ungerboeck_and_forney_domains_share_target():
    h = ChannelTaps(EPR4)
    a = design_scalar_cs(h, 0.4, 1)
    b = design_scalar_cs(h.autocorr(), 0.4, 1)
    assert np.allclose(a.gr, b.gr) and abs(a.i_opt - b.i_opt) < 1e-12


def test_design_errors():
    with pytest.raises(ValueError):
        design_scalar_cs(ChannelTaps(EPR4), 0.0, 1)
    with pytest.raises(ValueError):
        design_block_cs(1, 1.0)


def test_mimo_monotone_and_finite_n():
    Hs = dtft(MIMO_TAPS, 4096).values
    vals = [design_block_cs(L, 0.5, H=Hs).i_opt for L in range(4)]
    assert np.all(np.diff(vals) > 0)
    assert abs(finite_gaussian_air(MIMO_TAPS, 0.5, 1, 24) - dense_gaussian_air(MIMO_TAPS, 0.5, 1, 24)) < 1e-10


def test_law_air_below_optimum():
    N, N0, L = 64, N0_6DB, 1
    d = design_scalar_cs(ChannelTaps(EPR4), N0, L)
    nu = 3
    # front end as an N x (N + nu) matrix built from the realized taps
    F = np.zeros((N, N + nu), complex)
    for l in range(N):
        for k, w in enumerate(d.front_taps):
            m = l - (d.front_lag + k)
            if 0 <= m < N + nu:
                F[l, m] = w
    G = np.zeros((N, N), complex)
    gf = d.gr_full()
    for l in range(N):
        for m in range(N):
            if abs(l - m) <= L:
                G[l, m] = gf[L + l - m]
    val = gaussian_air_of_law(EPR4, N0, N, F, G)
    opt = finite_gaussian_air(EPR4, N0, L, N)
    assert val <= opt + 1e-9 and val > opt - 0.05


def test_truncation_and_legacy_laws():
    bp = make_constellation("bpsk")
    t = truncation_baseline(ChannelTaps(EPR4), 1, 0.5, bp)
    assert t.memory == 1 and t.front.shape[0] == 4
    u = truncation_baseline(ChannelTaps(EPR4).autocorr(), 1, 0.5, bp)
    assert u.front.shape[0] == 1
    with pytest.raises(ValueError):
        truncation_baseline(ChannelTaps(EPR4), 5, 0.5, bp)
    lg = mmse_legacy_cs(ChannelTaps(EPR4), 0.5, 1, bp)
    assert lg.memory == 1


def test_adaptive_consistency():
    h = ChannelTaps(EPR4)
    rng = make_rng(11)
    c = make_constellation("bpsk").points[rng.integers(0, 2, 40000)]
    r = simulate_forney(ForneyModel(h, N0_6DB), c, rng)
    est = adaptive_cs(c, r, 1, mmse_len=31)
    d = design_scalar_cs(h, N0_6DB, 1)
    assert np.allclose(est.b_hat, d.b, rtol=0.05, atol=5e-3)


def test_adaptive_degenerate():
    c = make_constellation("bpsk").points[make_rng(1).integers(0, 2, 2000)]
    assert adaptive_cs(c, c, 1, mmse_len=5).degenerate
