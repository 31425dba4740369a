import math

import numpy as np
import pytest
from scipy.optimize import bisect

from chanshort.dsp import make_constellation, rc_autocorr
from chanshort.packing import (design_mmse_equalizer, ebn0_fixed_point, evaluate_detector,
                               ftn_comparison, optimize_ase, orthogonal_eta, packed_channel,
                               rrc_spectrum)

QPSK = make_constellation("qpsk")


def _rc_at(alpha, tau):
    return lambda t: rc_autocorr(np.asarray(t, dtype=float) * tau, alpha)


def test_fixed_point_constant_rate():
    fp = ebn0_fixed_point(lambda x: 1.7, 4.0)
    assert abs(fp.esn0_db - (4.0 + 10 * math.log10(1.7))) < 1e-6


def test_fixed_point_linear_in_db_matches_bisection():
    I = lambda x: 0.5 + 0.05 * x
    fp = ebn0_fixed_point(I, 3.0, (-5, 20))
    ref = bisect(lambda x: x - 3.0 - 10 * math.log10(I(x)), -5, 20, xtol=1e-12)
    assert abs(fp.esn0_db - ref) < 1e-6
    assert abs(fp.esn0_db - 3.0 - 10 * math.log10(fp.I)) < 1e-6


def test_fixed_point_degenerate_and_missing():
    assert not ebn0_fixed_point(lambda x: 0.0, 3.0).ok
    with pytest.raises(ValueError):
        ebn0_fixed_point(lambda x: 1e-6, 3.0, (0, 1))


def test_mmse_isi_free_single_tap():
    N0 = 0.3
    eq = design_mmse_equalizer(_rc_at(0.2, 1.0), N0, 1)
    assert abs(eq.mse - N0 / (1 + N0)) < 1e-12


def test_mmse_packed_beats_matched_filter_scaling():
    tau, N0 = 0.75, 0.1
    g = rc_autocorr(np.arange(-200, 201) * tau, 0.2)
    mf_only = 1 - 1 / (np.sum(g ** 2) + N0)  # best scalar on y_k alone
    eq = design_mmse_equalizer(_rc_at(0.2, tau), N0, 22)
    assert eq.mse < mf_only


def test_mmse_budget_monotone_and_fractional():
    f = _rc_at(0.2, 0.75)
    mses = [design_mmse_equalizer(f, 0.1, n).mse for n in (1, 5, 11, 22)]
    assert np.all(np.diff(mses) <= 1e-12)
    fs = design_mmse_equalizer(f, 0.1, 22, oversampling=2)
    assert fs.oversampling == 2 and fs.mse <= mses[1] + 1e-12
    with pytest.raises(ValueError):
        design_mmse_equalizer(f, 0.1, 23)


def test_orthogonal_point_equals_awgn():
    res = optimize_ase(QPSK, 0.2, "sbs-mf", [1.0], esn0_db=np.arange(-2, 13, 2.0), ebn0_db=[4.0],
                       n_symbols=20000, blocks=10)
    ref = orthogonal_eta(QPSK, 4.0, 0.2)
    assert abs(res.eta_max[0] - ref) < 4 * res.eta_se[0] + 5e-3


def test_grid_max_consistency():
    res = optimize_ase(QPSK, 0.2, "sbs-mf", [0.8, 0.9, 1.0], esn0_db=np.arange(-2, 13, 2.0),
                       ebn0_db=[3.0, 6.0], n_symbols=4000, blocks=4)
    for e, eb in enumerate(res.ebn0_db):
        vals = [res.eta_at(eb, i, 0)[0] for i in range(len(res.taus))]
        assert np.isclose(res.eta_max[e], max(vals))
        assert res.tau_opt[e] == res.taus[int(np.argmax(vals))]


@pytest.mark.parametrize("L", [3, 6])  # 8 and 64 states per rail
def test_cs_not_below_truncation_in_packing(L):
    ch = packed_channel(0.2, 0.7)
    for s in (4.0, 10.0):
        cs = evaluate_detector(ch, "trellis-cs", QPSK, s, L, 4000, 6, seed=1)
        tr = evaluate_detector(ch, "trellis-ungerboeck", QPSK, s, L, 4000, 6, seed=1)
        assert cs.value >= tr.value - 3 * math.hypot(cs.stderr, tr.stderr)


def test_frequency_packing_and_domains():
    ch = packed_channel(rrc_spectrum(0.2), 1.0, 1.0, J=1)
    assert ch.adjacent and set(ch.adjacent) == {-1, 1}
    v = evaluate_detector(ch, "sbs-mf", QPSK, 6.0, n_symbols=2000, blocks=3)
    assert 0 < v.value < 2
    with pytest.raises(NotImplementedError):
        evaluate_detector(ch, "sbs-wf", QPSK, 6.0, n_symbols=200, blocks=2)


def test_grid_errors_and_budget():
    with pytest.raises(ValueError):
        optimize_ase(QPSK, 0.2, "sbs-mf", [])
    with pytest.warns(RuntimeWarning):
        res = optimize_ase(QPSK, 0.2, "sbs-mf", [0.8, 1.0], esn0_db=[0, 5], n_symbols=500,
                           blocks=2, budget_s=0.0)
    assert res.partial


def test_ftn_comparison_smoke():
    r = ftn_comparison(0.48, 1, [4.0], np.arange(-4, 11, 2.0), n_symbols=1000, blocks=3, n_starts=1)
    assert set(r.eta) == {"rrc0.1", "rrc0.2", "optimized"}
    assert all(np.isfinite(v).all() for v in r.eta.values())
