import numpy as np
import pytest

from chanshort.air import (ase, awgn_mutual_information, gaussian_dispatch, interference_budget,
                           mc_air_trellis, sbs_air)
from chanshort.detector import ForneyLaw, exact_forney_law
from chanshort.dsp import ChannelTaps, complex_noise, make_constellation, make_rng, rrc_pulse
from chanshort.models import ForneyModel, simulate_forney
from chanshort.shortening import design_scalar_cs, truncation_baseline
from oracles import EPR4


def test_awgn_mi_limits():
    q = make_constellation("qpsk")
    assert awgn_mutual_information(q, 1e4) > 1.999
    assert awgn_mutual_information(q, 1e-4) < 1e-3
    g = make_constellation("gaussian")
    assert np.isclose(awgn_mutual_information(g, 3.0), 2.0)


def test_sbs_air_matches_awgn_mi():
    q = make_constellation("qpsk")
    rng = make_rng(2)
    c = q.points[rng.integers(0, 4, 200000)]
    r = c + complex_noise(rng, len(c), 0.5)
    est = sbs_air(r, c, 1.0, 0.5, q)
    assert abs(est.value - awgn_mutual_information(q, 2.0)) < 4 * est.stderr + 1e-3


def test_trellis_air_memoryless_equals_awgn():
    b = make_constellation("bpsk")
    fm = ForneyModel(ChannelTaps(np.array([1.0])), 0.5)
    est = mc_air_trellis(lambda c, rng: simulate_forney(fm, c, rng), exact_forney_law(fm, b), 20000)
    assert abs(est.value - awgn_mutual_information(b, 2.0)) < 4 * est.stderr + 2e-3


def test_mismatched_air_ordering_epr4():
    b = make_constellation("bpsk")
    h = ChannelTaps(EPR4)
    N0 = 10 ** -0.6
    fm = ForneyModel(h, N0)
    ch = lambda c, rng: simulate_forney(fm, c, rng)
    ex = mc_air_trellis(ch, exact_forney_law(fm, b), 5000, 6)
    cs = mc_air_trellis(ch, design_scalar_cs(h, N0, 1).law(b), 5000, 6)
    tr = mc_air_trellis(ch, truncation_baseline(h, 1, N0, b), 5000, 6)
    assert ex.value > cs.value > tr.value


def test_rails_equal_complex_for_qpsk():
    # Gray QPSK on a real channel: two binary rails carry the same rate as the 4-ary trellis
    h = ChannelTaps(np.array([1.0, 0.5]))
    N0 = 0.4
    fm = ForneyModel(h, N0)
    ch = lambda c, rng: simulate_forney(fm, c, rng)
    full = mc_air_trellis(ch, design_scalar_cs(h, N0, 1).law(make_constellation("qpsk")), 8000, 6)
    rail = design_scalar_cs(h, N0, 1).law(make_constellation("bpsk").points / np.sqrt(2))
    rails = mc_air_trellis(ch, rail, 8000, 6, rails=True)
    assert abs(full.value - rails.value) < 0.02


def test_reproducible_and_threaded():
    b = make_constellation("bpsk")
    fm = ForneyModel(ChannelTaps(EPR4), 0.3)
    ch = lambda c, rng: simulate_forney(fm, c, rng)
    law = exact_forney_law(fm, b)
    a = mc_air_trellis(ch, law, 2000, 4, seed=5)
    t = mc_air_trellis(ch, law, 2000, 4, seed=5, threads=2)
    assert np.array_equal(a.per_block, t.per_block)


def test_gaussian_dispatch_and_ase():
    with pytest.raises(ValueError):
        gaussian_dispatch(make_constellation("gaussian"))
    v = ase(1.5, 1.2, 0.8)
    assert np.isclose(v.eta, 1.5 / 0.96)
    with pytest.raises(ValueError):
        ase(1.0, 0.0, 1.0)


def test_interference_budget_orthogonal_pulse():
    p = rrc_pulse(0.3, span=32)
    b = interference_budget(p, 1.0)
    assert b.N_I < 5e-4 and abs(b.main - 1) < 1e-3
    packed = interference_budget(p, 0.8)
    assert packed.N_I > 0.01
    tr = interference_budget(p, 0.8, detector="trellis", L=2)
    assert tr.N_I < packed.N_I
