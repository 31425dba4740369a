import numpy as np
import pytest

from chanshort.detector import (ForneyLaw, bcjr, brute_force_map, exact_forney_law,
                                exact_ungerboeck_law, forward_loglik, map_decide, path_loglik)
from chanshort.dsp import ChannelTaps, make_constellation, make_rng
from chanshort.models import ForneyModel, UngerboeckModel, simulate_forney, simulate_ungerboeck
from oracles import brute_force, brute_force_ungerboeck


def _instance(seed, M, nu, N, N0=0.5):
    rng = make_rng(seed)
    h = rng.standard_normal(nu + 1) + 1j * rng.standard_normal(nu + 1)
    h /= np.linalg.norm(h)
    con = make_constellation("bpsk" if M == 2 else "qpsk")
    idx = rng.integers(0, M, N)
    return ChannelTaps(h), con, idx, N0, rng


@pytest.mark.parametrize("seed", range(6))
def test_bcjr_matches_enumeration_forney(seed):
    h, con, idx, N0, rng = _instance(seed, 2 + 2 * (seed % 2), 1 + seed % 3, 5)
    fm = ForneyModel(h, N0)
    r = simulate_forney(fm, con.points[idx], rng)
    tp = bcjr(r, exact_forney_law(fm, con), 5)
    ref = brute_force(r, h.taps, N0, con.points, 5)
    assert np.max(np.abs(tp.post - ref)) < 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_bcjr_matches_enumeration_ungerboeck(seed):
    h, con, idx, N0, rng = _instance(100 + seed, 4, 2, 4)
    um = UngerboeckModel.from_forney(ForneyModel(h, N0))
    y = simulate_ungerboeck(um, con.points[idx], rng)
    tp = bcjr(y, exact_ungerboeck_law(um, con), 4)
    ref = brute_force_ungerboeck(y, um.g.full(), N0, con.points, 4)
    assert np.max(np.abs(tp.post - ref)) < 1e-9


def test_library_brute_force_agrees_in_log_q():
    h, con, idx, N0, rng = _instance(9, 2, 2, 6)
    fm = ForneyModel(h, N0)
    r = simulate_forney(fm, con.points[idx], rng)
    law = exact_forney_law(fm, con)
    post, lq = brute_force_map(r, law, 6)
    tp = bcjr(r, law, 6)
    assert abs(tp.log_q - lq) < 1e-9
    assert abs(forward_loglik(r, law, 6) - lq) < 1e-9


def test_priors_shift_posteriors():
    h, con, idx, N0, rng = _instance(3, 2, 1, 6, N0=4.0)
    fm = ForneyModel(h, N0)
    r = simulate_forney(fm, con.points[idx], rng)
    law = exact_forney_law(fm, con)
    pri = np.tile([0.9, 0.1], (6, 1))
    a = bcjr(r, law, 6).post
    b = bcjr(r, law, 6, priors=pri).post
    assert np.all(b[:, 0] > a[:, 0])
    post, _ = brute_force_map(r, law, 6, priors=pri)
    assert np.max(np.abs(post - b)) < 1e-9


def test_max_log_decisions_noiseless():
    h = ChannelTaps(np.array([1.0, 0.6, 0.2]))
    con = make_constellation("bpsk")
    idx = make_rng(1).integers(0, 2, 50)
    r = np.convolve(h.taps, con.points[idx])
    tp = bcjr(r, exact_forney_law(ForneyModel(h, 1e-3), con), 50, max_log=True)
    assert np.array_equal(map_decide(tp), idx)


def test_forward_bounds_single_path():
    h, con, idx, N0, rng = _instance(5, 4, 2, 40)
    fm = ForneyModel(h, N0)
    r = simulate_forney(fm, con.points[idx], rng)
    law = exact_forney_law(fm, con)
    # log sum_c M^-N q(r|c) >= log q(r|c0) - N log M
    assert forward_loglik(r, law, 40) >= path_loglik(r, law, idx) - 40 * np.log(4) - 1e-9


def test_state_cap():
    law = ForneyLaw(np.ones(12), 1.0, make_constellation("qpsk").points)
    with pytest.raises(ValueError):
        law.tables()


def test_bcjr_rejects_raw_model():
    fm = ForneyModel(ChannelTaps(np.array([1.0])), 1.0)
    with pytest.raises(TypeError):
        bcjr(np.zeros(3), fm)
