import numpy as np
import pytest

from chanshort.dsp import ChannelTaps
from chanshort.txfilter import (combined_memory, cs_objective, family_psd, flat_spec, ftn_channel,
                                mimo_precoders, optimize_transmit_filter, realize_pulse, waterfilling)
from oracles import MIMO_TAPS

PROAKIS_B = ChannelTaps(np.array([0.407, 0.815, 0.407]))


def test_power_constraint_and_flat_dominance():
    spec = optimize_transmit_filter(PROAKIS_B, 0.9, 1)
    assert abs(spec.psd.mean() - 1.0) < 1e-9
    assert np.all(spec.psd >= 0)
    assert spec.objective >= flat_spec(PROAKIS_B, 0.9, 1).objective


def test_family_member_matches_objective():
    spec = optimize_transmit_filter(PROAKIS_B, 0.9, 1)
    h2 = np.abs(PROAKIS_B.spectrum(len(spec.psd)).values) ** 2
    assert abs(cs_objective(spec.psd, h2, 0.9, 1) - spec.objective) < 1e-9
    assert np.allclose(family_psd(spec.A, h2, 0.9), spec.psd)


def test_cosine_coefficients_double_nonzero_lags():
    spec = optimize_transmit_filter(PROAKIS_B, 0.9, 1)
    assert np.isclose(spec.cosine_coefficients[0], spec.A[0].real)
    assert np.isclose(spec.cosine_coefficients[1], 2 * spec.A[1].real)


def test_waterfilling_flat_channel():
    wf = waterfilling(np.ones(256), 0.5, 1.0)
    assert abs(wf.theta - 1.5) < 1e-12 and np.allclose(wf.psd, 1.0)


def test_waterfilling_meets_power():
    wf = waterfilling(PROAKIS_B, 0.1, 2.0)
    assert abs(wf.psd.mean() - 2.0) < 1e-9


def test_combined_memory_flag():
    nu_c, ok = combined_memory(PROAKIS_B, [1.0, 0.5])
    assert nu_c == 3 and ok


def test_mimo_power_split():
    pre = mimo_precoders(MIMO_TAPS, 0.5, 1, n_starts=1, n_omega=256)
    assert abs(pre.powers.sum() - 2.0) < 1e-9
    assert pre.objective > 0


def test_ftn_band_and_realization():
    band = ftn_channel(0.48, 512)
    assert abs(band.mean() - 0.48) < 0.01
    spec = optimize_transmit_filter(band, 0.5, 1, n_starts=1, n_omega=512)
    p, err = realize_pulse(spec.psd * band, length=48)
    assert abs(p.energy - 1) < 1e-9 and err < 0.2


def test_too_many_coefficients():
    with pytest.raises(ValueError):
        optimize_transmit_filter(PROAKIS_B, 0.9, 8)
