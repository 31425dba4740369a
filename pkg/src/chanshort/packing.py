"""Time and time-frequency packing: ASE grids, E_b/N0 fixed point, MMSE equalizer.

Units: the pulse is designed for symbol time ``T0 = 1``; packing sends it
every ``tau`` with carrier spacing ``nu_f`` (both normalized to ``T0``), so
the ASE is ``I / (tau * nu_f)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.optimize import brentq

from .air import AirEstimate, aggregate, awgn_mutual_information, mc_air_trellis, sbs_air
from .detector import ForneyLaw, MismatchedLaw
from .dsp import (AutocorrTaps, ChannelTaps, Constellation, PulseSamples, SpectrumSamples,
                  complex_noise, db2lin, idtft_taps, lin2db, make_constellation,
                  make_rng, rc_autocorr)
from .models import (ForneyModel, UngerboeckModel, min_phase_from_spectrum, simulate_forney,
                     simulate_ungerboeck, spectral_factorize, ungerboeck_from_pulse)
from .shortening import design_scalar_cs, truncation_baseline

__all__ = [
    "PulseSpectrum", "rrc_spectrum", "rc_spectrum", "gaussian_spectrum",
    "psd_spectrum", "PackedChannel", "packed_channel", "evaluate_detector",
    "PackingGridResult", "optimize_ase", "FixedPoint", "ebn0_fixed_point",
    "MmseEqualizer", "design_mmse_equalizer", "orthogonal_eta", "psd_channel",
    "FtnComparison", "ftn_comparison", "DETECTORS",
]

DETECTORS = ("sbs-mf", "sbs-wf", "sbs-mmse", "trellis-forney", "trellis-ungerboeck", "trellis-cs")


# ---------------------------------------------------------------- pulse spectra

@dataclass(frozen=True)
class PulseSpectrum:
    """Zero-phase pulse described by ``|P(f)|`` (``f`` in units of ``1/T0``)."""

    amp: Callable[[np.ndarray], np.ndarray]
    fmax: float
    label: str = "pulse"
    excess: float = 0.0  # two-sided bandwidth is (1 + excess) / T0

    def acf(self, t, n_f: int = 1 << 14) -> np.ndarray:
        """``g(t) = int |P(f)|^2 exp(j 2 pi f t) df``."""
        f = np.linspace(-self.fmax, self.fmax, n_f)
        w = np.full(n_f, f[1] - f[0])
        w[[0, -1]] *= 0.5
        p2 = self.amp(f) ** 2 * w
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(2j * np.pi * np.outer(t, f)) @ p2

    def cross(self, n, l, tau, nu_f, n_f: int = 1 << 14) -> complex:
        """``h(n, l) = int p(t + n tau) p*(t) exp(j 2 pi l nu_f t) dt``."""
        lo = max(-self.fmax, -self.fmax + l * nu_f)
        hi = min(self.fmax, self.fmax + l * nu_f)
        if hi <= lo:
            return 0j
        f = np.linspace(lo, hi, n_f)
        w = np.full(n_f, f[1] - f[0])
        w[[0, -1]] *= 0.5
        val = self.amp(f - l * nu_f) * self.amp(f) * np.exp(2j * np.pi * (f - l * nu_f) * n * tau)
        return complex(np.sum(val * w))


def _rc_shape(f, alpha):
    a = np.abs(f)
    out = np.zeros_like(a, dtype=float)
    f1, f2 = (1 - alpha) / 2, (1 + alpha) / 2
    out[a <= f1] = 1.0
    m = (a > f1) & (a <= f2)
    if alpha > 0:
        out[m] = 0.5 * (1 + np.cos(np.pi / alpha * (a[m] - f1)))
    return out


def rrc_spectrum(alpha: float) -> PulseSpectrum:
    return PulseSpectrum(lambda f: np.sqrt(_rc_shape(f, alpha)), (1 + alpha) / 2, f"rrc{alpha}", alpha)


def rc_spectrum(alpha: float) -> PulseSpectrum:
    """Pulse whose spectrum (not squared spectrum) is raised-cosine shaped."""
    e = math.sqrt(1 - alpha / 4)  # energy of RC(f): int RC^2 df
    return PulseSpectrum(lambda f: _rc_shape(f, alpha) / e, (1 + alpha) / 2, f"rc{alpha}", alpha)


def gaussian_spectrum(bt: float, fmax: float = 2.0) -> PulseSpectrum:
    """Gaussian pulse with 3-dB bandwidth ``bt``: ``|P(f)|^2 = 2^(-f^2 / bt^2)``."""
    if bt <= 0:
        raise ValueError("bt must be positive")
    f = np.linspace(-fmax, fmax, 8193)
    norm = math.sqrt(np.trapezoid(2.0 ** (-f ** 2 / bt ** 2), f))
    return PulseSpectrum(lambda x: 2.0 ** (-np.asarray(x) ** 2 / (2 * bt ** 2)) / norm,
                         fmax, f"gauss{bt}", 0.0)


def psd_spectrum(psd, label: str = "psd") -> PulseSpectrum:
    """Pulse from a symbol-rate power spectrum ``|P(w)|^2`` on the standard grid."""
    psd = np.asarray(psd, dtype=float)
    n = len(psd)
    w = -np.pi + 2 * np.pi * np.arange(n) / n
    amp = lambda f: np.sqrt(np.maximum(np.interp(2 * np.pi * np.asarray(f), w, psd, 0, 0), 0))
    sup = np.flatnonzero(psd > 0)
    fmax = float(np.max(np.abs(w[sup])) / (2 * np.pi) + 1.0 / n) if sup.size else 0.5
    return PulseSpectrum(amp, min(fmax, 0.5), label, 0.0)


# ---------------------------------------------------------------- packed channel

@dataclass(frozen=True)
class PackedChannel:
    """Matched-filter statistics of a packed system for the central user."""

    g: AutocorrTaps
    tau: float
    nu_f: float | None
    adjacent: dict = field(default_factory=dict, repr=False)  # l -> taps over n
    adj_lag: int = 0

    @property
    def model(self) -> UngerboeckModel:
        return UngerboeckModel(self.g)


def packed_channel(pulse: PulseSpectrum | float, tau: float, nu_f: float | None = None,
                   J: int = 2, tol: float = 1e-6, n_max: int = 200) -> PackedChannel:
    """ISI taps ``g_i = g(i tau)`` and adjacent-carrier coefficients.

    ``pulse`` may be a roll-off value, which selects the analytic RRC
    autocorrelation. ``nu_f=None`` means a single carrier.
    """
    if isinstance(pulse, (int, float)):
        alpha = float(pulse)
        gfun = lambda t: rc_autocorr(t, alpha).astype(complex)
        spec = rrc_spectrum(alpha)
    else:
        spec = pulse
        gfun = spec.acf
    g = gfun(np.arange(n_max + 1) * tau)
    g = g / g[0].real
    keep = np.flatnonzero(np.abs(g) >= tol)
    g = AutocorrTaps(g[: keep[-1] + 1])
    adj = {}
    lag = 0
    if nu_f is not None and nu_f < 2 * spec.fmax - 1e-12:
        lag = g.memory
        for l in range(-J, J + 1):
            if l == 0:
                continue
            adj[l] = np.array([spec.cross(n, l, tau, nu_f) for n in range(-lag, lag + 1)])
    return PackedChannel(g, tau, nu_f, adj, lag)


def _simulate_mf(ch: PackedChannel, c, N0, rng, constellation):
    """Matched-filter samples of the central user including adjacent carriers."""
    y = simulate_ungerboeck(UngerboeckModel(ch.g, N0), c, rng)
    N = len(c)
    k = np.arange(N)
    for l, taps in ch.adjacent.items():
        cl = constellation.points[rng.integers(0, constellation.M, N + 2 * ch.adj_lag)]
        # sum_n h(n, l) c_{k-n}, taps index n = -lag..lag
        conv = np.convolve(cl, taps)[2 * ch.adj_lag:2 * ch.adj_lag + N]
        y = y + conv * np.exp(-2j * np.pi * l * ch.nu_f * ch.tau * k)
    return y


# ---------------------------------------------------------------- MMSE equalizer

@dataclass(frozen=True)
class MmseEqualizer:
    """Wiener equalizer ``c^_k = sum_j conj(w_j) x_{k*gamma + j - delay}``."""

    taps: np.ndarray
    delay: int
    oversampling: int
    mse: float
    gain: float
    resid_var: float

    def apply(self, x, N):
        x = np.asarray(x, dtype=complex)
        g = self.oversampling
        out = np.zeros(N, dtype=complex)
        for j, w in enumerate(self.taps):
            idx = np.arange(N) * g + j - self.delay
            ok = (idx >= 0) & (idx < len(x))
            out[ok] += np.conj(w) * x[idx[ok]]
        return out


def design_mmse_equalizer(gfun, N0: float, n_taps: int = 22, oversampling: int = 1,
                          Es: float = 1.0, span: int = 64, extra_var: float = 0.0) -> MmseEqualizer:
    """Wiener solution on matched-filter samples with the best decision delay.

    ``gfun(t)`` is the pulse autocorrelation with the symbol interval as time
    unit; ``extra_var`` adds white interference power to the observation.
    """
    if not 1 <= n_taps <= 22:
        raise ValueError("tap budget must lie in 1..22")
    gam = oversampling
    best = None
    tgrid = np.arange(-(n_taps + 2 * span * gam), n_taps + 2 * span * gam + 1) / gam
    gt = dict(zip(np.round(tgrid * gam).astype(int), np.asarray(gfun(tgrid))))

    def gv(m):  # g(m / gam)
        return gt.get(int(m), 0.0)

    i_rng = np.arange(-span, span + 1)
    for D in range(n_taps):
        pos = np.arange(n_taps) - D  # sample offsets relative to k*gam
        Gm = np.array([[gv(p - i * gam) for i in i_rng] for p in pos])
        R = Es * Gm @ Gm.conj().T
        R += N0 * np.array([[gv(a - b) for b in pos] for a in pos]) + extra_var * np.eye(n_taps)
        p = Es * np.array([gv(q) for q in pos])
        try:
            w = np.linalg.solve(R, p)
        except np.linalg.LinAlgError:
            raise ValueError("singular covariance") from None
        mse = float(np.real(Es - np.vdot(p, w)))
        if best is None or mse < best[0] - 1e-15:
            gain = float(np.real(np.vdot(w, p)) / Es)
            out_var = float(np.real(np.vdot(w, R @ w)))
            best = (mse, w, D, gain, out_var - gain ** 2 * Es)
    mse, w, D, gain, rv = best
    return MmseEqualizer(w, D, gam, mse, gain, max(rv, 1e-300))


# ---------------------------------------------------------------- detector evaluation

def _forney_taps(ch: PackedChannel, energy_tol: float = 1e-9, max_taps: int = 512):
    """Whitened-domain taps; packed spectra may have a zero band, so the factor is floored."""
    try:
        return spectral_factorize(ch.g).taps
    except ValueError:
        pass
    f = min_phase_from_spectrum(ch.g.spectrum(1 << 15).values, max_taps)
    e = np.cumsum(np.abs(f) ** 2)
    n = int(np.searchsorted(e, (1 - energy_tol) * e[-1])) + 1
    f = f[:n]
    return f * np.sqrt(ch.g.taps[0].real / np.sum(np.abs(f) ** 2))


def evaluate_detector(ch: PackedChannel, detector: str, constellation: Constellation,
                      esn0_db: float, L: int = 0, n_symbols: int = 10000, blocks: int = 10,
                      seed: int = 0, rails: bool | None = None, noise_scale: float = 1.0,
                      n_taps: int = 22) -> AirEstimate:
    """Monte Carlo AIR of one detector on a packed channel at ``E_s/N0``."""
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    N0 = float(db2lin(-esn0_db))
    if rails is None:
        rails = constellation.kind == "qpsk" and detector.startswith("trellis")
    alpha = make_constellation("bpsk").points / math.sqrt(2) if rails else constellation
    forney_domain = detector in ("sbs-wf", "trellis-forney")
    if forney_domain and ch.adjacent:
        raise NotImplementedError("whitened-domain detectors support single-carrier packing only")

    if forney_domain:
        f = _forney_taps(ch)
        fm = ForneyModel(ChannelTaps(f), N0)
        channel = lambda c, rng: simulate_forney(fm, c, rng)
    else:
        channel = lambda c, rng: _simulate_mf(ch, c, N0, rng, constellation)

    # adjacent carriers are treated as extra white noise by trellis designs
    N0d = N0 + _adjacent_power(ch) / float(ch.g.taps[0].real)
    if detector == "trellis-cs":
        G = ch.g.spectrum(_grid_for(ch.g)).values
        law = design_scalar_cs(SpectrumSamples(G), N0d * noise_scale, L).law(alpha)
        return mc_air_trellis(channel, law, n_symbols, blocks, seed, rails)
    if detector == "trellis-ungerboeck":
        law = truncation_baseline(ch.g, min(L, ch.g.memory), N0d, alpha, noise_scale)
        return mc_air_trellis(channel, law, n_symbols, blocks, seed, rails)
    if detector == "trellis-forney":
        N_I = float(np.sum(np.abs(f[L + 1:]) ** 2))
        law = ForneyLaw(f[:L + 1], (N0 + N_I) * noise_scale, alpha, tail=False, real=rails)
        return mc_air_trellis(channel, law, n_symbols, blocks, seed, rails)

    # symbol-by-symbol detectors
    vals = []
    for b in range(blocks):
        rng = make_rng(seed, b)
        c = constellation.points[rng.integers(0, constellation.M, n_symbols)]
        x = channel(c, rng)
        if detector == "sbs-mf":
            N_I = float(2 * np.sum(np.abs(ch.g.taps[1:]) ** 2)) + _adjacent_power(ch)
            r, h00, var = x[:n_symbols], float(ch.g.taps[0].real), N0 * ch.g.taps[0].real + N_I
        elif detector == "sbs-wf":
            N_I = float(np.sum(np.abs(f[1:]) ** 2))
            r, h00, var = x[:n_symbols], f[0], N0 + N_I
        else:
            gfun = _acf_interp(ch)
            eq = design_mmse_equalizer(gfun, N0, n_taps, 1, extra_var=_adjacent_power(ch))
            r, h00, var = eq.apply(x, n_symbols), eq.gain, eq.resid_var
        vals.append(sbs_air(r, c, h00, var * noise_scale, constellation, blocks=1).value)
    return aggregate(vals, n_symbols, seed)


def _adjacent_power(ch: PackedChannel) -> float:
    return float(sum(np.sum(np.abs(t) ** 2) for t in ch.adjacent.values()))


def _acf_interp(ch: PackedChannel):
    g = ch.g.full()
    nu = ch.g.memory

    def gfun(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        k = np.round(t).astype(int)
        ok = np.isclose(t, k) & (np.abs(k) <= nu)
        out[ok] = g[k[ok] + nu]
        return out
    return gfun


def _grid_for(g: AutocorrTaps) -> int:
    n = 4096
    while n < 4 * (2 * g.memory + 1):
        n *= 2
    return n


# ---------------------------------------------------------------- fixed point

@dataclass(frozen=True)
class FixedPoint:
    esn0_db: float
    I: float
    ok: bool = True


def ebn0_fixed_point(I_of_esn0_db: Callable[[float], float], ebn0_db: float,
                     bracket: tuple[float, float] = (-10.0, 30.0), tol_db: float = 1e-9) -> FixedPoint:
    """Solve ``E_s/N0 = I(E_s/N0) * E_b/N0`` (all in dB on the left).

    The root of ``x - ebn0_db - 10 log10 I(x)`` is bracketed on ``bracket``.
    A rate of zero gives the degenerate solution ``E_s = 0`` (``ok=False``).
    """
    def f(x):
        I = I_of_esn0_db(x)
        if I <= 0:
            return math.inf
        return x - ebn0_db - 10 * math.log10(I)

    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if math.isinf(flo) and math.isinf(fhi):
        return FixedPoint(-math.inf, 0.0, False)
    if not (flo < 0 < fhi or fhi < 0 < flo):
        raise ValueError(f"no fixed point in [{lo}, {hi}] dB (f = {flo:.3g}, {fhi:.3g})")
    x = brentq(f, lo, hi, xtol=tol_db, rtol=1e-15)
    return FixedPoint(float(x), float(I_of_esn0_db(x)), True)


# ---------------------------------------------------------------- grid optimization

@dataclass(frozen=True)
class PackingGridResult:
    """AIR tables per grid point and the optimized ASE per ``E_b/N0``."""

    taus: np.ndarray
    nus: np.ndarray
    esn0_db: np.ndarray
    air: np.ndarray = field(repr=False)      # (n_tau, n_nu, n_snr)
    stderr: np.ndarray = field(repr=False)
    ebn0_db: np.ndarray = field(default=None)
    eta_max: np.ndarray = field(default=None)
    eta_se: np.ndarray = field(default=None)
    tau_opt: np.ndarray = field(default=None)
    nu_opt: np.ndarray = field(default=None)
    partial: bool = False

    def eta_at(self, ebn0_db: float, i: int, j: int) -> tuple[float, float]:
        """ASE and its standard error for grid point ``(i, j)``."""
        return _eta_point(self.air[i, j], self.stderr[i, j], self.esn0_db, ebn0_db,
                          self.taus[i] * self.nus[j])


def _eta_point(air, se, esn0, ebn0_db, ft):
    spl = CubicSpline(esn0, np.maximum(air, 1e-12))
    sspl = CubicSpline(esn0, se)
    fp = ebn0_fixed_point(lambda x: float(spl(np.clip(x, esn0[0], esn0[-1]))), ebn0_db,
                          (esn0[0], esn0[-1]))
    if not fp.ok:
        return 0.0, 0.0
    return fp.I / ft, float(abs(sspl(fp.esn0_db))) / ft


def optimize_ase(constellation: Constellation, pulse, detector: str, taus, nus=None,
                 esn0_db=(0, 3, 6, 9, 12), ebn0_db=(), L: int = 0, n_symbols: int = 10000,
                 blocks: int = 10, seed: int = 0, J: int = 2, refine: int = 1,
                 budget_s: float | None = None) -> PackingGridResult:
    """Grid search of the ASE over ``(tau, nu_f)``.

    ``nus=None`` evaluates single-carrier time packing with ``nu_f = 1 + excess``.
    """
    import time

    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    spec = rrc_spectrum(float(pulse)) if isinstance(pulse, (int, float)) else pulse
    single = nus is None
    nus = np.array([1 + spec.excess]) if single else np.atleast_1d(np.asarray(nus, dtype=float))
    esn0 = np.asarray(esn0_db, dtype=float)
    if taus.size == 0 or nus.size == 0 or esn0.size == 0:
        raise ValueError("empty grid")
    air = np.full((len(taus), len(nus), len(esn0)), np.nan)
    se = np.full_like(air, np.nan)
    t0 = time.monotonic()
    partial = False
    for i, tau in enumerate(taus):
        for j, nu in enumerate(nus):
            ch = packed_channel(pulse, tau, None if single else nu, J)
            for k, s in enumerate(esn0):
                if budget_s is not None and time.monotonic() - t0 > budget_s:
                    partial = True
                    break
                job = seed + 1000003 * (i * len(nus) + j) + 101 * k
                est = evaluate_detector(ch, detector, constellation, s, L, n_symbols, blocks, job)
                air[i, j, k], se[i, j, k] = est.value, est.stderr
    if partial:
        warnings.warn("budget exceeded; partial grid returned", RuntimeWarning)
    ebn0 = np.atleast_1d(np.asarray(ebn0_db, dtype=float))
    eta_max = np.full(len(ebn0), np.nan)
    eta_se = np.full(len(ebn0), np.nan)
    topt = np.full(len(ebn0), np.nan)
    nopt = np.full(len(ebn0), np.nan)
    ft_tau, ft_nu, table = taus, nus, air
    if refine > 1 and len(taus) > 1:
        ft_tau = np.linspace(taus[0], taus[-1], (len(taus) - 1) * refine + 1)
        if len(nus) > 1:
            ft_nu = np.linspace(nus[0], nus[-1], (len(nus) - 1) * refine + 1)
        pts = np.array(np.meshgrid(ft_tau, ft_nu, indexing="ij")).reshape(2, -1).T
        table = np.empty((len(ft_tau), len(ft_nu), len(esn0)))
        for k in range(len(esn0)):
            if len(nus) > 1:
                f = RegularGridInterpolator((taus, nus), air[:, :, k])
                table[:, :, k] = f(pts).reshape(len(ft_tau), len(ft_nu))
            else:
                table[:, 0, k] = np.interp(ft_tau, taus, air[:, 0, k])
    for e, eb in enumerate(ebn0):
        best = (-np.inf, 0.0, np.nan, np.nan)
        for i, tau in enumerate(ft_tau):
            for j, nu in enumerate(ft_nu):
                row = table[i, j]
                if np.any(np.isnan(row)):
                    continue
                ii = int(np.argmin(np.abs(taus - tau)))
                jj = int(np.argmin(np.abs(nus - nu)))
                try:
                    eta, s = _eta_point(row, se[ii, jj], esn0, eb, tau * nu)
                except ValueError:
                    continue
                if eta > best[0]:
                    best = (eta, s, tau, nu)
        eta_max[e], eta_se[e], topt[e], nopt[e] = best
    return PackingGridResult(taus, nus, esn0, air, se, ebn0, eta_max, eta_se, topt, nopt, partial)


def orthogonal_eta(constellation: Constellation, ebn0_db: float, excess: float) -> float:
    """ASE of orthogonal signalling (``tau = 1``, ``nu_f = 1 + excess``)."""
    fp = ebn0_fixed_point(lambda x: awgn_mutual_information(constellation, float(db2lin(x))),
                          ebn0_db, (-20.0, 40.0))
    return fp.I / (1 + excess)


# ---------------------------------------------------------------- faster-than-Nyquist

def psd_channel(psd, length: int = 64, sps: int = 8, tol: float = 1e-6) -> PackedChannel:
    """Matched-filter channel of a symbol-rate power spectrum ``|P(w)|^2``.

    The spectrum is realized as a windowed time pulse of ``length`` symbols,
    so the resulting autocorrelation is always a valid (nonnegative) one.
    """
    from .txfilter import realize_pulse

    pulse, _ = realize_pulse(np.asarray(psd, dtype=float), length=length, sps=sps)
    g = ungerboeck_from_pulse(pulse, 1.0, rel_tol=tol).g
    return PackedChannel(AutocorrTaps(g.taps / g.taps[0].real), 1.0, None)


@dataclass(frozen=True)
class FtnComparison:
    """ASE per pulse at fixed ``2WT`` (bit/s/Hz), with standard errors."""

    two_wt: float
    L: int
    ebn0_db: np.ndarray
    eta: dict
    stderr: dict
    air: dict = field(repr=False)


def ftn_comparison(two_wt: float, L: int, ebn0_db, esn0_db, alphas=(0.1, 0.2),
                   constellation: Constellation | None = None, n_symbols: int = 10000,
                   blocks: int = 10, seed: int = 0, n_starts: int = 3) -> FtnComparison:
    """CS detection of the optimized pulse against RRC pulses at the same ``2WT``.

    The RRC pulse with roll-off ``a`` is sent at ``tau = 2WT / (1 + a)`` so
    all pulses occupy the same band and share the ASE denominator.
    """
    from .txfilter import ftn_channel, optimize_transmit_filter

    con = constellation or make_constellation("bpsk")
    esn0 = np.asarray(esn0_db, dtype=float)
    band = ftn_channel(two_wt)
    chans = {f"rrc{a}": [packed_channel(a, two_wt / (1 + a))] * len(esn0) for a in alphas}
    chans["optimized"] = []
    for s in esn0:
        spec = optimize_transmit_filter(band, float(db2lin(-s)), L, n_starts=n_starts, seed=seed)
        chans["optimized"].append(psd_channel(spec.psd * band))
    air, se = {}, {}
    for name, chs in chans.items():
        vals = [evaluate_detector(ch, "trellis-cs", con, s, L, n_symbols, blocks,
                                  seed + 7919 * k) for k, (ch, s) in enumerate(zip(chs, esn0))]
        air[name] = np.array([v.value for v in vals])
        se[name] = np.array([v.stderr for v in vals])
    ebn0 = np.atleast_1d(np.asarray(ebn0_db, dtype=float))
    eta, eta_se = {}, {}
    for name in chans:
        pts = [_eta_point(air[name], se[name], esn0, e, two_wt) for e in ebn0]
        eta[name] = np.array([p[0] for p in pts])
        eta_se[name] = np.array([p[1] for p in pts])
    return FtnComparison(two_wt, L, ebn0, eta, eta_se, air)
