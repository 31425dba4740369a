"""Nonlinear satellite transponder (IMUX, Saleh HPA, OMUX) and Volterra receiver models.

Waveforms are sampled ``sps`` times per symbol (``T = 1``); a complex noise
sample of variance ``N0 * sps`` corresponds to two-sided PSD ``N0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import firwin2

from .air import AirEstimate, mc_air_trellis
from .dsp import (AutocorrTaps, Constellation, PulseSamples, complex_noise, db2lin,
                  make_rng, rrc_pulse)
from .models import BlockUngerboeckModel
from .shortening import design_block_cs, design_scalar_cs, truncation_baseline

__all__ = [
    "SalehHpa", "TransponderSpec", "TransponderOutput", "design_mux_filter",
    "default_transponder", "modulate", "simulate_transponder", "nominal_input_power", "VolterraModel",
    "fit_volterra", "psk_equivalent_pulse", "SymbolVectorStats", "lifted_alphabet",
    "apsk_block_statistics", "SatelliteLink", "SatelliteAir", "satellite_air",
]


@dataclass(frozen=True)
class SalehHpa:
    """Saleh amplifier ``A(r) = aa r / (1 + ba r^2)``, ``Phi(r) = ap r^2 / (1 + bp r^2)``."""

    alpha_a: float = 2.1322
    beta_a: float = 1.0746
    alpha_p: float = 1.7054
    beta_p: float = 1.5072
    ibo_db: float = 0.0
    linear: bool = False

    @property
    def rho_sat(self) -> float:
        return 1.0 / math.sqrt(self.beta_a)

    @property
    def p_sat(self) -> float:
        """Output power of an unmodulated carrier at saturation."""
        return (self.alpha_a / (2 * math.sqrt(self.beta_a))) ** 2

    def am(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha_a * r / (1 + self.beta_a * r ** 2)

    def pm(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha_p * r ** 2 / (1 + self.beta_p * r ** 2)

    def __call__(self, x, input_power: float):
        """Drive so that ``input_power`` sits ``ibo_db`` below the saturation input power."""
        x = np.asarray(x, dtype=complex)
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite samples at the amplifier input")
        if self.linear:
            return x
        u = x * math.sqrt(self.rho_sat ** 2 * db2lin(-self.ibo_db) / input_power)
        r = np.abs(u)
        return self.am(r) * np.exp(1j * (np.angle(u) + self.pm(r)))


def design_mux_filter(bw3db: float, sps: int = 8, order: int = 4, span: int = 16) -> np.ndarray:
    """Linear-phase FIR with Butterworth-shaped magnitude and 3-dB bandwidth ``bw3db / T``.

    Returns ``span * sps + 1`` taps, unit DC gain, centred (zero delay when
    applied with :func:`_filt`).
    """
    fc = bw3db / 2
    nyq = sps / 2
    f = np.linspace(0, nyq, 2049)
    mag = 1 / np.sqrt(1 + (f / fc) ** (2 * order))
    taps = firwin2(span * sps + 1, f, mag, fs=sps, window=("kaiser", 6.0))
    return (taps / taps.sum()).astype(complex)


def _filt(x, taps):
    if taps is None:
        return x
    return np.convolve(x, taps, mode="same")


@dataclass(frozen=True)
class TransponderSpec:
    imux: np.ndarray | None
    omux: np.ndarray | None
    hpa: SalehHpa
    sps: int = 8


def default_transponder(ibo_db: float = 0.0, sps: int = 8, imux_bw: float = 0.94,
                        omux_bw: float = 0.85, linear: bool = False) -> TransponderSpec:
    return TransponderSpec(design_mux_filter(imux_bw, sps), design_mux_filter(omux_bw, sps),
                           SalehHpa(ibo_db=ibo_db, linear=linear), sps)


def modulate(c, pulse: PulseSamples) -> np.ndarray:
    """``s[n] = sum_k c_k p[n - k sps]``; symbol ``k`` peaks at ``k * sps + pulse.center``."""
    c = np.asarray(c, dtype=complex)
    up = np.zeros(len(c) * pulse.sps, dtype=complex)
    up[:: pulse.sps] = c
    return np.convolve(up, pulse.samples)


@dataclass(frozen=True)
class TransponderOutput:
    y: np.ndarray = field(repr=False)
    obo_db: float
    input_power: float


def simulate_transponder(x, spec: TransponderSpec, input_power: float | None = None) -> TransponderOutput:
    """IMUX, HPA and OMUX in cascade; OBO is ``P_sat`` over the output power, in dB.

    ``input_power`` is the nominal amplifier input power used to set the IBO;
    by default it is measured on this block.
    """
    if spec.sps < 8:
        raise ValueError("oversampling must be at least 8")
    u = _filt(np.asarray(x, dtype=complex), spec.imux)
    p_in = float(np.mean(np.abs(u) ** 2)) if input_power is None else input_power
    y = _filt(spec.hpa(u, p_in), spec.omux)
    p_out = float(np.mean(np.abs(y) ** 2))
    return TransponderOutput(y, 10 * math.log10(spec.hpa.p_sat / p_out), p_in)


def nominal_input_power(pulse: PulseSamples, spec: TransponderSpec, Es: float = 1.0) -> float:
    """Mean IMUX output power of i.i.d. zero-mean symbols of energy ``Es``."""
    q = pulse.samples if spec.imux is None else np.convolve(pulse.samples, spec.imux)
    return Es * float(np.sum(np.abs(q) ** 2)) / pulse.sps


# ---------------------------------------------------------------- Volterra

@dataclass(frozen=True)
class VolterraModel:
    """Kernels ``h^(2i+1)`` (rows of ``kernels``) acting on ``c |c|^(2i)``."""

    order: int
    kernels: np.ndarray = field(repr=False)  # (N_V, n)
    sps: int
    center: int
    residual_db: float = -np.inf
    residual_power: float = 0.0

    @property
    def n_v(self) -> int:
        return (self.order + 1) // 2

    def pulse(self, i: int) -> PulseSamples:
        return PulseSamples(self.kernels[i], self.sps, self.center)


def _lift(c, n_v):
    c = np.asarray(c, dtype=complex)
    a2 = np.abs(c) ** 2
    return np.stack([c * a2 ** i for i in range(n_v)], axis=-1)


def fit_volterra(order: int, spec: TransponderSpec, constellation: Constellation,
                 tx_pulse: PulseSamples, n_symbols: int = 20000, span: int = 16,
                 ridge: float = 1e-6, seed: int = 0) -> VolterraModel:
    """Ridge least-squares fit of the simplified expansion to the transponder output.

    Kernels are estimated per sampling phase over ``span + 1`` symbol lags.
    With constant-modulus probes only the kernel sum is identifiable; the
    ridge term then splits it evenly.
    """
    if order < 1 or order % 2 == 0:
        raise ValueError("order must be odd and positive")
    n_v = (order + 1) // 2
    sps = spec.sps
    rng = make_rng(seed, 0x5A7)
    c = constellation.points[rng.integers(0, constellation.M, n_symbols)]
    out = simulate_transponder(modulate(c, tx_pulse), spec, nominal_input_power(tx_pulse, spec))
    y = out.y
    u = _lift(c, n_v)
    half = span // 2
    center = half * sps
    kern = np.zeros((n_v, span * sps + 1), dtype=complex)
    res = 0.0
    cnt = 0
    ks = np.arange(half + 1, n_symbols - half - 1)
    for ph in range(sps):
        n = ks * sps + tx_pulse.center + ph
        ms = np.arange(-half, half + 1) if ph == 0 else np.arange(-half, half)
        X = np.concatenate([u[ks - m] for m in ms], axis=1)  # columns (m, i)
        t = y[n]
        A = X.conj().T @ X
        lam = ridge * np.trace(A).real / A.shape[0]
        sol = np.linalg.solve(A + lam * np.eye(A.shape[0]), X.conj().T @ t)
        e = t - X @ sol
        res += float(np.sum(np.abs(e) ** 2))
        cnt += len(t)
        sol = sol.reshape(len(ms), n_v)
        for j, m in enumerate(ms):
            idx = m * sps + ph + center
            if 0 <= idx < kern.shape[1]:
                kern[:, idx] = sol[j]
    if not np.all(np.isfinite(kern)):
        raise ValueError("ill-conditioned fit; increase ridge")
    rp = res / cnt
    rel = rp / float(np.mean(np.abs(y) ** 2))
    return VolterraModel(order, kern, sps, center, 10 * math.log10(max(rel, 1e-300)), rp)


def psk_equivalent_pulse(model: VolterraModel, modulus: float = 1.0) -> PulseSamples:
    """``sum_i h^(2i+1) modulus^(2i)``: the linear pulse seen by constant-modulus symbols."""
    w = modulus ** (2 * np.arange(model.n_v))
    return PulseSamples(w @ model.kernels, model.sps, model.center)


@dataclass(frozen=True)
class SymbolVectorStats:
    V: np.ndarray


def lifted_alphabet(constellation: Constellation, n_v: int) -> np.ndarray:
    return _lift(constellation.points, n_v)


def apsk_block_statistics(model: VolterraModel, constellation: Constellation,
                          N0: float = 1.0, T: int = 1, rel_tol: float = 1e-6):
    """Block Ungerboeck model of the kernel matched filters and the lifted-symbol correlation.

    ``G_i[m, l] = int h^(l)(t + iT) conj(h^(m)(t)) dt``. Raises for
    constellations whose lifted vectors are linearly dependent (all PSK, or
    fewer distinct ring radii than kernels).
    """
    if constellation.constant_modulus:
        raise ValueError("constant-modulus constellation: use psk_equivalent_pulse instead")
    u = lifted_alphabet(constellation, model.n_v)
    V = u.T @ u.conj() / len(u)
    V = 0.5 * (V + V.conj().T)
    ev = np.linalg.eigvalsh(V)
    if ev.min() <= 1e-10 * ev.max():
        rings = len(np.unique(np.round(np.abs(constellation.points), 9)))
        raise ValueError(f"lifted symbol correlation is singular; use order <= {2 * rings - 1}")
    h = model.kernels
    sps = model.sps * T
    n = h.shape[1]
    lmax = (n - 1) // sps
    K = model.n_v
    G = np.zeros((2 * lmax + 1, K, K), dtype=complex)
    for i in range(-lmax, lmax + 1):
        s = i * sps
        for m in range(K):
            for l in range(K):
                if s >= 0:
                    G[lmax + i, m, l] = np.sum(h[l, s:] * np.conj(h[m, :n - s])) / model.sps
                else:
                    G[lmax + i, m, l] = np.sum(h[l, :n + s] * np.conj(h[m, -s:])) / model.sps
    for i in range(lmax + 1):  # exact Hermitian symmetry
        G[lmax - i] = G[lmax + i].conj().T
    scale = np.abs(G).max()
    keep = max((i for i in range(lmax + 1) if np.abs(G[lmax + i]).max() >= rel_tol * scale), default=0)
    G = G[lmax - keep:lmax + keep + 1]
    return BlockUngerboeckModel(G, N0, V), SymbolVectorStats(V)


# ---------------------------------------------------------------- AIR glue

def _matched(r, h: PulseSamples, offset: int, N: int) -> np.ndarray:
    """``x_k = (1/sps) sum_n r[n] conj(h[n - k sps - offset + center])``."""
    y = np.convolve(r, np.conj(h.samples[::-1]))
    idx = np.arange(N) * h.sps + offset + len(h.samples) - 1 - h.center
    out = np.zeros(N, dtype=complex)
    ok = idx < len(y)
    out[ok] = y[idx[ok]]
    return out / h.sps


@dataclass(frozen=True)
class SatelliteLink:
    """Transmitter pulse, transponder and constellation of a satellite link."""

    spec: TransponderSpec
    constellation: Constellation
    tx_pulse: PulseSamples = field(repr=False)
    model: VolterraModel = field(repr=False)

    @classmethod
    def build(cls, constellation: Constellation, ibo_db: float = 0.0, rolloff: float = 0.05,
              sps: int = 8, order: int = 5, seed: int = 0, n_probe: int = 20000) -> "SatelliteLink":
        spec = default_transponder(ibo_db, sps)
        p = rrc_pulse(rolloff, span=64, sps=sps).normalized()
        return cls(spec, constellation, p, fit_volterra(order, spec, constellation, p,
                                                        n_probe, seed=seed))

    @property
    def input_power(self) -> float:
        return nominal_input_power(self.tx_pulse, self.spec)

    def channel(self, N0: float, kernels):
        """``channel(c, rng)`` returning matched-filter samples for each receive kernel."""
        ip = self.input_power

        def run(c, rng):
            c = c[:, 0] if np.ndim(c) == 2 else c  # lifted alphabets carry c first
            y = simulate_transponder(modulate(c, self.tx_pulse), self.spec, ip).y
            y = y + complex_noise(rng, len(y), N0 * self.spec.sps)
            xs = [_matched(y, k, self.tx_pulse.center, len(c)) for k in kernels]
            return xs[0] if len(xs) == 1 else np.stack(xs, axis=1)
        return run


@dataclass(frozen=True)
class SatelliteAir:
    estimate: AirEstimate
    noise_scale: float
    obo_db: float


def satellite_air(link: SatelliteLink, psat_n0_db: float, detector: str = "cs", L: int = 2,
                  n_symbols: int = 10000, blocks: int = 10, seed: int = 0,
                  noise_scales=(0.5, 1.0, 2.0, 4.0), pilot_symbols: int = 4000) -> SatelliteAir:
    """AIR of a CS or truncation detector on the simulated transponder.

    ``N0 = P_sat T / (P_sat T / N0)``. The design noise level is
    ``s * (N0 + residual)`` with ``s`` picked from ``noise_scales`` on a
    separate pilot run, so the reported estimate stays unbiased.
    """
    if detector not in ("cs", "truncation"):
        raise ValueError(f"unknown detector {detector!r}")
    con = link.constellation
    N0 = link.spec.hpa.p_sat / db2lin(psat_n0_db)
    base = N0 + link.model.residual_power / link.spec.sps
    if con.constant_modulus:
        mod = float(np.abs(con.points[0]))
        hbar = psk_equivalent_pulse(link.model, mod)
        g = _pulse_acf(hbar)
        channel = link.channel(N0, [hbar])

        def make_law(s):
            if detector == "cs":
                return design_scalar_cs(g, base * s, L).law(con)
            return truncation_baseline(g, min(L, g.memory), base * s, con)
    else:
        blk, _ = apsk_block_statistics(link.model, con)
        kernels = [link.model.pulse(i) for i in range(link.model.n_v)]
        channel = link.channel(N0, kernels)
        alpha = lifted_alphabet(con, link.model.n_v)
        if detector != "cs":
            raise ValueError("truncation baseline is implemented for the PSK path only")

        def make_law(s):
            return design_block_cs(L, base * s, G=blk.spectrum().values, V=blk.V).law(alpha)

    scales = list(noise_scales)
    if len(scales) > 1:
        pil = [mc_air_trellis(channel, make_law(s), pilot_symbols, 2, seed + 99991).value
               for s in scales]
        s_best = scales[int(np.argmax(pil))]
    else:
        s_best = scales[0]
    est = mc_air_trellis(channel, make_law(s_best), n_symbols, blocks, seed)
    rng = make_rng(seed, 0x0B0)
    c = con.points[rng.integers(0, con.M, 4000)]
    obo = simulate_transponder(modulate(c, link.tx_pulse), link.spec, link.input_power).obo_db
    return SatelliteAir(est, float(s_best), obo)


def _pulse_acf(p: PulseSamples, rel_tol: float = 1e-6) -> AutocorrTaps:
    s = p.samples
    n = len(s)
    lmax = (n - 1) // p.sps
    g = np.array([np.sum(s[i * p.sps:] * np.conj(s[:n - i * p.sps])) for i in range(lmax + 1)]) / p.sps
    return AutocorrTaps(g).trimmed(rel_tol)
