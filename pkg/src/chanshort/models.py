"""Discrete-time observation models (Ungerboeck, Forney, block) and simulators.

Finite blocks use zero symbol padding before ``k = 0`` and after ``k = N - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dsp import (DEFAULT_GRID, AutocorrTaps, ChannelTaps, PulseSamples,
                  SpectrumSamples, complex_noise, dtft, idtft_taps)

__all__ = [
    "UngerboeckModel", "ForneyModel", "BlockUngerboeckModel", "FdmSpec",
    "ungerboeck_from_pulse", "pulse_autocorr", "spectral_factorize",
    "simulate_forney", "simulate_ungerboeck", "simulate_block_ungerboeck",
    "fdm_stationary_model",
]


# ---------------------------------------------------------------- factorization

def _autocorr_full(h):
    return np.convolve(h, np.conj(h[::-1]))


def _polish(h, g_full):
    """Least-squares refinement of ``h`` so that ``h (x) h*_- = g``."""
    n = len(h)

    def res(x):
        d = _autocorr_full(x[:n] + 1j * x[n:]) - g_full
        return np.concatenate([d.real, d.imag])

    sol = least_squares(res, np.concatenate([h.real, h.imag]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * n)
    return sol.x[:n] + 1j * sol.x[n:]


def _factor_roots(g_full, nu):
    r = np.roots(g_full)
    r = r[np.argsort(np.abs(r))][:nu]
    return np.poly(r) if nu else np.ones(1, dtype=complex)


def _factor_cepstral(g: AutocorrTaps, n_omega, floor):
    return min_phase_from_spectrum(g.spectrum(n_omega).values, g.memory + 1, floor)


def min_phase_from_spectrum(G, n_taps: int, floor: float = 1e-10) -> np.ndarray:
    """Minimum-phase taps (first ``n_taps``) whose power spectrum is ``max(G, floor max G)``.

    ``G`` is sampled on the standard grid ``-pi + 2 pi n / len(G)``. Useful
    when the spectrum has a zero band and no exact finite factor exists.
    """
    G = np.asarray(G, dtype=float)
    n = len(G)
    G = np.maximum(G, floor * G.max())
    c = np.fft.ifft(np.fft.ifftshift(np.log(G)))
    fold = np.zeros_like(c)
    half = n // 2
    fold[0] = c[0] / 2
    fold[1:half] = c[1:half]
    fold[half] = c[half] / 2
    return np.fft.ifft(np.exp(np.fft.fft(fold)))[:n_taps]


def spectral_factorize(g: AutocorrTaps, method: str = "auto",
                       n_omega: int = DEFAULT_GRID, tol: float = 1e-9) -> ChannelTaps:
    """Minimum-phase ``h`` with ``h (x) h*_- = g``.

    ``method="roots"`` picks the inner half of the roots of ``z^nu G(z)``;
    ``"cepstral"`` folds the log-spectrum cepstrum. Both are refined by
    least squares on the autocorrelation identity. ``"auto"`` uses roots for
    memory up to 24.
    """
    g0 = float(g.taps[0].real)
    if g0 <= 0:
        if np.all(g.taps == 0):
            return ChannelTaps(np.zeros(1))
        raise ValueError("g_0 must be positive")
    grid = max(n_omega, 4 * (2 * g.memory + 1))
    grid = 1 << (grid - 1).bit_length()
    G = g.spectrum(grid).values
    i = int(np.argmin(G))
    if G[i] < -tol * g0 - 1e-9 * g0:
        w = -np.pi + 2 * np.pi * i / grid
        raise ValueError(f"spectrum negative ({G[i]:.3e} at w={w:.4f}); not factorizable")
    nu = g.memory
    if nu == 0:
        return ChannelTaps(np.array([np.sqrt(g0)]))
    full = g.full()
    if method == "auto":
        method = "roots" if nu <= 24 else "cepstral"
    if method == "roots":
        h = _factor_roots(full, nu)
        h = h * np.sqrt(g0 / np.sum(np.abs(h) ** 2))
    elif method == "cepstral":
        h = _factor_cepstral(g, grid, 1e-12)
    else:
        raise ValueError(f"unknown method {method!r}")
    if nu <= 64:
        h = _polish(h, full)
    if abs(h[0]) > 0:
        h = h * np.exp(-1j * np.angle(h[0]))
    return ChannelTaps(h)


# ---------------------------------------------------------------- models

@dataclass(frozen=True)
class ForneyModel:
    """White-noise model ``r_k = sum_i h_i c_{k-i} + w_k``, ``E|w|^2 = N0``."""

    h: ChannelTaps
    N0: float

    @property
    def memory(self) -> int:
        return self.h.memory


@dataclass(frozen=True)
class UngerboeckModel:
    """Matched-filter model ``y_k = sum_i g_i c_{k-i} + n_k`` with noise ACF ``N0 g_i``.

    ``noise_factor`` holds two-sided taps ``f`` (lag of element 0 is
    ``factor_lag``) whose autocorrelation equals ``g``; the simulator colors
    white noise with them.
    """

    g: AutocorrTaps
    N0: float = 1.0
    noise_factor: np.ndarray | None = field(default=None, repr=False)
    factor_lag: int = 0

    @property
    def memory(self) -> int:
        return self.g.memory

    @classmethod
    def from_forney(cls, fm: ForneyModel) -> "UngerboeckModel":
        return cls(fm.h.autocorr(), fm.N0, fm.h.taps, 0)

    def with_n0(self, N0: float) -> "UngerboeckModel":
        return UngerboeckModel(self.g, N0, self.noise_factor, self.factor_lag)

    def factor(self) -> tuple[np.ndarray, int]:
        if self.noise_factor is not None:
            return self.noise_factor, self.factor_lag
        if self.memory <= 24:
            return spectral_factorize(self.g).taps, 0
        # zero-phase square root of the spectrum; valid for coloring noise
        n = DEFAULT_GRID
        while n < 8 * (self.memory + 1):
            n *= 2
        G = np.maximum(self.g.spectrum(n).values, 0)
        span = 2 * self.memory + 32
        f = idtft_taps(SpectrumSamples(np.sqrt(G).astype(complex)), span)
        return f, -span


@dataclass(frozen=True)
class BlockUngerboeckModel:
    """Block model ``y_k = sum_i G_i x_{k-i} + n_k``; ``G`` holds lags ``-Lg .. Lg``."""

    G: np.ndarray
    N0: float = 1.0
    V: np.ndarray | None = None

    def __post_init__(self):
        G = np.asarray(self.G, dtype=complex)
        if G.ndim != 3 or G.shape[1] != G.shape[2] or G.shape[0] % 2 == 0:
            raise ValueError("G must have shape (2*Lg+1, K, K)")
        Lg = G.shape[0] // 2
        for i in range(Lg + 1):
            if not np.allclose(G[Lg - i], G[Lg + i].conj().T, atol=1e-12):
                raise ValueError("G_{-i} must equal G_i^H")
        object.__setattr__(self, "G", G)
        if self.V is not None:
            V = np.asarray(self.V, dtype=complex)
            if V.shape != (self.K, self.K) or np.linalg.eigvalsh(V).min() <= 0:
                raise ValueError("V must be Hermitian positive definite")
            object.__setattr__(self, "V", V)

    @property
    def K(self) -> int:
        return self.G.shape[1]

    @property
    def memory(self) -> int:
        return self.G.shape[0] // 2

    def spectrum(self, n_omega: int = DEFAULT_GRID) -> SpectrumSamples:
        s = dtft(self.G, n_omega, first_lag=-self.memory).values
        return SpectrumSamples(0.5 * (s + np.conj(np.swapaxes(s, 1, 2))))


@dataclass(frozen=True)
class FdmSpec:
    """Multicarrier layout: carrier ``l`` uses ``pulses[l]`` at frequency ``l * F``."""

    pulses: tuple
    F: float
    T: float = 1.0

    @property
    def K(self) -> int:
        return len(self.pulses)


# ---------------------------------------------------------------- pulse statistics

def _sample_acf(p: PulseSamples):
    """Sampled ACF with ``r[c + m] = g(m / sps)``; returns ``(r, c)``."""
    s = p.samples
    r = np.correlate(s, s, mode="full") / p.sps
    return r, len(s) - 1


def pulse_autocorr(p: PulseSamples, t) -> np.ndarray:
    """``g(t) = int p(s) p*(s - t) ds`` at arbitrary lags (band-limited interpolation)."""
    r, c = _sample_acf(p)
    m = np.arange(len(r)) - c
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.array([np.dot(r, np.sinc(p.sps * tt - m)) for tt in t])


def ungerboeck_from_pulse(p: PulseSamples, T: float = 1.0, rel_tol: float = 1e-6) -> UngerboeckModel:
    """ISI taps ``g_i = int p(t) p*(t - iT) dt`` of a pulse signalled every ``T``."""
    if p.sps < 4:
        raise ValueError("pulse must be sampled with at least 4 samples per symbol")
    if not np.all(np.isfinite(p.samples)):
        raise ValueError("pulse contains non-finite samples")
    span = (len(p.samples) - 1) / p.sps
    nmax = int(np.ceil(span / T)) + 1
    lags = np.arange(nmax + 1) * T
    if np.allclose(lags * p.sps, np.round(lags * p.sps)):
        r, c = _sample_acf(p)
        idx = c + np.round(lags * p.sps).astype(int)
        g = np.zeros(len(lags), dtype=complex)
        ok = idx < len(r)
        g[ok] = r[idx[ok]]
    else:
        g = pulse_autocorr(p, lags)
    g = AutocorrTaps(g).trimmed(rel_tol)
    return UngerboeckModel(g)


# ---------------------------------------------------------------- simulators

def simulate_forney(model: ForneyModel, c, rng: np.random.Generator) -> np.ndarray:
    """Forney observation of length ``N + nu`` (tail included)."""
    c = np.asarray(c, dtype=complex)
    if c.size < 1:
        raise ValueError("need at least one symbol")
    w = complex_noise(rng, len(c) + model.memory, model.N0)
    return np.convolve(model.h.taps, c) + w


def simulate_ungerboeck(model: UngerboeckModel, c, rng: np.random.Generator) -> np.ndarray:
    """Matched-filter observation of length ``N``; noise ACF ``N0 g_i``."""
    c = np.asarray(c, dtype=complex)
    N = len(c)
    if N < 1:
        raise ValueError("need at least one symbol")
    nu = model.memory
    s = np.convolve(model.g.full(), c)[nu:nu + N]
    f, lag0 = model.factor()
    # n_k = sum_j conj(f_j) w_{k+j}; draw white noise covering all needed indices
    # n_k = sum_j conj(f_j) w_{k+j}; buffer element 0 is white sample index lag0
    w = complex_noise(rng, N + len(f) - 1, model.N0)
    return s + np.correlate(w, f, mode="valid")


def simulate_block_ungerboeck(model: BlockUngerboeckModel, x, rng: np.random.Generator,
                              n_omega: int = 1024) -> np.ndarray:
    """Block observation ``(N, K)``; noise coloured by the Hermitian root of ``G(w)``."""
    x = np.asarray(x, dtype=complex)
    N, K = x.shape
    Lg = model.memory
    y = np.zeros((N, K), dtype=complex)
    for i in range(-Lg, Lg + 1):
        Gi = model.G[Lg + i]
        lo, hi = max(0, i), min(N, N + i)
        y[lo:hi] += x[lo - i:hi - i] @ Gi.T
    S = model.spectrum(max(n_omega, 4 * (2 * Lg + 1))).values
    ev, U = np.linalg.eigh(S)
    root = np.einsum("nij,nj,nkj->nik", U, np.sqrt(np.maximum(ev, 0)), U.conj())
    span = 2 * Lg + 16
    F = idtft_taps(SpectrumSamples(root), span)
    w = complex_noise(rng, (N + 2 * span, K), model.N0)
    for j in range(-span, span + 1):
        y += w[span - j:span - j + N] @ F[span + j].T
    return y


# ---------------------------------------------------------------- FDM

def fdm_stationary_model(spec: FdmSpec, max_lag: int = 64,
                         energy_tol: float = 1e-4) -> tuple[BlockUngerboeckModel, np.ndarray]:
    """Stationary block model of a multicarrier system.

    Returns the model and the per-carrier rotation ``exp(j 2 pi F_l T)``;
    symbols map as ``x_k = c_k * rot**k`` and observations as ``y~_k = y_k * rot**k``.
    """
    K = spec.K
    if not 1 <= K <= 8:
        raise ValueError("K must lie in 1..8")
    p0 = spec.pulses[0]
    for p in spec.pulses:
        if p.sps != p0.sps or len(p.samples) != len(p0.samples) or p.center != p0.center:
            raise ValueError("all carrier pulses must share sampling and support")
        if abs(p.energy - 1) > 1e-6:
            raise ValueError("pulses must have unit energy")
    sps = p0.sps
    shift = spec.T * sps
    if abs(shift - round(shift)) > 1e-9:
        raise ValueError("T must be a whole number of pulse samples")
    shift = int(round(shift))
    freqs = spec.F * np.arange(K)
    t = p0.t
    n = len(t)
    G = np.zeros((max_lag + 1, K, K), dtype=complex)
    for i in range(max_lag + 1):
        d = i * shift
        if d >= n:
            break
        for l in range(K):
            pl = np.zeros(n, dtype=complex)
            pl[d:] = spec.pulses[l].samples[:n - d]  # p_l(t - iT)
            for u in range(K):
                ph = np.exp(2j * np.pi * (freqs[u] - freqs[l]) * t)
                val = np.sum(spec.pulses[u].samples * np.conj(pl) * ph) / sps
                G[i, l, u] = val * np.exp(2j * np.pi * freqs[l] * i * spec.T)
    e = np.sum(np.abs(G) ** 2, axis=(1, 2))
    e[1:] *= 2
    tail = np.cumsum(e[::-1])[::-1]
    total = tail[0]
    keep = np.flatnonzero(tail > energy_tol * total)
    Lg = int(keep[-1]) if keep.size else 0
    if Lg >= max_lag:
        raise ValueError(f"lag truncation residual {tail[-1] / total:.2e} above tolerance")
    Gs = G[:Lg + 1]
    full = np.concatenate([np.conj(np.swapaxes(Gs[:0:-1], 1, 2)), Gs])
    full[Lg] = 0.5 * (full[Lg] + full[Lg].conj().T)
    rot = np.exp(2j * np.pi * freqs * spec.T)
    return BlockUngerboeckModel(full), rot
