"""Numeric building blocks: constellations, taps, spectra, pulses and RNG.

Conventions used throughout the package
---------------------------------------
* Symbol time is normalized, ``T = 1``.
* DTFT: ``X(w) = sum_i x_i exp(-1j*w*i)`` evaluated on the grid
  ``w_n = -pi + 2*pi*n/N`` (rectangular quadrature).
* Toeplitz matrices built from two-sided taps satisfy ``T[l, m] = x[l - m]``,
  so ``T @ c`` is the zero-padded convolution ``x * c`` truncated to ``len(c)``.
* Autocorrelation taps ``g_i = sum_j conj(h_j) h_{j+i}``; hence
  ``g_{-i} = conj(g_i)`` and ``G(w) = |H(w)|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "Constellation", "make_constellation", "ChannelTaps", "AutocorrTaps",
    "SpectrumSamples", "PulseSamples", "make_rng", "complex_noise",
    "rrc_pulse", "rc_pulse", "gaussian_pulse", "rc_autocorr", "dtft",
    "idtft_taps", "toeplitz_from_taps", "block_toeplitz", "szego_logdet",
    "db2lin", "lin2db", "DEFAULT_GRID",
]

DEFAULT_GRID = 4096

# DVB-S2 nominal ring ratios (rate 3/4 rows of the standard tables)
APSK16_RATIO = 2.85
APSK32_RATIOS = (2.84, 5.27)


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


# ---------------------------------------------------------------- constellations

@dataclass(frozen=True)
class Constellation:
    """Unit-energy symbol alphabet.

    ``kind == "gaussian"`` is a marker without points that selects the
    closed-form Gaussian-input paths.
    """

    kind: str
    points: np.ndarray | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return 0 if self.points is None else len(self.points)

    @property
    def is_gaussian(self) -> bool:
        return self.points is None

    @property
    def constant_modulus(self) -> bool:
        return self.points is not None and np.ptp(np.abs(self.points)) < 1e-12

    def bits_per_symbol(self) -> float:
        return float(np.log2(self.M))


def _rings(counts, radii, phases):
    pts = [r * np.exp(1j * (ph + 2 * np.pi * np.arange(n) / n))
           for n, r, ph in zip(counts, radii, phases)]
    return np.concatenate(pts)


def _normalize(pts):
    pts = np.asarray(pts, dtype=complex)
    pts = pts - pts.mean()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def make_constellation(kind: str) -> Constellation:
    """Return a normalized constellation (bpsk, qpsk, 8psk, 16apsk, 32apsk, gaussian)."""
    k = kind.lower()
    if k == "bpsk":
        pts = np.array([-1.0, 1.0], dtype=complex)
    elif k == "qpsk":
        pts = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2)
    elif k == "8psk":
        pts = np.exp(1j * np.pi * (2 * np.arange(8) + 1) / 8)
    elif k == "16apsk":
        pts = _rings((4, 12), (1.0, APSK16_RATIO), (np.pi / 4, np.pi / 12))
    elif k == "32apsk":
        r1, r2 = APSK32_RATIOS
        pts = _rings((4, 12, 16), (1.0, r1, r2), (np.pi / 4, np.pi / 12, 0.0))
    elif k == "gaussian":
        return Constellation("gaussian", None)
    else:
        raise ValueError(f"unsupported constellation kind {kind!r}")
    return Constellation(k, _normalize(pts))


# ---------------------------------------------------------------- taps and spectra

def _as_complex_1d(x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=complex))
    if a.ndim != 1:
        raise ValueError("expected a 1-D tap vector")
    if not np.all(np.isfinite(a)):
        raise ValueError("taps contain non-finite values")
    return a


@dataclass(frozen=True)
class ChannelTaps:
    """Causal ISI taps ``h_0 .. h_nu`` (trailing zeros trimmed)."""

    taps: np.ndarray

    def __post_init__(self):
        a = _as_complex_1d(self.taps)
        nz = np.flatnonzero(a)
        a = a[: nz[-1] + 1] if nz.size else a[:1]
        object.__setattr__(self, "taps", a)

    @property
    def memory(self) -> int:
        return len(self.taps) - 1

    def autocorr(self) -> "AutocorrTaps":
        h = self.taps
        full = np.convolve(h, np.conj(h[::-1]))
        return AutocorrTaps(full[self.memory:])

    def spectrum(self, n_omega: int = DEFAULT_GRID) -> "SpectrumSamples":
        return dtft(self.taps, n_omega)


@dataclass(frozen=True)
class AutocorrTaps:
    """Hermitian autocorrelation stored as ``g_0 .. g_nu``."""

    taps: np.ndarray

    def __post_init__(self):
        a = _as_complex_1d(self.taps).copy()
        a[0] = a[0].real
        nz = np.flatnonzero(np.abs(a) > 0)
        a = a[: nz[-1] + 1] if nz.size else a[:1]
        object.__setattr__(self, "taps", a)

    @property
    def memory(self) -> int:
        return len(self.taps) - 1

    def full(self) -> np.ndarray:
        """Two-sided taps for lags ``-nu .. nu``."""
        return np.concatenate([np.conj(self.taps[:0:-1]), self.taps])

    def spectrum(self, n_omega: int = DEFAULT_GRID) -> "SpectrumSamples":
        s = dtft(self.full(), n_omega, first_lag=-self.memory)
        return SpectrumSamples(s.values.real.copy())

    def trimmed(self, rel_tol: float = 1e-6) -> "AutocorrTaps":
        keep = np.flatnonzero(np.abs(self.taps) >= rel_tol * abs(self.taps[0]))
        return AutocorrTaps(self.taps[: keep[-1] + 1])


@dataclass(frozen=True)
class SpectrumSamples:
    """Samples on ``w_n = -pi + 2*pi*n/N``; values may be scalar or K x K per point."""

    values: np.ndarray

    def __post_init__(self):
        n = len(self.values)
        if n < 4 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 4")

    @property
    def n_omega(self) -> int:
        return len(self.values)

    @property
    def omega(self) -> np.ndarray:
        n = self.n_omega
        return -np.pi + 2 * np.pi * np.arange(n) / n

    def mean(self):
        """Rectangular-rule estimate of ``(1/2pi) int X(w) dw``."""
        return self.values.mean(axis=0)


def _grid_check(n_omega, n_taps):
    if n_omega & (n_omega - 1) or n_omega < 4:
        raise ValueError("grid size must be a power of two")
    if n_omega < 4 * n_taps:
        raise ValueError(f"grid of {n_omega} points too small for {n_taps} taps")


def dtft(taps, n_omega: int = DEFAULT_GRID, first_lag: int = 0) -> SpectrumSamples:
    """DTFT of ``taps`` (lag of element 0 is ``first_lag``) on the standard grid.

    Taps may carry trailing matrix dimensions; the transform acts on axis 0.
    """
    x = np.asarray(taps, dtype=complex)
    _grid_check(n_omega, len(x))
    lags = first_lag + np.arange(len(x))
    sign = np.where(lags % 2 == 0, 1.0, -1.0).reshape((-1,) + (1,) * (x.ndim - 1))
    buf = np.zeros((n_omega,) + x.shape[1:], dtype=complex)
    np.add.at(buf, lags % n_omega, x * sign)
    return SpectrumSamples(np.fft.fft(buf, axis=0))


def idtft_taps(spec: SpectrumSamples | np.ndarray, max_lag: int,
               min_lag: int | None = None) -> np.ndarray:
    """Inverse DTFT by grid quadrature, lags ``min_lag .. max_lag`` (default symmetric)."""
    vals = spec.values if isinstance(spec, SpectrumSamples) else np.asarray(spec)
    n = len(vals)
    lo = -max_lag if min_lag is None else min_lag
    lags = np.arange(lo, max_lag + 1)
    if len(lags) > n:
        raise ValueError("requested lag span exceeds the grid")
    t = np.fft.ifft(vals, axis=0)[lags % n]
    sign = np.where(lags % 2 == 0, 1.0, -1.0).reshape((-1,) + (1,) * (vals.ndim - 1))
    return t * sign


def toeplitz_from_taps(taps, n: int, first_lag: int = 0) -> np.ndarray:
    """``n x n`` matrix with ``T[l, m] = x[l - m]`` for taps at lags ``first_lag ..``."""
    x = np.asarray(taps, dtype=complex)
    col = np.zeros(n, dtype=complex)
    row = np.zeros(n, dtype=complex)
    for k, v in enumerate(x):
        lag = first_lag + k
        if 0 <= lag < n:
            col[lag] = v
        if -n < lag <= 0:
            row[-lag] = v
    return sla.toeplitz(col, row)


def block_toeplitz(blocks, n: int, first_lag: int = 0) -> np.ndarray:
    """Block version of :func:`toeplitz_from_taps`; ``blocks`` has shape (lags, K, K)."""
    b = np.asarray(blocks, dtype=complex)
    K = b.shape[1]
    out = np.zeros((n * K, n * K), dtype=complex)
    for k in range(len(b)):
        lag = first_lag + k
        for l in range(max(0, lag), min(n, n + lag)):
            m = l - lag
            out[l * K:(l + 1) * K, m * K:(m + 1) * K] = b[k]
    return out


def szego_logdet(g: AutocorrTaps, N: int, N0: float,
                 n_omega: int = DEFAULT_GRID) -> tuple[float, float]:
    """Finite-N and asymptotic values of ``(1/N) log2 det(I + G_N / N0)`` (bits)."""
    if N > 4096:
        raise ValueError("N above 4096 is outside the supported range")
    A = np.eye(N) + toeplitz_from_taps(g.full(), N, -g.memory) / N0
    try:
        c = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvalsh(A)
        raise ValueError(f"Toeplitz matrix not PD, min eigenvalue {ev[0]:.3e}") from None
    finite = 2 * np.sum(np.log2(np.abs(np.diag(c)))) / N
    G = g.spectrum(max(n_omega, 4 * len(g.taps))).values
    asym = float(np.mean(np.log2(1 + np.maximum(G, 0) / N0)))
    return float(finite), asym


# ---------------------------------------------------------------- pulses

@dataclass(frozen=True)
class PulseSamples:
    """Pulse sampled ``sps`` times per symbol; ``samples[center]`` is ``t = 0``."""

    samples: np.ndarray
    sps: int
    center: int

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) / self.sps)

    @property
    def t(self) -> np.ndarray:
        return (np.arange(len(self.samples)) - self.center) / self.sps

    def normalized(self) -> "PulseSamples":
        return PulseSamples(self.samples / np.sqrt(self.energy), self.sps, self.center)


def _taper(t, half_span, taper_len):
    """Raised-cosine fade over the last ``taper_len`` symbols of the span."""
    a = np.abs(t)
    w = np.ones_like(a)
    edge = half_span - taper_len
    m = a > edge
    w[m] = 0.5 * (1 + np.cos(np.pi * (a[m] - edge) / taper_len))
    return w


def _time_axis(span, sps):
    half = span // 2
    return np.arange(-half * sps, half * sps + 1) / sps, half * sps


def _check_pulse(alpha, span, sps):
    if not 0 <= alpha <= 1:
        raise ValueError("roll-off must lie in [0, 1]")
    if span < 8:
        raise ValueError("span must be at least 8 symbols")
    if sps < 1:
        raise ValueError("sps must be positive")


def _rrc_time(t, alpha):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    if alpha == 0:
        return np.sinc(t)
    sing = np.isclose(np.abs(4 * alpha * t), 1.0)
    zero = np.isclose(t, 0.0)
    reg = ~(sing | zero)
    tr = t[reg]
    out[reg] = (np.sin(np.pi * tr * (1 - alpha)) + 4 * alpha * tr * np.cos(np.pi * tr * (1 + alpha))) / (
        np.pi * tr * (1 - (4 * alpha * tr) ** 2))
    out[zero] = 1 - alpha + 4 * alpha / np.pi
    out[sing] = alpha / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * alpha))
                                     + (1 - 2 / np.pi) * np.cos(np.pi / (4 * alpha)))
    return out


def rc_autocorr(t, alpha):
    """Raised-cosine time function; autocorrelation of an infinite-span RRC pulse."""
    t = np.asarray(t, dtype=float)
    den = 1 - (2 * alpha * t) ** 2
    sing = np.isclose(den, 0.0)
    out = np.empty_like(t)
    out[~sing] = np.sinc(t[~sing]) * np.cos(np.pi * alpha * t[~sing]) / den[~sing]
    out[sing] = np.pi / 4 * np.sinc(1 / (2 * alpha)) if alpha > 0 else 1.0
    return out


def rrc_pulse(alpha: float, span: int = 32, sps: int = 8, taper_len: float = 2.0) -> PulseSamples:
    """Root-raised-cosine pulse, unit energy, tails faded by a raised cosine."""
    _check_pulse(alpha, span, sps)
    t, c = _time_axis(span, sps)
    p = _rrc_time(t, alpha) * _taper(t, span / 2, taper_len)
    return PulseSamples(p.astype(complex), sps, c).normalized()


def rc_pulse(alpha: float, span: int = 32, sps: int = 8, taper_len: float = 2.0) -> PulseSamples:
    """Pulse whose spectrum is raised-cosine shaped."""
    _check_pulse(alpha, span, sps)
    t, c = _time_axis(span, sps)
    p = rc_autocorr(t, alpha) * _taper(t, span / 2, taper_len)
    return PulseSamples(p.astype(complex), sps, c).normalized()


def gaussian_pulse(bt: float, span: int = 16, sps: int = 8) -> PulseSamples:
    """Gaussian pulse with 3-dB bandwidth-time product ``bt``."""
    if bt <= 0:
        raise ValueError("bt must be positive")
    _check_pulse(0.0, span, sps)
    t, c = _time_axis(span, sps)
    p = np.exp(-2 * np.pi ** 2 * bt ** 2 * t ** 2 / np.log(2))
    return PulseSamples(p.astype(complex), sps, c).normalized()


# ---------------------------------------------------------------- random numbers

def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator; ``key`` selects an independent substream."""
    ss = np.random.SeedSequence(int(seed) & (2 ** 64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def complex_noise(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Circular complex Gaussian samples with ``E|n|^2 = var``."""
    s = np.sqrt(var / 2)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
