"""Transmit-filter optimization for memory-L channel-shortening receivers.

The optimal power spectrum belongs to the family::

    |P(w)|^2 = max(0, N0/|H(w)| * sqrt(A(w)) - N0/|H(w)|^2),
    A(w) = sum_{l=-L..L} A_l exp(j l w),  A_{-l} = conj(A_l)

with unit average power ``(1/2pi) int |P|^2 = 1``. The coefficients are
searched numerically (Nelder-Mead, multistart).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.signal.windows import kaiser

from .dsp import ChannelTaps, PulseSamples, SpectrumSamples, dtft, idtft_taps, make_rng
from .shortening import cs_from_error_acf, design_block_cs

__all__ = [
    "TransmitFilterSpec", "WaterfillingSpec", "MimoPrecoding", "family_psd",
    "cs_objective", "optimize_transmit_filter", "flat_spec", "waterfilling",
    "combined_memory", "mimo_precoders", "realize_pulse", "ftn_channel",
]

TX_GRID = 2048


@dataclass(frozen=True)
class TransmitFilterSpec:
    """Optimized transmit spectrum.

    ``A`` holds ``A_0 .. A_L`` of the two-sided form; ``cosine_coefficients``
    gives the equivalent one-sided form ``A_0 + sum_l a_l cos(l w)`` for real
    channels (``a_l = 2 A_l``).
    """

    A: np.ndarray | None
    psd: np.ndarray = field(repr=False)
    power_residual: float
    objective: float
    converged: bool = True
    in_family: bool = True

    @property
    def cosine_coefficients(self) -> np.ndarray:
        a = np.array(self.A, dtype=complex)
        a[1:] *= 2
        return a

    @property
    def omega(self) -> np.ndarray:
        n = len(self.psd)
        return -np.pi + 2 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class WaterfillingSpec:
    theta: float
    psd: np.ndarray = field(repr=False)


def _h2(H, n_omega):
    if isinstance(H, ChannelTaps):
        return np.abs(H.spectrum(n_omega).values) ** 2
    if isinstance(H, SpectrumSamples):
        v = H.values
    else:
        v = np.asarray(H)
    return np.abs(v) ** 2 if np.iscomplexobj(v) else np.asarray(v, dtype=float)


def _a_of_w(A, w):
    """``sum_{l=-L..L} A_l e^{j l w}`` for ``A = [A_0 .. A_L]``."""
    out = np.full(w.shape, np.real(A[0]), dtype=float)
    for l in range(1, len(A)):
        out += 2 * np.real(A[l] * np.exp(1j * l * w))
    return out


def family_psd(A, h2, N0, w=None):
    """Unnormalized family member for coefficients ``A``."""
    n = len(h2)
    w = -np.pi + 2 * np.pi * np.arange(n) / n if w is None else w
    aw = np.maximum(_a_of_w(A, w), 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        habs = np.sqrt(h2)
        p = np.where(h2 > 0, N0 / habs * np.sqrt(aw) - N0 / h2, 0.0)
    return np.maximum(p, 0.0)


def _normalize_family(A, h2, N0, power):
    """Scale ``A`` so the family spectrum meets ``power``; returns (A, psd)."""
    A = np.asarray(A, dtype=complex)

    def pw(logs):
        return family_psd(A * np.exp(logs), h2, N0).mean() - power

    lo, hi = -40.0, 40.0
    if pw(hi) < 0:
        raise ValueError("power target unreachable")
    if pw(lo) > 0:
        lo = -200.0
    s = brentq(pw, lo, hi, xtol=1e-14, rtol=1e-14)
    A = A * np.exp(s)
    return A, family_psd(A, h2, N0)


def cs_objective(psd, h2, N0, L) -> float:
    """Gaussian-input CS rate ``-log2 C`` (bits) for a memory-``L`` detector."""
    G = np.asarray(psd) * np.asarray(h2)
    B = N0 / (G + N0)
    b = idtft_taps(SpectrumSamples(B.astype(complex)), L, 0)
    return cs_from_error_acf(b)[3]


def flat_spec(H, N0, L, power=1.0, n_omega=TX_GRID) -> TransmitFilterSpec:
    h2 = _h2(H, n_omega)
    psd = np.full(len(h2), power)
    return TransmitFilterSpec(None, psd, 0.0, cs_objective(psd, h2, N0, L), True, False)


def optimize_transmit_filter(H, N0: float, L: int, n_starts: int = 3, power: float = 1.0,
                             seed: int = 0, n_omega: int = TX_GRID,
                             maxiter: int = 4000) -> TransmitFilterSpec:
    """Best family member for a memory-``L`` CS receiver.

    Parameters
    ----------
    H : ChannelTaps, SpectrumSamples or array
        Channel; complex samples are taken as ``H(w)``, real ones as ``|H(w)|^2``.
    n_starts : int
        Multistart count; the first start is ``A(w) = const``.

    Returns the flat spectrum instead (``in_family=False``) when no family
    member beats it, so the result never falls below the flat objective.
    """
    if L + 1 > 8:
        raise ValueError("at most 8 coefficients supported")
    h2 = _h2(H, n_omega)
    w = -np.pi + 2 * np.pi * np.arange(len(h2)) / len(h2)
    # real channels have |H(w)| = |H(-w)| and need only real coefficients
    mirror = h2[(-np.arange(len(h2))) % len(h2)]
    cplx = bool(np.max(np.abs(h2 - mirror)) > 1e-12 * h2.max())
    nv = L * (2 if cplx else 1)

    def coeffs(x):
        A = np.zeros(L + 1, complex)
        A[0] = 1.0
        if L:
            A[1:] = x[:L] + (1j * x[L:] if cplx else 0)
        return A

    def obj(x):
        A = coeffs(x)
        aw = _a_of_w(A, w)
        viol = max(0.0, -aw.min())
        if viol > 1e-12:
            return 1e3 * (1 + viol)
        try:
            _, psd = _normalize_family(A, h2, N0, power)
        except ValueError:
            return 1e3
        return -cs_objective(psd, h2, N0, L)

    rng = make_rng(seed)
    best, conv = None, False
    for k in range(max(1, n_starts)):
        x0 = np.zeros(nv) if k == 0 else rng.uniform(-0.45, 0.45, nv) / max(L, 1)
        if nv == 0:
            fx, xb, ok = obj(x0), x0, True
        else:
            res = minimize(obj, x0, method="Nelder-Mead",
                           options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": maxiter,
                                    "initial_simplex": x0 + np.vstack([np.zeros(nv), 0.2 * np.eye(nv)])})
            fx, xb, ok = res.fun, res.x, res.success
        if best is None or fx < best[0]:
            best, conv = (fx, xb), ok
    if best[0] >= 1e3:
        raise ValueError("all starts infeasible")
    A, psd = _normalize_family(coeffs(best[1]), h2, N0, power)
    val = cs_objective(psd, h2, N0, L)
    flat = flat_spec(h2, N0, L, power, len(h2))
    if flat.objective > val:
        return flat
    if not conv:
        warnings.warn("transmit-filter search hit the iteration cap", RuntimeWarning)
    return TransmitFilterSpec(A, psd, float(psd.mean() - power), val, conv, True)


def waterfilling(H, N0: float, power: float = 1.0, n_omega: int = TX_GRID) -> WaterfillingSpec:
    """Capacity-achieving spectrum ``max(0, theta - N0/|H|^2)``."""
    h2 = _h2(H, n_omega)
    with np.errstate(divide="ignore"):
        inv = np.where(h2 > 0, N0 / h2, np.inf)

    def pw(theta):
        return np.maximum(theta - inv, 0).mean() - power

    lo = np.min(inv)
    hi = lo + power * 2 + 1
    while pw(hi) < 0:
        hi = lo + 2 * (hi - lo)
    theta = brentq(pw, lo, hi, xtol=1e-15, rtol=1e-15)
    return WaterfillingSpec(float(theta), np.maximum(theta - inv, 0))


def combined_memory(h, p, rel_tol: float = 1e-6) -> tuple[int, bool]:
    """Memory of ``h * p`` after trimming taps below ``rel_tol`` of the peak."""
    h = np.asarray(h.taps if isinstance(h, ChannelTaps) else h, dtype=complex)
    c = np.convolve(h, np.asarray(p, dtype=complex))
    keep = np.flatnonzero(np.abs(c) >= rel_tol * np.abs(c).max())
    nu_c = int(keep[-1] - keep[0]) if keep.size else 0
    hk = np.flatnonzero(np.abs(h) >= rel_tol * np.abs(h).max())
    nu = int(hk[-1] - hk[0])
    return nu_c, nu_c >= nu


# ---------------------------------------------------------------- MIMO

@dataclass(frozen=True)
class MimoPrecoding:
    """SVD-parallelized precoding: per-branch specs and filter banks."""

    branches: list
    powers: np.ndarray
    objective: float
    singular_values: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    crossing: bool = False


def _phase_fixed_svd(Hs):
    U, s, Vh = np.linalg.svd(Hs)
    V = np.conj(np.swapaxes(Vh, 1, 2))
    n, K, _ = V.shape
    for i in range(K):
        col = V[:, :, i]
        first = np.argmax(np.abs(col) > 1e-12, axis=1)
        ph = np.exp(-1j * np.angle(col[np.arange(n), first]))
        V[:, :, i] *= ph[:, None]
        U[:, :, i] *= ph[:, None]
    return U, s, V


def mimo_precoders(H, N0: float, L: int, n_starts: int = 3, n_omega: int = 1024,
                   seed: int = 0) -> MimoPrecoding:
    """Per-frequency SVD into ``K`` scalar branches plus a shared power split.

    ``H`` is a matrix spectrum ``(n_omega, K, K)`` or block taps ``(nu+1, K, K)``.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape[0] != n_omega:
        H = dtft(H, n_omega).values
    K = H.shape[1]
    if K > 4:
        raise ValueError("K <= 4 supported")
    U, s, V = _phase_fixed_svd(H)
    gaps = np.diff(s, axis=1)
    crossing = bool(np.any(np.abs(gaps) < 1e-9 * max(s.max(), 1e-300)))
    if crossing:
        warnings.warn("singular values tie on the grid; branch order may jump", RuntimeWarning)
    h2 = s ** 2
    cache = {}

    def branch(i, p):
        key = (i, round(float(p), 12))
        if key not in cache:
            if p <= 1e-9:
                cache[key] = None
            else:
                cache[key] = optimize_transmit_filter(h2[:, i], N0, L, n_starts, p, seed, n_omega)
        return cache[key]

    def total(pw):
        return sum(0.0 if branch(i, p) is None else branch(i, p).objective for i, p in enumerate(pw))

    if K == 1:
        powers = np.array([1.0])
    elif K == 2:
        res = minimize_scalar(lambda p: -total([p, 2 - p]), bounds=(0.0, 2.0), method="bounded",
                              options={"xatol": 1e-4})
        powers = np.array([res.x, 2 - res.x])
    else:
        def split(z):
            e = np.exp(z - z.max())
            return K * e / e.sum()
        res = minimize(lambda z: -total(split(z)), np.zeros(K), method="Nelder-Mead",
                       options={"xatol": 1e-4, "fatol": 1e-8})
        powers = split(res.x)
    branches = [branch(i, p) for i, p in enumerate(powers)]
    return MimoPrecoding(branches, powers, total(powers), s, U, V, crossing)


# ---------------------------------------------------------------- FTN helpers

def ftn_channel(two_wt: float, n_omega: int = TX_GRID) -> np.ndarray:
    """Ideal band-limiting ``|H(w)|^2 = 1`` for ``|w| <= pi * 2WT``."""
    w = -np.pi + 2 * np.pi * np.arange(n_omega) / n_omega
    return (np.abs(w) <= np.pi * two_wt + 1e-12).astype(float)


def realize_pulse(psd, two_wt: float = 1.0, length: int = 32, sps: int = 8,
                  kaiser_beta: float = 6.0) -> tuple[PulseSamples, float]:
    """Unit-energy time pulse whose spectrum matches ``psd`` (symbol-rate grid).

    The symbol-rate spectrum ``|P(w)|^2`` maps to frequency ``f = w / (2 pi)``
    (cycles per symbol). Returns the pulse and the relative RMS error of
    its squared spectrum; sharp band edges dominate this error.
    """
    psd = np.asarray(psd, dtype=float)
    n = len(psd)
    w = -np.pi + 2 * np.pi * np.arange(n) / n
    nfft = n * sps
    f = np.fft.fftfreq(nfft, d=1.0 / sps)  # cycles per symbol
    amp = np.sqrt(np.maximum(np.interp(2 * np.pi * f, w, psd, left=0.0, right=0.0), 0))
    amp[np.abs(f) > 0.5] = 0.0
    p = np.fft.fftshift(np.fft.ifft(amp)).real * sps
    c = nfft // 2
    half = length * sps // 2
    seg = p[c - half:c + half + 1] * kaiser(2 * half + 1, kaiser_beta)
    pulse = PulseSamples(seg.astype(complex), sps, half).normalized()
    # spectrum check on the symbol-rate grid
    t = pulse.t
    Pw = np.array([np.sum(pulse.samples * np.exp(-1j * ww * t)) / sps for ww in w])
    got = np.abs(Pw) ** 2
    target = psd / psd.mean() * np.mean(got) if psd.mean() > 0 else psd
    err = float(np.sqrt(np.mean((got - target) ** 2) / np.mean(target ** 2)))
    return pulse, err
