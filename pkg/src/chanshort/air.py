"""Achievable information rates: trellis Monte Carlo, symbol-by-symbol, budgets.

Rates are in bit per (complex) channel use unless stated otherwise.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detector import ForneyLaw, MismatchedLaw, forward_loglik_z, path_loglik_z
from .dsp import AutocorrTaps, Constellation, PulseSamples, make_rng
from .models import spectral_factorize

__all__ = [
    "AirEstimate", "InterferenceBudget", "AseValue", "mc_air_trellis", "sbs_air",
    "interference_budget", "ase", "awgn_mutual_information", "aggregate",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class AirEstimate:
    """Block-averaged AIR; ``stderr`` is the sample std of block values over sqrt(blocks)."""

    value: float
    stderr: float
    n_symbols: int
    blocks: int
    seed: int
    per_block: np.ndarray = field(default=None, repr=False)


def aggregate(vals, n_symbols, seed) -> AirEstimate:
    v = np.asarray(vals, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("nan")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite AIR block value")
    return AirEstimate(float(v.mean()), se, int(n_symbols), len(v), int(seed), v)


def _block_rate(channel, law, N, rng, rails):
    a = law.alphabet
    M = law.M
    if rails:
        iI = rng.integers(0, M, N)
        iQ = rng.integers(0, M, N)
        c = a[iI, 0].real + 1j * a[iQ, 0].real
        x = channel(c, rng)
        z = law.observe(x, N)
        e, end = law.extra(x, N)
        tot = 0.0
        for part, idx in ((z.real, iI), (z.imag, iQ)):
            zz = part.astype(complex)
            if isinstance(law, ForneyLaw):
                e_r = -np.sum(zz.real ** 2, axis=1) * law._scale + law._logc
            else:
                e_r = None
            tot += path_loglik_z(zz, law, idx, e_r) - forward_loglik_z(zz, law, e_r)
        return tot / (N * LN2)
    idx = rng.integers(0, M, N)
    c = a[idx]
    x = channel(c[:, 0] if a.shape[1] == 1 else c, rng)
    z = law.observe(x, N)
    e, end = law.extra(x, N)
    return (path_loglik_z(z, law, idx, e, end) - forward_loglik_z(z, law, e, end)) / (N * LN2)


def mc_air_trellis(channel, law, n_symbols: int, blocks: int = 10, seed: int = 0,
                   rails: bool = False, threads: int = 1) -> AirEstimate:
    """Monte Carlo AIR of a (possibly mismatched) law over the true channel.

    Parameters
    ----------
    channel : callable
        ``channel(c, rng) -> x`` draws the true observation for symbols ``c``.
    law : MismatchedLaw or ForneyLaw
    rails : bool
        Treat ``law`` as a real one-dimensional rail law applied to the real
        and imaginary parts of the front-end output (Gray-mapped QPSK as two
        binary trellises). The returned rate is the sum of both rails.
    """
    if isinstance(law, Constellation) or getattr(law, "alphabet", None) is None:
        raise TypeError("law required")
    if n_symbols < 1:
        raise ValueError("n_symbols must be positive")

    def job(b):
        return _block_rate(channel, law, n_symbols, make_rng(seed, b), rails)

    if threads > 1:
        law.tables()
        with ThreadPoolExecutor(threads) as ex:
            vals = list(ex.map(job, range(blocks)))
    else:
        vals = [job(b) for b in range(blocks)]
    return aggregate(vals, n_symbols, seed)


def gaussian_dispatch(constellation):
    if isinstance(constellation, Constellation) and constellation.is_gaussian:
        raise ValueError("Gaussian inputs use the closed-form I_OPT of the CS design")


def sbs_air(r, c, h00: complex, var: float, constellation: Constellation,
            blocks: int = 10, Es: float = 1.0, seed: int = 0) -> AirEstimate:
    """Symbol-by-symbol AIR with auxiliary channel ``r = h00 c + CN(0, var)``.

    ``r`` and ``c`` are samples drawn from the true channel. Gaussian inputs
    use the Gaussian output law ``CN(0, Es |h00|^2 + var)``.
    """
    if var <= 0:
        raise ValueError("auxiliary variance must be positive")
    r = np.asarray(r, dtype=complex)
    c = np.asarray(c, dtype=complex)
    lq_rc = -np.abs(r - h00 * c) ** 2 / var - math.log(math.pi * var)
    if constellation.is_gaussian:
        vy = Es * abs(h00) ** 2 + var
        lq_r = -np.abs(r) ** 2 / vy - math.log(math.pi * vy)
    else:
        pts = constellation.points
        d = -np.abs(r[:, None] - h00 * pts[None, :]) ** 2 / var
        m = d.max(axis=1)
        lq_r = m + np.log(np.exp(d - m[:, None]).mean(axis=1)) - math.log(math.pi * var)
    info = (lq_rc - lq_r) / LN2
    parts = np.array_split(info, blocks)
    return aggregate([p.mean() for p in parts], len(r) // blocks, seed)


def awgn_mutual_information(constellation: Constellation, snr: float, order: int = 40) -> float:
    """Finite-alphabet AWGN mutual information (bits) by Gauss-Hermite quadrature."""
    if constellation.is_gaussian:
        return math.log2(1 + snr)
    pts = constellation.points
    N0 = 1.0 / snr
    x, w = np.polynomial.hermite.hermgauss(order)
    nr, ni = np.meshgrid(x, x)
    ww = np.outer(w, w) / np.pi
    noise = math.sqrt(N0) * (nr + 1j * ni)
    tot = 0.0
    for a in pts:
        d = -np.abs(a + noise[..., None] - pts) ** 2 / N0 + np.abs(noise[..., None]) ** 2 / N0
        m = d.max(axis=-1)
        tot += np.sum(ww * (m + np.log(np.exp(d - m[..., None]).sum(axis=-1))))
    return float(math.log2(len(pts)) - tot / len(pts) / LN2)


# ---------------------------------------------------------------- budgets

@dataclass(frozen=True)
class InterferenceBudget:
    """Interference power seen by a detector and the coefficients that carry it."""

    Es: float
    N_I: float
    coefficients: dict = field(repr=False)
    main: complex = 1.0
    L: int = 0
    detector: str = "sbs-mf"


def _carrier_coeffs(p: PulseSamples, T, F, J, n_max):
    """``h(n, l) = int p(t + nT) p*(t) exp(j 2 pi l F t) dt`` by quadrature."""
    t = p.t
    s = p.samples
    out = {}
    for l in range(-J, J + 1):
        ph = np.exp(2j * np.pi * l * F * t)
        for n in range(-n_max, n_max + 1):
            # p(t + nT) sampled by band-limited shift of the pulse
            shifted = _shift(p, n * T)
            out[(n, l)] = complex(np.sum(shifted * np.conj(s) * ph) / p.sps)
    return out


def _shift(p: PulseSamples, tau):
    """Samples of ``p(t + tau)`` on the pulse grid (zero outside support)."""
    d = tau * p.sps
    if abs(d - round(d)) < 1e-9:
        d = int(round(d))
        out = np.zeros_like(p.samples)
        if d >= 0:
            out[:len(out) - d] = p.samples[d:]
        else:
            out[-d:] = p.samples[:len(out) + d]
        return out
    k = np.arange(len(p.samples))
    return np.array([np.dot(p.samples, np.sinc(kk + d - k)) for kk in k])


def interference_budget(pulse: PulseSamples, T: float = 1.0, F: float | None = None, J: int = 0,
                        detector: str = "sbs-mf", L: int = 0, Es: float = 1.0,
                        residual_tol: float = 1e-4) -> InterferenceBudget:
    """Interference power for symbol-by-symbol or trellis detection.

    ``detector`` is ``"sbs-mf"`` (matched-filter samples), ``"sbs-wf"``
    (whitened samples) or ``"trellis"`` (whitened samples, taps ``n <= L``
    handled by the trellis). Adjacent carriers (``J`` per side at spacing
    ``F``) enter through the matched-filter coefficients.
    """
    span = (len(pulse.samples) - 1) / pulse.sps
    n_max = int(math.ceil(span / T))
    coeffs = _carrier_coeffs(pulse, T, F or 0.0, J if F else 0, n_max)
    if detector == "sbs-mf":
        main = coeffs[(0, 0)]
        rest = {k: v for k, v in coeffs.items() if k != (0, 0)}
        N_I = Es * sum(abs(v) ** 2 for v in rest.values())
        kept = _keep(rest, Es, residual_tol)
        return InterferenceBudget(Es, float(N_I), kept, main, 0, detector)
    if detector not in ("sbs-wf", "trellis"):
        raise ValueError(f"unknown detector {detector!r}")
    g = AutocorrTaps(np.array([coeffs[(n, 0)] for n in range(0, n_max + 1)])).trimmed(1e-9)
    f = spectral_factorize(g).taps
    Lk = 0 if detector == "sbs-wf" else L
    isi = {(n, 0): complex(f[n]) for n in range(Lk + 1, len(f))}
    N_I = Es * sum(abs(v) ** 2 for v in isi.values())
    if J and F:
        N_I += Es * _adjacent_whitened_power(coeffs, g, f, J, F * T)
    return InterferenceBudget(Es, float(N_I), _keep(isi, Es, residual_tol), complex(f[0]), Lk, detector)


def _adjacent_whitened_power(coeffs, g, f, J, FT, n_omega=4096):
    w = -np.pi + 2 * np.pi * np.arange(n_omega) / n_omega
    G = np.maximum(g.spectrum(n_omega).values, 1e-6 * g.taps[0].real)
    tot = 0.0
    for l in range(-J, J + 1):
        if l == 0:
            continue
        ns = sorted(n for (n, ll) in coeffs if ll == l)
        theta = 2 * np.pi * l * FT
        Hl = sum(coeffs[(n, l)] * np.exp(-1j * (w - theta) * n) for n in ns)
        tot += float(np.mean(np.abs(Hl) ** 2 / G))
    return tot


def _keep(terms, Es, tol):
    items = sorted(terms.items(), key=lambda kv: -abs(kv[1]))
    total = sum(abs(v) ** 2 for _, v in items) * Es
    kept, acc = {}, 0.0
    for k, v in items:
        if total - acc < tol * Es:
            break
        kept[k] = v
        acc += abs(v) ** 2 * Es
    return kept


@dataclass(frozen=True)
class AseValue:
    eta: float
    I_R: float
    FT: float


def ase(I_R: float, F: float, T: float) -> AseValue:
    """Spectral efficiency ``I_R / (F T)`` in bit/s/Hz."""
    if F <= 0 or T <= 0:
        raise ValueError("F and T must be positive")
    return AseValue(I_R / (F * T), I_R, F * T)
