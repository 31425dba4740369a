"""Channel-shortening (CS) design for Gaussian inputs and baseline laws.

Design summary (scalar case; the block case replaces scalars by K x K blocks)::

    B(w)  = (1/V + G(w)/N0)^-1,     b_i = (1/2pi) int B(w) e^{jwi} dw
    m     = [b_-1 .. b_-L],         M'[p, q] = b_{p-q}  (p, q = 1..L)
    C     = b_0 - m M'^-1 m^H
    U_0^H U_0 = C^-1,               [U_1 .. U_L] = -U_0 m M'^-1
    Gr_i  = sum_k U_k^H U_{k+i} - V^-1 delta_i
    I_OPT = log2 det V - log2 det C

All laws are returned in absorbed form (noise scaling inside front end and
target) so the detector metric is ``2 Re(c^H d) - c^H Gr c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.signal.windows import kaiser

from .detector import MismatchedLaw, _alphabet
from .dsp import (DEFAULT_GRID, AutocorrTaps, ChannelTaps, SpectrumSamples,
                  block_toeplitz, dtft, idtft_taps)

__all__ = [
    "ShortenerDesign", "BlockShortenerDesign", "AdaptiveCsEstimate",
    "design_scalar_cs", "design_block_cs", "truncation_baseline",
    "mmse_legacy_cs", "adaptive_cs", "finite_gaussian_air",
    "gaussian_air_of_law", "cs_from_error_acf",
]


# ---------------------------------------------------------------- core algebra

def _hermitian(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def _predictor(b):
    """Blocks ``b`` (L+1, K, K) for lags 0..L -> (C, U (L+1, K, K))."""
    L = b.shape[0] - 1
    K = b.shape[1]
    b0 = _hermitian(b[0])
    if L == 0:
        C = b0
        m_Minv = np.zeros((K, 0), complex)
    else:
        # M'[p, q] = b_{p-q}; lags -(L-1) .. L-1 from Hermitian symmetry
        neg = np.conj(np.swapaxes(b[1:L][::-1], 1, 2))
        Mp = block_toeplitz(np.concatenate([neg, b[:L]]), L, -(L - 1))
        Mp = _hermitian(Mp)
        m = np.concatenate([b[i].conj().T for i in range(1, L + 1)], axis=1)  # b_{-i} = b_i^H
        try:
            cf = sla.cho_factor(Mp)
        except np.linalg.LinAlgError:
            raise ValueError(f"block matrix singular (cond {np.linalg.cond(Mp):.2e})") from None
        m_Minv = sla.cho_solve(cf, m.conj().T).conj().T
        C = _hermitian(b0 - m_Minv @ m.conj().T)
    ev = np.linalg.eigvalsh(C)
    if ev.min() <= 0:
        raise ValueError(f"degenerate design: C has eigenvalue {ev.min():.3e}")
    Cinv = _hermitian(np.linalg.inv(C))
    U0 = np.linalg.cholesky(Cinv).conj().T  # upper factor, U0^H U0 = C^-1
    U = np.empty((L + 1, K, K), complex)
    U[0] = U0
    if L:
        rest = -U0 @ m_Minv
        for i in range(L):
            U[i + 1] = rest[:, i * K:(i + 1) * K]
    return C, U


def _target_from_u(U, Vinv):
    L = U.shape[0] - 1
    Gr = np.empty_like(U)
    for i in range(L + 1):
        Gr[i] = sum(U[k].conj().T @ U[k + i] for k in range(L + 1 - i))
    Gr[0] = _hermitian(Gr[0] - Vinv)
    return Gr


def _blocks_spectrum(taps, n_omega):
    """Hermitian spectrum of band taps (lags 0..L) on the grid."""
    L = taps.shape[0] - 1
    neg = np.conj(np.swapaxes(taps[:0:-1], 1, 2))
    s = dtft(np.concatenate([neg, taps]), n_omega, first_lag=-L).values
    return _hermitian(s)


def _realize(spec_vals, n_taps, beta):
    """Two-sided FIR realization of a matrix spectrum; returns (taps, lag0, max error)."""
    taps = idtft_taps(spec_vals, n_taps)
    if beta is not None:
        w = kaiser(2 * n_taps + 1, beta)
        taps = taps * w[:, None, None]
    back = dtft(taps, len(spec_vals), first_lag=-n_taps).values
    err = float(np.max(np.abs(back - spec_vals)))
    return taps, -n_taps, err


# ---------------------------------------------------------------- designs

@dataclass(frozen=True)
class BlockShortenerDesign:
    """Block CS design; all tap arrays have shape ``(L+1, K, K)`` for lags 0..L."""

    L: int
    N0: float
    V: np.ndarray
    b: np.ndarray
    C: np.ndarray
    U: np.ndarray
    Gr: np.ndarray
    front_spectrum: SpectrumSamples = field(repr=False)
    domain: str = "ungerboeck"
    front_taps: np.ndarray = field(default=None, repr=False)
    front_lag: int = 0
    realization_error: float = 0.0

    @property
    def K(self) -> int:
        return self.V.shape[0]

    @property
    def i_opt(self) -> float:
        """Gaussian-input AIR in bit per channel use (per K-vector)."""
        sv = np.linalg.slogdet(self.V)[1]
        sc = np.linalg.slogdet(self.C)[1]
        return float((sv - sc) / np.log(2))

    def law(self, alphabet, label: str = "cs") -> MismatchedLaw:
        return MismatchedLaw(self.front_taps, self.front_lag, self.Gr, _alphabet(alphabet), label)


@dataclass(frozen=True)
class ShortenerDesign:
    """Scalar CS design; ``b``, ``u`` and ``gr`` hold lags 0..L."""

    L: int
    N0: float
    b: np.ndarray
    C: float
    u: np.ndarray
    gr: np.ndarray
    i_opt: float
    block: BlockShortenerDesign = field(repr=False)

    @property
    def front_spectrum(self) -> SpectrumSamples:
        return SpectrumSamples(self.block.front_spectrum.values[:, 0, 0])

    @property
    def front_taps(self) -> np.ndarray:
        return self.block.front_taps[:, 0, 0]

    @property
    def front_lag(self) -> int:
        return self.block.front_lag

    def gr_full(self) -> np.ndarray:
        """Target taps for lags ``-L .. L``."""
        return AutocorrTaps(self.gr).full() if np.any(self.gr) else np.zeros(2 * self.L + 1, complex)

    def law(self, alphabet, label: str = "cs") -> MismatchedLaw:
        return self.block.law(alphabet, label)


def _as_matrix_spec(x, n_omega, K=None):
    if isinstance(x, SpectrumSamples):
        v = x.values
        if len(v) != n_omega:
            raise ValueError("spectrum grid differs from design grid")
    else:
        v = np.asarray(x, dtype=complex)
    if v.ndim == 1:
        v = v[:, None, None]
    return v


def design_block_cs(L: int, N0: float, H=None, G=None, V=None,
                    n_omega: int = DEFAULT_GRID, n_taps: int = 64,
                    kaiser_beta: float | None = 4.0) -> BlockShortenerDesign:
    """Block CS design from a channel spectrum ``H(w)`` or a Gram spectrum ``G(w)``.

    Parameters
    ----------
    L : int
        Detector memory.
    H : SpectrumSamples or array (n_omega, Kout, K), optional
        Forney-domain channel; the front end then acts on white-noise samples.
    G : SpectrumSamples or array (n_omega, K, K), optional
        Ungerboeck-domain matrix spectrum ``H^H H``; front end acts on MF output.
    V : array (K, K), optional
        Symbol-vector correlation; identity by default.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    if N0 <= 0:
        raise ValueError("N0 must be positive")
    if (H is None) == (G is None):
        raise ValueError("give exactly one of H or G")
    if H is not None:
        Hs = _as_matrix_spec(H, n_omega)
        Gs = np.conj(np.swapaxes(Hs, 1, 2)) @ Hs
    else:
        Gs = _hermitian(_as_matrix_spec(G, n_omega))
    n_omega = len(Gs)
    if n_omega < 4 * (2 * L + 1):
        raise ValueError("grid too small for L")
    if not np.all(np.isfinite(Gs)):
        raise ValueError("non-finite spectrum")
    K = Gs.shape[1]
    V = np.eye(K, dtype=complex) if V is None else np.asarray(V, dtype=complex).reshape(K, K)
    if np.linalg.eigvalsh(_hermitian(V)).min() <= 0:
        raise ValueError("V must be positive definite")
    Vinv = _hermitian(np.linalg.inv(V))
    Bw = _hermitian(np.linalg.inv(Vinv[None] + Gs / N0))
    b = idtft_taps(SpectrumSamples(Bw), L, 0)
    C, U = _predictor(b)
    Gr = _target_from_u(U, Vinv)
    Grw = _blocks_spectrum(Gr, n_omega)
    left = (Grw + Vinv[None]) @ V[None]
    I = np.eye(Hs.shape[1] if H is not None else K)[None]
    if H is not None:
        HH = np.conj(np.swapaxes(Hs, 1, 2))
        W = left @ HH @ np.linalg.inv(Hs @ V[None] @ HH + N0 * I)
        domain = "forney"
    else:
        W = left @ np.linalg.inv(Gs @ V[None] + N0 * I)
        domain = "ungerboeck"
    taps, lag0, err = _realize(W, min(n_taps, n_omega // 4), kaiser_beta)
    return BlockShortenerDesign(L, N0, V, b, C, U, Gr, SpectrumSamples(W), domain, taps, lag0, err)


def design_scalar_cs(channel, N0: float, L: int, n_omega: int = DEFAULT_GRID,
                     domain: str | None = None, n_taps: int = 64,
                     kaiser_beta: float | None = 4.0) -> ShortenerDesign:
    """Scalar CS design.

    ``channel`` is either :class:`ChannelTaps` (Forney-domain front end unless
    ``domain="ungerboeck"``), :class:`AutocorrTaps` or a real
    :class:`SpectrumSamples` of ``|H(w)|^2`` (Ungerboeck-domain front end).
    """
    if isinstance(channel, ChannelTaps):
        if domain == "ungerboeck":
            kw = {"G": np.abs(channel.spectrum(n_omega).values) ** 2}
        else:
            kw = {"H": channel.spectrum(n_omega).values}
    elif isinstance(channel, AutocorrTaps):
        kw = {"G": channel.spectrum(n_omega).values}
    elif isinstance(channel, SpectrumSamples):
        kw = {"G": np.real(channel.values)}
        n_omega = channel.n_omega
    else:
        raise TypeError("channel must be ChannelTaps, AutocorrTaps or SpectrumSamples")
    blk = design_block_cs(L, N0, V=np.eye(1), n_omega=n_omega, n_taps=n_taps,
                          kaiser_beta=kaiser_beta, **kw)
    return ShortenerDesign(L, N0, blk.b[:, 0, 0], float(blk.C[0, 0].real), blk.U[:, 0, 0],
                           blk.Gr[:, 0, 0], blk.i_opt, blk)


def cs_from_error_acf(b, N0: float = 1.0) -> tuple[float, np.ndarray, np.ndarray, float]:
    """Scalar design from error autocorrelation ``b_0 .. b_L``: ``(C, u, gr, I_OPT)``."""
    bb = np.asarray(b, dtype=complex).reshape(-1, 1, 1)
    C, U = _predictor(bb)
    Gr = _target_from_u(U, np.eye(1))
    c = float(C[0, 0].real)
    return c, U[:, 0, 0], Gr[:, 0, 0], float(-np.log2(c))


# ---------------------------------------------------------------- baselines

def truncation_baseline(channel, L: int, N0: float, alphabet, noise_scale: float = 1.0) -> MismatchedLaw:
    """Matched-filter front end and target ``g`` truncated to memory ``L``.

    ``channel`` as :class:`ChannelTaps` gives a law on Forney observations
    (front end = matched filter); :class:`AutocorrTaps` gives a law on
    Ungerboeck observations (front end = identity).
    """
    s = 1.0 / (N0 * noise_scale)
    if isinstance(channel, ChannelTaps):
        g = channel.autocorr()
        h = channel.taps
        front = np.conj(h[::-1]) * s
        lag0 = -channel.memory
    elif isinstance(channel, AutocorrTaps):
        g = channel
        front, lag0 = np.array([s]), 0
    else:
        raise TypeError("channel must be ChannelTaps or AutocorrTaps")
    if L > g.memory:
        raise ValueError("L exceeds channel memory")
    return MismatchedLaw(front, lag0, g.taps[:L + 1] * s, _alphabet(alphabet), "truncation")


def mmse_legacy_cs(channel: ChannelTaps, N0: float, L: int, alphabet,
                   n_omega: int = DEFAULT_GRID, n_taps: int = 64) -> MismatchedLaw:
    """Classical MMSE shortener with a unit-energy target ``Q`` and filter ``W``.

    ``Q`` minimizes the error power ``q^H B q`` subject to ``|q| = 1`` (minimum
    eigenvector of the error Toeplitz matrix) and ``W`` is the matching MMSE
    filter. The metric ``-|W r - Q c|^2 / mse`` expands to a law with front
    end ``Q^H W / mse`` and target ``Q^H Q / mse``.
    """
    H = channel.spectrum(n_omega).values
    B = N0 / (np.abs(H) ** 2 + N0)
    b = idtft_taps(SpectrumSamples(B.astype(complex)), L, 0)
    T = sla.toeplitz(b, np.conj(b))
    ev, vec = np.linalg.eigh(T)
    if ev[0] <= 0:
        raise ValueError("normal equations singular")
    q, mse = vec[:, 0], float(ev[0])
    Q = dtft(q, n_omega).values
    W = np.abs(Q) ** 2 * np.conj(H) / (np.abs(H) ** 2 + N0) / mse
    taps, lag0, _ = _realize(W[:, None, None], min(n_taps, n_omega // 4), 4.0)
    target = np.array([np.sum(np.conj(q[:L + 1 - i]) * q[i:]) for i in range(L + 1)]) / mse
    return MismatchedLaw(taps, lag0, target, _alphabet(alphabet), "mmse-legacy")


# ---------------------------------------------------------------- adaptive CS

@dataclass(frozen=True)
class AdaptiveCsEstimate:
    """Training-based design; ``design`` is ``None`` when the error vanishes."""

    mmse_taps: np.ndarray
    mmse_lag: int
    b_hat: np.ndarray
    C: float | None
    u: np.ndarray | None
    gr: np.ndarray | None
    i_opt: float | None
    degenerate: bool

    def law(self, alphabet, N0_unused=None) -> MismatchedLaw:
        """Law acting on the received samples: front end ``(Gr + 1) * W_mmse``."""
        if self.degenerate:
            raise ValueError("degenerate design")
        L = len(self.gr) - 1
        gfull = AutocorrTaps(self.gr).full() if np.any(self.gr) else np.zeros(2 * L + 1, complex)
        gfull = gfull.copy()
        gfull[L] += 1.0
        front = np.convolve(gfull, self.mmse_taps)
        return MismatchedLaw(front, self.mmse_lag - L, self.gr, _alphabet(alphabet), "adaptive-cs")


def adaptive_cs(training, received, L: int, mmse_len: int = 21,
                delay: int | None = None) -> AdaptiveCsEstimate:
    """Estimate the CS design from a training block.

    The MMSE estimator ``c^_k = sum_j w_j r_{k-j}`` uses lags
    ``-delay .. mmse_len - 1 - delay`` and is found by batch least squares.
    """
    c = np.asarray(training, dtype=complex)
    r = np.asarray(received, dtype=complex)
    N = len(c)
    if N < 50 * mmse_len:
        raise ValueError("training block shorter than 50 * mmse_len")
    if delay is None:
        delay = mmse_len // 2
    lags = np.arange(-delay, mmse_len - delay)
    X = np.zeros((N, mmse_len), complex)
    for j, lag in enumerate(lags):
        idx = np.arange(N) - lag
        ok = (idx >= 0) & (idx < len(r))
        X[ok, j] = r[idx[ok]]
    R = X.conj().T @ X
    p = X.conj().T @ c
    if np.linalg.cond(R) > 1e12:
        raise ValueError("ill-conditioned normal equations")
    w = np.linalg.solve(R, p)
    e = c - X @ w
    # b_i = E[e_{k+i} conj(e_k)], the inverse DTFT of the error spectrum
    b = np.array([np.vdot(e[:N - i], e[i:]) / (N - i) for i in range(L + 1)])
    b[0] = b[0].real
    if b[0].real <= 1e-14 * max(1.0, np.mean(np.abs(c) ** 2)):
        return AdaptiveCsEstimate(w, int(lags[0]), b, None, None, None, None, True)
    C, u, gr, iopt = cs_from_error_acf(b)
    return AdaptiveCsEstimate(w, int(lags[0]), b, C, u, gr, iopt, False)


# ---------------------------------------------------------------- finite-N Gaussian AIR

def _channel_matrix(h_blocks, N):
    """(N + nu) K_out x N K convolution matrix of block taps (nu+1, K_out, K)."""
    h = np.asarray(h_blocks, dtype=complex)
    if h.ndim == 1:
        h = h.reshape(-1, 1, 1)
    nu, Ko, K = h.shape[0] - 1, h.shape[1], h.shape[2]
    Hm = np.zeros(((N + nu) * Ko, N * K), complex)
    for i in range(nu + 1):
        for k in range(N):
            Hm[(k + i) * Ko:(k + i + 1) * Ko, k * K:(k + 1) * K] = h[i]
    return Hm


def finite_gaussian_air(h_blocks, N0: float, L: int, N: int, V=None) -> float:
    """Optimal finite-N Gaussian AIR (bits per channel use) for memory ``L``.

    Uses ``B = (V^-1 + H^H H / N0)^-1`` on the block and the conditional
    covariances ``C_n = B_nn - B_n,F B_F^-1 B_F,n`` with ``F`` the next ``L``
    block indices (truncated at the block end).
    """
    Hm = _channel_matrix(h_blocks, N)
    K = Hm.shape[1] // N
    V = np.eye(K) if V is None else np.asarray(V, dtype=complex)
    Vinv = np.linalg.inv(V)
    B = np.linalg.inv(np.kron(np.eye(N), Vinv) + Hm.conj().T @ Hm / N0)
    tot = 0.0
    for n in range(N):
        a = slice(n * K, (n + 1) * K)
        f = slice((n + 1) * K, min(N, n + 1 + L) * K)
        Cn = B[a, a]
        if f.stop > f.start:
            Cn = Cn - B[a, f] @ np.linalg.solve(B[f, f], B[f, a])
        tot -= np.linalg.slogdet(Cn)[1]
    tot += N * np.linalg.slogdet(V)[1]
    return float(tot / (N * np.log(2)))


def gaussian_air_of_law(h_blocks, N0: float, N: int, front_full: np.ndarray,
                        Gr_full: np.ndarray, V=None) -> float:
    """Finite-N Gaussian AIR of an arbitrary law ``(Hr, Gr)`` given as block matrices.

    ``front_full`` is the ``N K x (N + nu) K_out`` matrix with ``d = front_full @ r``
    on the Forney observation; ``Gr_full`` is the ``N K`` square target.
    """
    Hm = _channel_matrix(h_blocks, N)
    K = Hm.shape[1] // N
    V = np.eye(K) if V is None else np.asarray(V, dtype=complex)
    Vb = np.kron(np.eye(N), V)
    Hr = front_full.conj().T
    Mi = np.linalg.inv(Gr_full + np.linalg.inv(Vb))
    R = Hm @ Vb @ Hm.conj().T + N0 * np.eye(Hm.shape[0])
    val = (2 * np.real(np.trace(Hr.conj().T @ Hm @ Vb)) - np.real(np.trace(Gr_full @ Vb))
           - np.real(np.trace(Mi @ Hr.conj().T @ R @ Hr))
           + np.linalg.slogdet(np.eye(N * K) + Vb @ Gr_full)[1])
    return float(val / (N * np.log(2)))
