"""MAP symbol detection by BCJR on Forney or Ungerboeck-type metrics.

Every law is reduced to a branch metric of the form::

    lambda_k(s, c) = 2 Re(A[s, c]^H z_k) + K[s, c] + e_k

where ``z_k`` is the front-end output, ``s`` the state (previous ``L``
symbols) and ``c`` the current symbol. State ``s`` stores the index of
``c_{k-i}`` in base-``M`` digit ``i - 1``; the next state is
``c + M * (s mod M**(L-1))``. For ``k < L`` tables with the out-of-block
digits forced to zero symbols are used, which implements zero padding.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .dsp import Constellation
from .models import ForneyModel, UngerboeckModel

__all__ = [
    "MismatchedLaw", "ForneyLaw", "TrellisPosterior", "exact_forney_law",
    "exact_ungerboeck_law", "bcjr", "forward_loglik", "path_loglik",
    "forward_loglik_z", "path_loglik_z",
    "map_decide", "brute_force_map", "MAX_STATES",
]

MAX_STATES = 2 ** 20


def _alphabet(constellation) -> np.ndarray:
    if isinstance(constellation, Constellation):
        if constellation.is_gaussian:
            raise ValueError("Gaussian marker has no finite alphabet")
        return constellation.points.reshape(-1, 1)
    a = np.asarray(constellation, dtype=complex)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def _state_digits(S, M, L):
    """``digits[s, i]`` = alphabet index of ``c_{k-1-i}`` in state ``s``."""
    s = np.arange(S)
    return np.stack([(s // M ** i) % M for i in range(L)], axis=1) if L else np.zeros((S, 0), int)


def _state_symbols(alphabet, L, j):
    """Symbols ``(S, L, D)`` per state with digits ``i >= j`` zeroed (padding)."""
    M, D = alphabet.shape
    S = M ** L
    dig = _state_digits(S, M, L)
    sym = alphabet[dig] if L else np.zeros((S, 0, D), complex)
    if L:
        sym[:, j:, :] = 0
    return sym


# ---------------------------------------------------------------- laws

@dataclass(frozen=True)
class MismatchedLaw:
    """Ungerboeck-type law ``q(r|c) ~ exp(2 Re(c^H d) - c^H Gr c)`` in absorbed form.

    Parameters
    ----------
    front : ndarray, shape (n, D, Din)
        Front-end taps ``W_i`` for lags ``front_lag .. front_lag + n - 1``;
        ``d_l = sum_i W_i x_{l-i}``. Any noise scaling is already included.
    front_lag : int
    target : ndarray, shape (L+1, D, D)
        ``Gr_0 .. Gr_L``; negative lags follow by Hermitian symmetry.
    alphabet : ndarray, shape (M, D)
    """

    front: np.ndarray
    front_lag: int
    target: np.ndarray
    alphabet: np.ndarray
    label: str = "mismatched"
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        f = np.asarray(self.front, dtype=complex)
        if f.ndim == 1:
            f = f.reshape(-1, 1, 1)
        t = np.asarray(self.target, dtype=complex)
        if t.ndim == 1:
            t = t.reshape(-1, 1, 1)
        object.__setattr__(self, "front", f)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "alphabet", _alphabet(self.alphabet))
        if not np.allclose(t[0], t[0].conj().T, atol=1e-12):
            raise ValueError("Gr_0 must be Hermitian")

    @property
    def memory(self) -> int:
        return self.target.shape[0] - 1

    @property
    def M(self) -> int:
        return self.alphabet.shape[0]

    @property
    def n_states(self) -> int:
        return self.M ** self.memory

    def observe(self, x, N: int) -> np.ndarray:
        """Front-end output ``d_0 .. d_{N-1}`` (shape ``(N, D)``)."""
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            x = x[:, None]
        n, D, Din = self.front.shape
        if x.shape[1] != Din:
            raise ValueError("observation width does not match the front end")
        if n == 1 and self.front_lag == 0:
            return (x[:N] @ self.front[0].T)
        out = np.zeros((N, D), dtype=complex)
        for a in range(D):
            for b in range(Din):
                taps = self.front[:, a, b]
                if not np.any(taps):
                    continue
                full = np.convolve(x[:, b], taps)
                # full[m] holds sum_i taps[i] x[m - i]; lag of taps[i] is front_lag + i
                idx = np.arange(N) - self.front_lag
                ok = (idx >= 0) & (idx < len(full))
                out[ok, a] += full[idx[ok]]
        return out

    def tables(self):
        if "t" not in self._tables:
            L, M = self.memory, self.M
            S = M ** L
            if S > MAX_STATES:
                raise ValueError(f"state space {S} exceeds {MAX_STATES}")
            D = self.alphabet.shape[1]
            A = np.empty((L + 1, S, M, D), complex)
            Kc = np.empty((L + 1, S, M))
            a = self.alphabet
            quad0 = np.einsum("md,de,me->m", a.conj(), self.target[0], a).real
            for j in range(L + 1):
                A[j] = a[None, :, :]
                sym = _state_symbols(a, L, j)
                # sum_i Gr_i c_{k-i}
                past = np.einsum("ide,sie->sd", self.target[1:], sym) if L else np.zeros((S, D))
                cross = np.einsum("md,sd->sm", a.conj(), past).real
                Kc[j] = -quad0[None, :] - 2 * cross
            self._tables["t"] = (A, Kc)
        return self._tables["t"]

    def extra(self, x, N):
        return np.zeros(N), None

    def with_alphabet(self, alphabet) -> "MismatchedLaw":
        return MismatchedLaw(self.front, self.front_lag, self.target, alphabet, self.label)


@dataclass(frozen=True)
class ForneyLaw:
    """Gaussian white-noise law ``-|r_k - sum_i H_i c_{k-i}|^2 / N0``.

    With ``tail=True`` the ``L`` trailing observations beyond the block are
    used; this is the exact law when ``H`` is the true channel.
    """

    h: np.ndarray
    N0: float
    alphabet: np.ndarray
    tail: bool = True
    real: bool = False
    label: str = "forney"
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim == 1:
            h = h.reshape(-1, 1, 1)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "alphabet", _alphabet(self.alphabet))

    @property
    def memory(self) -> int:
        return self.h.shape[0] - 1

    @property
    def M(self) -> int:
        return self.alphabet.shape[0]

    @property
    def n_states(self) -> int:
        return self.M ** self.memory

    @property
    def _logc(self):
        Dout = self.h.shape[1]
        return -Dout * (0.5 if self.real else 1.0) * math.log(math.pi * self.N0)

    @property
    def _scale(self):
        # real rails have variance N0/2, so the exponent is still -(z-m)^2/N0
        return 1.0 / self.N0

    def observe(self, x, N):
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            x = x[:, None]
        return x[:N]

    def _means(self, j):
        a = self.alphabet
        L = self.memory
        sym = _state_symbols(a, L, j)
        past = np.einsum("iod,sid->so", self.h[1:], sym) if L else np.zeros((a.shape[0] ** L, self.h.shape[1]))
        now = a @ self.h[0].T
        return past[:, None, :] + now[None, :, :]

    def tables(self):
        if "t" not in self._tables:
            L = self.memory
            if self.M ** L > MAX_STATES:
                raise ValueError("state space too large")
            s = self._scale
            A, Kc = [], []
            for j in range(L + 1):
                m = self._means(j)
                A.append(m * s)
                Kc.append(-np.sum(np.abs(m) ** 2, axis=2) * s)
            self._tables["t"] = (np.array(A), np.array(Kc))
        return self._tables["t"]

    def extra(self, x, N):
        """Per-step constants and the tail log-likelihood per final state."""
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            x = x[:, None]
        z = x[:N]
        e = -np.sum(np.abs(z) ** 2, axis=1) * self._scale + self._logc
        if not self.tail or self.memory == 0:
            return e, None
        L, M = self.memory, self.M
        sym = _state_symbols(self.alphabet, L, L)  # (S, L, D): c_{N-1-i}
        if N < L:
            sym[:, N:, :] = 0
        end = np.zeros(M ** L)
        for t in range(L):
            if N + t >= len(x):
                break
            r = x[N + t]
            m = np.zeros((M ** L, self.h.shape[1]), complex)
            for i in range(t + 1, L + 1):
                m += sym[:, i - t - 1, :] @ self.h[i].T
            end += -np.sum(np.abs(r[None, :] - m) ** 2, axis=1) * self._scale + self._logc
        return e, end


def exact_forney_law(model: ForneyModel, constellation) -> ForneyLaw:
    return ForneyLaw(model.h.taps, model.N0, _alphabet(constellation), tail=True, label="exact-forney")


def exact_ungerboeck_law(model: UngerboeckModel, constellation) -> MismatchedLaw:
    g = model.g.taps / model.N0
    return MismatchedLaw(np.array([1.0 / model.N0]), 0, g, _alphabet(constellation), "exact-ungerboeck")


# ---------------------------------------------------------------- kernels

@nb.njit(cache=True, nogil=True)
def _lse(v, n, maxlog):
    m = -np.inf
    for i in range(n):
        if v[i] > m:
            m = v[i]
    if m == -np.inf or maxlog:
        return m
    s = 0.0
    for i in range(n):
        s += math.exp(v[i] - m)
    return m + math.log(s)


@nb.njit(cache=True, nogil=True)
def _branch(met, z, A, Kc, logp, e, alive):
    S, M, D = A.shape
    for s in range(S):
        if not alive[s]:
            continue
        for c in range(M):
            acc = 0.0
            for d in range(D):
                a = A[s, c, d]
                acc += a.real * z[d].real + a.imag * z[d].imag
            met[s, c] = 2.0 * acc + Kc[s, c] + logp[c] + e


@nb.njit(cache=True, nogil=True)
def _forward(z, A, Kc, logp, e, L, maxlog):
    N = z.shape[0]
    J, S, M, D = A.shape
    P = S // M if L > 0 else 1
    alpha = np.full((N + 1, S), -np.inf)
    alpha[0, 0] = 0.0
    lognorm = np.zeros(N)
    met = np.full((S, M), -np.inf)
    buf = np.empty(M)
    nxt = np.empty(S)
    for k in range(N):
        j = k if k < L else L
        alive = alpha[k] > -np.inf
        _branch(met, z[k], A[j], Kc[j], logp[k], e[k], alive)
        if L == 0:
            for c in range(M):
                buf[c] = alpha[k, 0] + met[0, c]
            nxt[0] = _lse(buf, M, maxlog)
        else:
            for ns in range(S):
                c = ns % M
                r = ns // M
                for jj in range(M):
                    s = r + P * jj
                    buf[jj] = alpha[k, s] + met[s, c] if alive[s] else -np.inf
                nxt[ns] = _lse(buf, M, maxlog)
        tot = _lse(nxt, S, maxlog)
        if not np.isfinite(tot):
            raise ValueError("non-finite metric in forward recursion")
        lognorm[k] = tot
        for s in range(S):
            alpha[k + 1, s] = nxt[s] - tot
    return alpha, lognorm


@nb.njit(cache=True, nogil=True)
def _backward(z, A, Kc, logp, e, L, alpha, end, maxlog):
    N = z.shape[0]
    J, S, M, D = A.shape
    P = S // M if L > 0 else 1
    beta = end.copy()
    post = np.zeros((N, M))
    met = np.full((S, M), -np.inf)
    buf = np.empty(M)
    bufs = np.empty(S)
    nb_ = np.empty(S)
    for k in range(N - 1, -1, -1):
        j = k if k < L else L
        alive = alpha[k] > -np.inf
        _branch(met, z[k], A[j], Kc[j], logp[k], e[k], alive)
        for c in range(M):
            for s in range(S):
                if alive[s]:
                    ns = c + M * (s % P) if L > 0 else 0
                    bufs[s] = alpha[k, s] + met[s, c] + beta[ns]
                else:
                    bufs[s] = -np.inf
            buf[c] = _lse(bufs, S, maxlog)
        tot = _lse(buf, M, maxlog)
        for c in range(M):
            post[k, c] = math.exp(buf[c] - tot)
        mx = -np.inf
        for s in range(S):
            if not alive[s]:
                nb_[s] = -np.inf
                continue
            for c in range(M):
                ns = c + M * (s % P) if L > 0 else 0
                buf[c] = met[s, c] + beta[ns]
            nb_[s] = _lse(buf, M, maxlog)
            if nb_[s] > mx:
                mx = nb_[s]
        for s in range(S):
            beta[s] = nb_[s] - mx
    return post


# ---------------------------------------------------------------- public API

@dataclass(frozen=True)
class TrellisPosterior:
    """Per-symbol posteriors ``(N, M)`` and forward log-normalizations."""

    post: np.ndarray
    log_norm: np.ndarray
    log_q: float


def _prepare(x, law, N, priors):
    z = np.ascontiguousarray(law.observe(x, N))
    A, Kc = law.tables()
    e, end = law.extra(x, N)
    M = law.M
    if priors is None:
        logp = np.full((N, M), -math.log(M))
    else:
        with np.errstate(divide="ignore"):
            logp = np.log(np.asarray(priors, dtype=float))
        if logp.shape != (N, M):
            raise ValueError("priors must have shape (N, M)")
    S = law.n_states
    if end is None:
        end = np.zeros(S)
    return z, A, Kc, np.ascontiguousarray(logp), np.ascontiguousarray(e, dtype=float), end


def bcjr(x, law, N: int | None = None, priors=None, max_log: bool = False) -> TrellisPosterior:
    """Symbol posteriors of ``N`` symbols given observation ``x`` under ``law``."""
    if isinstance(law, ForneyModel):
        raise TypeError("wrap models with exact_forney_law / exact_ungerboeck_law")
    if N is None:
        N = len(x) - (law.memory if isinstance(law, ForneyLaw) and law.tail else 0)
    z, A, Kc, logp, e, end = _prepare(x, law, N, priors)
    alpha, lognorm = _forward(z, A, Kc, logp, e, law.memory, max_log)
    fin = alpha[N] + end
    m = fin.max()
    log_q = float(lognorm.sum() + m + math.log(np.exp(fin - m).sum()))
    post = _backward(z, A, Kc, logp, e, law.memory, alpha, end - end.max(), max_log)
    return TrellisPosterior(post, lognorm, log_q)


def forward_loglik(x, law, N: int, priors=None) -> float:
    """``log q(r)`` under ``law`` from the forward recursion alone."""
    z = law.observe(x, N)
    e, end = law.extra(x, N)
    return forward_loglik_z(z, law, e, end, priors)


def forward_loglik_z(z, law, e=None, end=None, priors=None) -> float:
    """As :func:`forward_loglik` but from front-end outputs ``z`` (N, D)."""
    z = np.ascontiguousarray(np.asarray(z, dtype=complex).reshape(len(z), -1))
    N = len(z)
    A, Kc = law.tables()
    M = law.M
    e = np.zeros(N) if e is None else np.ascontiguousarray(e, dtype=float)
    end = np.zeros(law.n_states) if end is None else end
    logp = np.full((N, M), -math.log(M)) if priors is None else np.log(np.asarray(priors, float))
    alpha, lognorm = _forward(z, A, Kc, np.ascontiguousarray(logp), e, law.memory, False)
    fin = alpha[N] + end
    m = fin.max()
    return float(lognorm.sum() + m + math.log(np.exp(fin - m).sum()))


def path_loglik(x, law, idx) -> float:
    """``log q(r | c)`` along the known symbol-index path ``idx`` (no priors)."""
    N = len(idx)
    z = law.observe(x, N)
    e, end = law.extra(x, N)
    return path_loglik_z(z, law, idx, e, end)


def path_loglik_z(z, law, idx, e=None, end=None) -> float:
    """As :func:`path_loglik` but from front-end outputs ``z``."""
    idx = np.asarray(idx, dtype=np.int64)
    N = len(idx)
    z = np.asarray(z, dtype=complex).reshape(N, -1)
    A, Kc = law.tables()
    e = np.zeros(N) if e is None else e
    L, M = law.memory, law.M
    s = np.zeros(N, dtype=np.int64)
    for i in range(1, L + 1):
        prev = np.zeros(N, dtype=np.int64)
        if i < N:
            prev[i:] = idx[:-i]
        s += prev * M ** (i - 1)
    j = np.minimum(np.arange(N), L)
    a = A[j, s, idx]
    tot = np.sum(2 * np.real(np.sum(np.conj(a) * z, axis=1)) + Kc[j, s, idx] + e)
    if end is not None:
        sN = 0
        for i in range(1, L + 1):
            if N - i >= 0:
                sN += idx[N - i] * M ** (i - 1)
        tot += end[sN]
    return float(tot)


def map_decide(tp: TrellisPosterior) -> np.ndarray:
    """Per-symbol argmax index; ties go to the lowest constellation index."""
    return np.argmax(tp.post, axis=1)


# ---------------------------------------------------------------- oracle

def _direct_logq(x, law, C):
    """Sequence metrics for a batch ``C`` of shape ``(n_seq, N, D)`` in matrix form."""
    n_seq, N, D = C.shape
    if isinstance(law, ForneyLaw):
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            x = x[:, None]
        L = law.memory
        n_out = min(N + L if law.tail else N, len(x))
        mean = np.zeros((n_seq, n_out, law.h.shape[1]), complex)
        for i in range(L + 1):
            m = min(N, n_out - i)
            mean[:, i:i + m] += C[:, :m] @ law.h[i].T
        d2 = np.sum(np.abs(x[None, :n_out] - mean) ** 2, axis=(1, 2))
        return -d2 * law._scale + n_out * law._logc
    z = law.observe(x, N).reshape(-1)
    L = law.memory
    G = np.zeros((N * D, N * D), complex)
    for i in range(min(L, N - 1) + 1):
        for k in range(i, N):
            G[k * D:(k + 1) * D, (k - i) * D:(k - i + 1) * D] = law.target[i]
            if i:
                G[(k - i) * D:(k - i + 1) * D, k * D:(k + 1) * D] = law.target[i].conj().T
    cv = C.reshape(n_seq, -1)
    return 2 * np.real(cv.conj() @ z) - np.real(np.sum(cv.conj() * (cv @ G.T), axis=1))


def brute_force_map(x, law, N: int, priors=None) -> tuple[np.ndarray, float]:
    """Exact marginals by enumeration; returns ``(post (N, M), log q(r))``."""
    M = law.M
    if M ** N > 2 ** 24 or N > 12:
        raise ValueError("instance too large for enumeration")
    logp = np.full((N, M), -math.log(M)) if priors is None else np.log(np.asarray(priors, float))
    seqs = np.array(list(itertools.product(range(M), repeat=N)))
    vals = _direct_logq(x, law, law.alphabet[seqs]) + logp[np.arange(N), seqs].sum(axis=1)
    m = vals.max()
    w = np.exp(vals - m)
    tot = w.sum()
    post = np.zeros((N, M))
    for k in range(N):
        np.add.at(post[k], seqs[:, k], w)
    return post / tot, float(m + math.log(tot))
