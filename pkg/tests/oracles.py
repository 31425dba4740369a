"""Independent reference implementations used only by the tests.

Nothing here imports the package's design code, so agreement is meaningful.
"""
from __future__ import annotations

import itertools

import numpy as np

EPR4 = np.array([0.5, 0.5, -0.5, -0.5])
MIMO_TAPS = np.array([
    [[-0.080302, 0.256280], [0.385964, 0.353422]],
    [[0.440662, -0.168631], [0.159813, -0.338684]],
    [[-0.358555, -0.303972], [-0.084969, 0.668917]],
    [[0.669006, 0.066229], [0.347376, -0.207065]],
], dtype=complex)


def grid_cs(h, N0, L, n=1 << 16):
    """Scalar CS quantities by direct quadrature on an ``n``-point grid.

    Returns ``b`` (lags 0..L), ``C`` and ``I_OPT`` in bits.
    """
    h = np.asarray(h, dtype=complex)
    w = -np.pi + 2 * np.pi * np.arange(n) / n
    H = np.exp(-1j * np.outer(w, np.arange(len(h)))) @ h
    B = 1.0 / (1.0 + np.abs(H) ** 2 / N0)
    b = np.array([np.mean(B * np.exp(1j * w * i)) for i in range(L + 1)])
    if L == 0:
        C = b[0].real
    else:
        M = np.array([[b[p - q] if p >= q else np.conj(b[q - p]) for q in range(L)] for p in range(L)])
        m = np.conj(b[1:L + 1])  # m_i = b_{-i}
        C = (b[0] - m @ np.linalg.solve(M, np.conj(m))).real
    return b, C, -np.log2(C)


def _all_sequences(alphabet, N):
    M = len(alphabet)
    idx = np.array(list(itertools.product(range(M), repeat=N)), dtype=int).reshape(-1, N)
    return idx, np.asarray(alphabet, dtype=complex)[idx]


def _marginals(idx, lps, M):
    p = np.exp(lps - lps.max())
    p /= p.sum()
    N = idx.shape[1]
    post = np.zeros((N, M))
    for k in range(N):
        post[k] = np.bincount(idx[:, k], weights=p, minlength=M)
    return post


def brute_force(r, h, N0, alphabet, N):
    """Marginals ``P(c_k = a | r)`` for a Forney model with tail, by enumeration."""
    h = np.asarray(h, dtype=complex)
    nu = len(h) - 1
    idx, C = _all_sequences(alphabet, N)
    H = np.zeros((N + nu, N), dtype=complex)
    for m in range(N):
        H[m:m + nu + 1, m] = h
    lps = -np.sum(np.abs(np.asarray(r)[:N + nu] - C @ H.T) ** 2, axis=1) / N0
    return _marginals(idx, lps, len(alphabet))


def brute_force_ungerboeck(y, g_full, N0, alphabet, N):
    """Marginals for the exact Ungerboeck law ``exp((2 Re(c^H y) - c^H G c) / N0)``."""
    nu = (len(g_full) - 1) // 2
    G = np.zeros((N, N), dtype=complex)
    for l in range(N):
        for m in range(N):
            if abs(l - m) <= nu:
                G[l, m] = g_full[nu + l - m]
    idx, C = _all_sequences(alphabet, N)
    quad = np.einsum("si,ij,sj->s", C.conj(), G, C).real
    lps = (2 * np.real(C.conj() @ np.asarray(y)[:N]) - quad) / N0
    return _marginals(idx, lps, len(alphabet))


def dense_gaussian_air(H_blocks, N0, L, N):
    """Finite-``N`` optimum Gaussian AIR by dense linear algebra, bits per vector.

    The channel matrix includes the tail (``(N + nu) K_out x N K``).
    """
    Hb = np.asarray(H_blocks, dtype=complex)
    if Hb.ndim == 1:
        Hb = Hb.reshape(-1, 1, 1)
    nu = len(Hb) - 1
    Ko, K = Hb.shape[1:]
    Hm = np.zeros(((N + nu) * Ko, N * K), dtype=complex)
    for l in range(N + nu):
        for m in range(N):
            if 0 <= l - m <= nu:
                Hm[l * Ko:(l + 1) * Ko, m * K:(m + 1) * K] = Hb[l - m]
    B = np.linalg.inv(np.eye(N * K) + Hm.conj().T @ Hm / N0)
    tot = 0.0
    for n in range(N):
        a = slice(n * K, (n + 1) * K)
        f = slice((n + 1) * K, min(N, n + 1 + L) * K)
        Cn = B[a, a]
        if f.stop > f.start:
            Cn = Cn - B[a, f] @ np.linalg.solve(B[f, f], B[f, a])
        tot -= np.linalg.slogdet(Cn)[1]
    return tot / N / np.log(2)
