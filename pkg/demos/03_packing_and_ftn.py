"""Time packing of QPSK and pulse design for faster-than-Nyquist signaling."""
# %%
import numpy as np

from chanshort import make_constellation
from chanshort.packing import ftn_comparison, optimize_ase, orthogonal_eta

qpsk = make_constellation("qpsk")

# %% Spectral efficiency over the packing factor tau, RRC roll-off 0.2
res = optimize_ase(qpsk, 0.2, "trellis-cs", [0.6, 0.7, 0.8, 0.9, 1.0],
                   esn0_db=np.arange(-2, 15, 2.0), ebn0_db=[2, 4, 6], L=2,
                   n_symbols=3000, blocks=4)
for e, eta, tau in zip(res.ebn0_db, res.eta_max, res.tau_opt):
    print(f"Eb/N0 {e:.0f} dB: packed {eta:.3f} at tau={tau:.1f}, "
          f"orthogonal {orthogonal_eta(qpsk, e, 0.2):.3f}")

# %% Faster-than-Nyquist at 2WT = 0.48: optimized pulse against RRC pulses, BPSK
r = ftn_comparison(0.48, 1, [2, 6, 10], np.arange(-6, 13, 2.0), n_symbols=3000, blocks=4)
for key, eta in r.eta.items():
    print(f"{key:10s}", np.round(eta, 3))
