"""Channel shortening against plain truncation on EPR4 with BPSK."""
# %%
import numpy as np

from chanshort import ChannelTaps, design_scalar_cs, make_constellation
from chanshort.air import mc_air_trellis
from chanshort.models import ForneyModel, simulate_forney
from chanshort.shortening import truncation_baseline

h = ChannelTaps(np.array([0.5, 0.5, -0.5, -0.5]))
bpsk = make_constellation("bpsk")

# %% Closed-form design at 6 dB: the Gaussian rate grows with the detector memory
N0 = 10 ** -0.6
for L in range(4):
    d = design_scalar_cs(h, N0, L)
    print(f"L={L}  I_OPT={d.i_opt:.4f} bit  target taps {np.round(d.gr.real, 3)}")

# %% Monte Carlo AIR with a two-state detector (L=1)
print("snr_db  cs      trunc")
for snr in (0, 2, 4, 6, 8):
    N0 = 10 ** (-snr / 10)
    fm = ForneyModel(h, N0)
    ch = lambda c, rng: simulate_forney(fm, c, rng)
    cs = mc_air_trellis(ch, design_scalar_cs(h, N0, 1).law(bpsk), 5000, 4, seed=snr)
    tr = mc_air_trellis(ch, truncation_baseline(h, 1, N0, bpsk), 5000, 4, seed=snr)
    print(f"{snr:6d}  {cs.value:.3f}   {tr.value:.3f}")
