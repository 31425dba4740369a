"""Transmit spectra matched to a short receiver memory."""
# %%
import numpy as np

from chanshort import ChannelTaps
from chanshort.txfilter import cs_objective, flat_spec, optimize_transmit_filter, waterfilling

# %% Proakis B at N0 = 0.9 with a memory-1 receiver
h = ChannelTaps(np.array([0.407, 0.815, 0.407]))
spec = optimize_transmit_filter(h, 0.9, 1)
print("cosine coefficients", np.round(spec.cosine_coefficients.real, 3))
print(f"objective {spec.objective:.4f}  flat {flat_spec(h, 0.9, 1).objective:.4f}")

# %% Waterfilling maximizes capacity, yet a short receiver can do better with a flat spectrum
hc = ChannelTaps(np.array([0.5, 0.5, -0.5, -0.5j]))
h2 = np.abs(hc.spectrum(1024).values) ** 2
for snr in (0, 10, 20, 30):
    N0 = 10 ** (-snr / 10)
    wf = cs_objective(waterfilling(hc, N0, n_omega=1024).psd, h2, N0, 1)
    fl = cs_objective(np.ones_like(h2), h2, N0, 1)
    print(f"{snr:3d} dB  waterfilling {wf:.3f}  flat {fl:.3f}")
