"""Channel shortening on a nonlinear satellite transponder."""
# %%
from chanshort import make_constellation
from chanshort.satchan import SatelliteLink, apsk_block_statistics, satellite_air
from chanshort.shortening import design_block_cs

# %% 8PSK through IMUX, Saleh amplifier at 0 dB input back-off and OMUX
link = SatelliteLink.build(make_constellation("8psk"), ibo_db=0.0, n_probe=10000)
print(f"Volterra fit residual {link.model.residual_db:.1f} dB")
for L in (1, 2):
    cs = satellite_air(link, 14.0, "cs", L, 3000, 4)
    tr = satellite_air(link, 14.0, "truncation", L, 3000, 4)
    print(f"L={L}: CS {cs.estimate.value:.3f}  truncation {tr.estimate.value:.3f}  "
          f"OBO {cs.obo_db:.2f} dB")

# %% 32APSK needs the lifted symbol vector; Gaussian design rate by memory
con = make_constellation("32apsk")
apsk = SatelliteLink.build(con, ibo_db=3.0, n_probe=10000)
blk, stats = apsk_block_statistics(apsk.model, con, N0=0.05)
G = blk.spectrum().values
for L in (0, 1, 2):
    print(f"L={L}  I_OPT {design_block_cs(L, 0.05, G=G, V=stats.V).i_opt:.3f} bit")
