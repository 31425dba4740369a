"""Channel-shortening detection and spectral-efficiency tools for ISI channels."""

__version__ = "0.1.0"

from .dsp import (AutocorrTaps, ChannelTaps, Constellation, PulseSamples, SpectrumSamples,
                  db2lin, lin2db, make_constellation, make_rng, szego_logdet)
from .models import BlockUngerboeckModel, ForneyModel, UngerboeckModel, spectral_factorize
from .detector import ForneyLaw, MismatchedLaw, bcjr, brute_force_map
from .shortening import (design_block_cs, design_scalar_cs, mmse_legacy_cs,
                         truncation_baseline, adaptive_cs)
from .air import mc_air_trellis, sbs_air, awgn_mutual_information

__all__ = [
    "__version__", "AutocorrTaps", "ChannelTaps", "Constellation", "PulseSamples",
    "SpectrumSamples", "db2lin", "lin2db", "make_constellation", "make_rng",
    "BlockUngerboeckModel", "ForneyModel", "UngerboeckModel", "spectral_factorize",
    "szego_logdet", "ForneyLaw", "MismatchedLaw", "bcjr", "brute_force_map",
    "design_block_cs", "design_scalar_cs", "mmse_legacy_cs", "truncation_baseline",
    "adaptive_cs", "mc_air_trellis", "sbs_air", "awgn_mutual_information",
]
