"""Batch experiment runner.

Each subcommand reads an optional config file (``[section]`` headers with
flat ``key = value`` lines; the section name is the subcommand) and command
line flags, which take precedence. Results are written as CSV files whose
first lines are ``#`` metadata: version, config hash, seed and the resolved
configuration.

Exit status: 0 on success, 2 for usage or configuration errors, 1 when a
computation fails.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .io import config_hash, read_filter, read_taps, write_csv

PRESETS = {
    "epr4": [0.5, 0.5, -0.5, -0.5],
    "proakis-b": [0.407, 0.815, 0.407],
    "proakis-c": [0.227, 0.46, 0.688, 0.46, 0.227],
    "complex4": [0.5, 0.5, -0.5, -0.5j],
}
THREADS_ENV = "CHANSHORT_THREADS"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- value parsing

def _floats(s: str) -> list[float]:
    """``"0,2,4"`` or ``"0:8:2"`` (inclusive range)."""
    s = s.strip()
    if ":" in s:
        parts = [float(p) for p in s.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad range {s!r}; use start:stop:step")
        a, b, st = parts
        n = int(math.floor((b - a) / st + 1e-9)) + 1
        return [round(a + k * st, 12) for k in range(n)]
    return [float(p) for p in s.replace(" ", "").split(",") if p]


def _pulse(s: str):
    from .packing import gaussian_spectrum, rc_spectrum, rrc_spectrum

    kind, _, val = s.partition(":")
    v = float(val)
    if kind == "rrc":
        return v
    if kind == "rc":
        return rc_spectrum(v)
    if kind == "gauss":
        return gaussian_spectrum(v)
    raise ValueError(f"unknown pulse {s!r}; use rrc:a, rc:a or gauss:bt")


SCHEMAS = {
    "design-cs": {
        "channel": (str, "epr4"), "snr_db": (float, 6.0), "L": (int, 1),
        "shortener": (str, "cs"), "domain": (str, "forney"), "n_omega": (int, 4096),
    },
    "air-curve": {
        "channel": (str, "epr4"), "law": (str, "cs"), "L": (int, 1), "mod": (str, "bpsk"),
        "snr": (_floats, "0:8:2"), "n": (int, 100000), "blocks": (int, 10),
    },
    "optimize-txfilter": {
        "channel": (str, "proakis-b"), "L": (int, 1), "n0": (float, 0.9), "starts": (int, 3),
    },
    "pack": {
        "constellation": (str, "qpsk"), "pulse": (_pulse, "rrc:0.2"), "detector": (str, "trellis-cs"),
        "L": (int, 4), "taus": (_floats, "0.6:1.0:0.1"), "nus": (str, ""),
        "esn0": (_floats, "-2:14:2"), "ebn0": (_floats, "2,4,6"), "n": (int, 10000),
        "blocks": (int, 10), "budget_s": (float, 0.0), "refine": (int, 1),
    },
    "satellite-sim": {
        "mod": (str, "8psk"), "ibo": (float, 0.0), "detector": (str, "cs"), "L": (int, 2),
        "psat_n0": (_floats, "12,16"), "n": (int, 10000), "blocks": (int, 10), "order": (int, 5),
        "imux": (str, ""), "omux": (str, ""),
    },
    "szego-check": {
        "channel": (str, "random"), "snr_db": (float, 6.0), "N": (_floats, "16,64,256,1024"),
        "memory": (int, 4),
    },
}
ALIASES = {"txfilter-opt": "optimize-txfilter"}


def load_config(path, kind: str) -> tuple[dict, str]:
    """Parse ``[kind]`` and ``[run]`` sections; returns raw strings and the file text."""
    text = Path(path).read_text()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    lines = text.splitlines()

    def lineno(key):
        for n, l in enumerate(lines, 1):
            if l.split("=", 1)[0].strip() == key:
                return n
        return 0

    out = {}
    schema = SCHEMAS[kind]
    for sec in cp.sections():
        if sec not in (kind, "run") and ALIASES.get(sec) != kind:
            raise ConfigError(f"{path}: line {_section_line(lines, sec)}: unknown section [{sec}]")
        for k, v in cp.items(sec):
            allowed = ("seed", "out", "threads") if sec == "run" else schema
            if k not in allowed:
                raise ConfigError(f"{path}: line {lineno(k)}: unknown key {k!r} in [{sec}]")
            out[k] = (v, lineno(k))
    return out, text


def _section_line(lines, sec):
    for n, l in enumerate(lines, 1):
        if l.strip() == f"[{sec}]":
            return n
    return 0


def resolve(kind: str, args) -> tuple[dict, str]:
    schema = SCHEMAS[kind]
    raw, text = ({}, "")
    if args.config:
        raw, text = load_config(args.config, kind)
    cfg = {}
    for k, (conv, default) in schema.items():
        flag = getattr(args, k, None)
        if flag is not None:
            src, line = flag, None
        elif k in raw:
            src, line = raw[k]
        else:
            src, line = default, None
        try:
            cfg[k] = conv(src) if isinstance(src, str) else src
        except (ValueError, TypeError) as e:
            where = f"{args.config}: line {line}: " if line else ""
            raise ConfigError(f"{where}bad value for {k!r}: {e}") from None
        cfg[f"_{k}_text"] = src if isinstance(src, str) else repr(src)
    for k, conv in (("seed", int), ("threads", int)):
        v = getattr(args, k, None)
        if v is None and k in raw:
            try:
                v = conv(raw[k][0])
            except ValueError:
                raise ConfigError(f"{args.config}: line {raw[k][1]}: bad value for {k!r}") from None
        cfg[k] = v
    if cfg["seed"] is None:
        cfg["seed"] = 0
    if cfg["threads"] is None:
        cfg["threads"] = int(os.environ.get(THREADS_ENV, "1"))
    out = args.out or (raw["out"][0] if "out" in raw else f"{kind}.csv")
    cfg["out"] = out
    return cfg, text


def _meta(kind, cfg, text):
    shown = {k[1:-5]: v for k, v in cfg.items() if k.startswith("_") and k.endswith("_text")}
    resolved = "; ".join(f"{k}={v}" for k, v in shown.items())
    return {"kind": kind, "config_hash": config_hash(text + resolved), "seed": cfg["seed"],
            "config": resolved}


def _channel(spec: str, seed: int = 0, memory: int = 4):
    from .dsp import ChannelTaps, make_rng

    if spec in PRESETS:
        return ChannelTaps(np.array(PRESETS[spec], dtype=complex))
    if spec == "random":
        rng = make_rng(seed, 0xC4)
        h = rng.standard_normal(memory + 1) + 1j * rng.standard_normal(memory + 1)
        return ChannelTaps(h / np.linalg.norm(h))
    if not Path(spec).exists():
        raise ConfigError(f"channel {spec!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    return read_taps(spec)


def _n0(h, snr_db):
    """``SNR = ||h||^2 / N0`` for unit-energy symbols."""
    return float(np.sum(np.abs(h.taps) ** 2) * 10 ** (-snr_db / 10))


# ---------------------------------------------------------------- commands

def cmd_design_cs(cfg):
    from .dsp import make_constellation
    from .shortening import design_scalar_cs, mmse_legacy_cs, truncation_baseline

    h = _channel(cfg["channel"])
    N0 = _n0(h, cfg["snr_db"])
    L = cfg["L"]
    rows = []
    kind = cfg["shortener"]
    if kind == "cs":
        d = design_scalar_cs(h, N0, L, cfg["n_omega"], domain=cfg["domain"])
        rows += [("b", i, v.real, v.imag) for i, v in enumerate(d.b)]
        rows += [("gr", i, v.real, v.imag) for i, v in enumerate(d.gr)]
        rows += [("front", d.front_lag + i, v.real, v.imag) for i, v in enumerate(d.front_taps)]
        rows.append(("i_opt", 0, d.i_opt, 0.0))
    elif kind in ("trunc", "mmse-legacy"):
        a = make_constellation("bpsk")  # taps do not depend on the alphabet
        law = truncation_baseline(h, L, N0, a) if kind == "trunc" else mmse_legacy_cs(h, N0, L, a)
        rows += [("gr", i, v.real, v.imag) for i, v in enumerate(law.target[:, 0, 0])]
        rows += [("front", law.front_lag + i, v.real, v.imag) for i, v in enumerate(law.front[:, 0, 0])]
    else:
        raise ConfigError(f"unknown shortener {kind!r}; use cs, trunc or mmse-legacy")
    return ("section", "lag", "re", "im"), rows, {}


def cmd_air_curve(cfg):
    from .detector import exact_forney_law
    from .dsp import make_constellation
    from .air import mc_air_trellis
    from .models import ForneyModel, simulate_forney
    from .shortening import design_scalar_cs, mmse_legacy_cs, truncation_baseline

    h = _channel(cfg["channel"])
    con = make_constellation(cfg["mod"])
    L = cfg["L"]
    rows = []
    for k, snr in enumerate(cfg["snr"]):
        N0 = _n0(h, snr)
        if con.is_gaussian:
            if cfg["law"] != "cs":
                raise ConfigError("Gaussian inputs are only supported with law = cs")
            rows.append((snr, design_scalar_cs(h, N0, L).i_opt, 0.0))
            continue
        law = {
            "cs": lambda: design_scalar_cs(h, N0, L).law(con),
            "trunc": lambda: truncation_baseline(h, L, N0, con),
            "exact": lambda: exact_forney_law(ForneyModel(h, N0), con),
            "mmse-legacy": lambda: mmse_legacy_cs(h, N0, L, con),
        }.get(cfg["law"])
        if law is None:
            raise ConfigError(f"unknown law {cfg['law']!r}")
        fm = ForneyModel(h, N0)
        est = mc_air_trellis(lambda c, rng: simulate_forney(fm, c, rng), law(),
                             max(cfg["n"] // cfg["blocks"], 1), cfg["blocks"],
                             cfg["seed"] + 1009 * k, threads=cfg["threads"])
        rows.append((snr, est.value, est.stderr))
    return ("snr_db", "air", "stderr"), rows, {}


def cmd_optimize_txfilter(cfg):
    from .txfilter import flat_spec, optimize_transmit_filter

    h = _channel(cfg["channel"])
    spec = optimize_transmit_filter(h, cfg["n0"], cfg["L"], n_starts=cfg["starts"], seed=cfg["seed"])
    flat = flat_spec(h, cfg["n0"], cfg["L"])
    rows = list(zip(spec.omega, spec.psd))
    coef = [(l, a.real, a.imag) for l, a in enumerate(spec.A)]
    extra = {"objective": spec.objective, "flat_objective": flat.objective,
             "in_family": spec.in_family, "cosine_coefficients":
             " ".join(f"{v.real:.6g}" for v in spec.cosine_coefficients)}
    side = ("coef", ("ell", "re", "im"), coef)
    return ("omega", "psq"), rows, {"meta": extra, "side": [side]}


def cmd_pack(cfg):
    from .dsp import make_constellation
    from .packing import optimize_ase

    con = make_constellation(cfg["constellation"])
    nus = _floats(cfg["nus"]) if cfg["nus"] else None
    res = optimize_ase(con, cfg["pulse"], cfg["detector"], cfg["taus"], nus, cfg["esn0"],
                       cfg["ebn0"], cfg["L"], cfg["n"], cfg["blocks"], cfg["seed"],
                       refine=cfg["refine"], budget_s=cfg["budget_s"] or None)
    W = float("nan")
    rows = []
    for i, tau in enumerate(res.taus):
        for j, nu in enumerate(res.nus):
            for k, s in enumerate(res.esn0_db):
                a = res.air[i, j, k]
                rows.append((tau, nu, W, s, a, a / (tau * nu)))
    summ = [(e, m, t, n) for e, m, t, n in zip(res.ebn0_db, res.eta_max, res.tau_opt, res.nu_opt)]
    side = ("summary", ("ebn0_db", "eta_max", "tau_opt", "nu_opt"), summ)
    return ("tau", "nu", "W", "esn0_db", "air", "eta"), rows, {"side": [side],
                                                             "meta": {"partial": res.partial}}


def cmd_satellite_sim(cfg):
    from dataclasses import replace

    from .dsp import make_constellation
    from .satchan import SatelliteLink, default_transponder, fit_volterra, satellite_air

    con = make_constellation(cfg["mod"])
    link = SatelliteLink.build(con, cfg["ibo"], order=cfg["order"], seed=cfg["seed"])
    if cfg["imux"] or cfg["omux"]:
        spec = link.spec
        for key in ("imux", "omux"):
            if cfg[key]:
                taps, sps = read_filter(cfg[key])
                if sps != spec.sps:
                    raise ConfigError(f"{cfg[key]}: oversampling {sps} differs from {spec.sps}")
                spec = replace(spec, **{key: taps})
        link = replace(link, spec=spec,
                       model=fit_volterra(cfg["order"], spec, con, link.tx_pulse, seed=cfg["seed"]))
    rows = []
    for k, snr in enumerate(cfg["psat_n0"]):
        r = satellite_air(link, snr, cfg["detector"], cfg["L"], max(cfg["n"] // cfg["blocks"], 1),
                          cfg["blocks"], cfg["seed"] + 1009 * k)
        rows.append((snr, r.estimate.value, r.estimate.stderr, r.obo_db, r.noise_scale))
    return ("psat_n0_db", "air", "stderr", "obo_db", "noise_scale"), rows, {
        "meta": {"volterra_residual_db": link.model.residual_db}}


def cmd_szego_check(cfg):
    from .dsp import szego_logdet

    h = _channel(cfg["channel"], cfg["seed"], cfg["memory"])
    g = h.autocorr()
    N0 = _n0(h, cfg["snr_db"])
    rows = []
    asym = None
    for N in cfg["N"]:
        fin, asym = szego_logdet(g, int(N), N0)
        rows.append((int(N), fin))
    rows.append(("inf", asym))
    return ("N", "bits_per_symbol"), rows, {}


COMMANDS = {
    "design-cs": cmd_design_cs, "air-curve": cmd_air_curve,
    "optimize-txfilter": cmd_optimize_txfilter, "pack": cmd_pack,
    "satellite-sim": cmd_satellite_sim, "szego-check": cmd_szego_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chanshort", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="kind", required=True)
    for kind, schema in SCHEMAS.items():
        aliases = [a for a, k in ALIASES.items() if k == kind]
        sp = sub.add_parser(kind, aliases=aliases)
        sp.add_argument("--config", help="config file with a [%s] section" % kind)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--threads", type=int, help=f"worker threads (env {THREADS_ENV})")
        for key in schema:
            flag = "--" + key.replace("_", "-")
            # every value arrives as a string and is validated by the schema
            sp.add_argument(flag, dest=key, type=str)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    kind = ALIASES.get(args.kind, args.kind)
    try:
        cfg, text = resolve(kind, args)
        header, rows, extra = COMMANDS[kind](cfg)
    except ConfigError as e:
        print(f"chanshort: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError, RuntimeError, OSError) as e:
        print(f"chanshort: {kind} failed: {e}", file=sys.stderr)
        return 1
    meta = {**_meta(kind, cfg, text), **extra.get("meta", {})}
    write_csv(cfg["out"], header, rows, meta)
    out = Path(cfg["out"])
    for name, h2, r2 in extra.get("side", []):
        write_csv(out.with_name(f"{out.stem}_{name}{out.suffix}"), h2, r2, meta)
    print(cfg["out"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
