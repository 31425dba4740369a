"""Plain-text and CSV formats for taps, spectra, models and result tables."""
from __future__ import annotations

import csv
import hashlib
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .dsp import ChannelTaps, SpectrumSamples
from .models import BlockUngerboeckModel

__all__ = [
    "read_taps", "write_taps", "read_filter", "write_spectrum", "read_spectrum",
    "write_block_model", "read_block_model", "write_csv", "config_hash",
]


def read_taps(path) -> ChannelTaps:
    """One tap per line as ``re im``; blank lines and ``#`` comments are skipped."""
    taps = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        parts = s.split()
        if len(parts) not in (1, 2):
            raise ValueError(f"{path}:{n}: expected 're im'")
        try:
            re_, im = float(parts[0]), float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError:
            raise ValueError(f"{path}:{n}: not a number") from None
        taps.append(complex(re_, im))
    if not taps:
        raise ValueError(f"{path}: no taps")
    return ChannelTaps(np.array(taps))


def write_taps(path, taps) -> None:
    lines = [f"{v.real:.17g} {v.imag:.17g}" for v in np.asarray(taps, dtype=complex).ravel()]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_filter(path) -> tuple[np.ndarray, int]:
    """Filter tap file: header ``oversampling=<n>`` then ``re im`` lines."""
    text = Path(path).read_text().splitlines()
    head = [(n, l.strip()) for n, l in enumerate(text, 1) if l.strip() and not l.startswith("#")]
    if not head or not head[0][1].startswith("oversampling="):
        raise ValueError(f"{path}: first line must be 'oversampling=<n>'")
    sps = int(head[0][1].split("=", 1)[1])
    body = [l for _, l in head[1:]]
    taps = [complex(float(p[0]), float(p[1]) if len(p) > 1 else 0.0) for p in (b.split() for b in body)]
    return np.array(taps), sps


def write_spectrum(path, spec: SpectrumSamples, meta: dict | None = None) -> None:
    v = np.asarray(spec.values)
    rows = [(w, z.real, z.imag) for w, z in zip(spec.omega, v.astype(complex))]
    write_csv(path, ("omega", "re", "im"), rows, meta)


def read_spectrum(path) -> SpectrumSamples:
    rows = _read_rows(path, ("omega", "re", "im"))
    return SpectrumSamples(np.array([complex(r[1], r[2]) for r in rows]))


def write_block_model(path, model: BlockUngerboeckModel, meta: dict | None = None) -> None:
    Lg = model.memory
    rows = [(i - Lg, r, c, model.G[i, r, c].real, model.G[i, r, c].imag)
            for i in range(2 * Lg + 1) for r in range(model.K) for c in range(model.K)]
    write_csv(path, ("lag", "row", "col", "re", "im"), rows, {"N0": model.N0, **(meta or {})})


def read_block_model(path) -> BlockUngerboeckModel:
    rows = _read_rows(path, ("lag", "row", "col", "re", "im"))
    lags = [int(r[0]) for r in rows]
    Lg = max(abs(l) for l in lags)
    K = max(int(r[1]) for r in rows) + 1
    G = np.zeros((2 * Lg + 1, K, K), dtype=complex)
    for r in rows:
        G[int(r[0]) + Lg, int(r[1]), int(r[2])] = complex(r[3], r[4])
    meta = _read_meta(path)
    return BlockUngerboeckModel(G, float(meta.get("N0", 1.0)))


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def write_csv(path, header, rows, meta: dict | None = None) -> None:
    """CSV with leading ``# key: value`` lines, written atomically."""
    buf = io.StringIO()
    for k, v in {"version": __version__, **(meta or {})}.items():
        for line in str(v).splitlines() or [""]:
            buf.write(f"# {k}: {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    _atomic_write(path, buf.getvalue())


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return x


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_meta(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("# ") and ":" in line:
            k, v = line[2:].split(":", 1)
            out[k.strip()] = v.strip()
    return out


def _read_rows(path, header):
    lines = [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]
    rd = list(csv.reader(lines))
    if not rd or tuple(rd[0]) != tuple(header):
        raise ValueError(f"{path}: expected header {','.join(header)}")
    return [[float(x) for x in r] for r in rd[1:]]
