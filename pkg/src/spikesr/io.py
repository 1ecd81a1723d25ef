"""File formats: CSV signals, 16-bit PGM images, JSON metadata.

All writers go through an atomic temp-file rename and produce byte-stable
output for identical inputs, so manifests can checksum everything.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .certificates import Certificate
from .grid import Grid, GridSignal
from .rayleigh import SupportSet

__all__ = [
    "atomic_write_text",
    "write_json",
    "read_json",
    "sha256_file",
    "write_signal_csv",
    "read_signal_csv",
    "write_signal_pgm",
    "support_to_dict",
    "support_from_dict",
    "certificate_to_dict",
]

PGM_LEVELS = 65535


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _format_value(v: float) -> str:
    return format(float(v), ".17g")


def write_signal_csv(path, signal: GridSignal) -> None:
    """1D: one value per line; 2D: N rows of N comma-separated values."""
    values = signal.values
    if signal.grid.dimension == 1:
        lines = [_format_value(v) for v in values]
    else:
        lines = [",".join(_format_value(v) for v in row) for row in values]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_signal_csv(path, grid: Grid, nonneg: bool = False) -> GridSignal:
    text = Path(path).read_text().strip()
    rows = [[float(v) for v in line.split(",")] for line in text.splitlines()]
    if grid.dimension == 1:
        values = np.array([r[0] for r in rows])
    else:
        values = np.array(rows)
    return GridSignal(grid, values, nonneg=nonneg)


def write_signal_pgm(path, signal: GridSignal) -> dict:
    """16-bit ASCII PGM with linear scaling; the scaling goes to a sidecar.

    Values are mapped linearly from [0, max] to [0, 65535]; the sidecar
    JSON (``<path>.json``) records the max so intensities can be recovered.
    """
    if signal.grid.dimension != 2:
        raise ValueError("PGM output is for 2D signals")
    values = np.clip(signal.values, 0.0, None)
    vmax = float(values.max())
    scale = PGM_LEVELS / vmax if vmax > 0 else 0.0
    pixels = np.rint(values * scale).astype(np.int64)
    n = signal.grid.size
    body = "\n".join(" ".join(str(int(p)) for p in row) for row in pixels)
    atomic_write_text(path, f"P2\n{n} {n}\n{PGM_LEVELS}\n{body}\n")
    sidecar = {"max_value": vmax, "levels": PGM_LEVELS, "scaling": "linear"}
    write_json(str(path) + ".json", sidecar)
    return sidecar


def support_to_dict(support: SupportSet) -> dict:
    return {
        "N": support.grid.size,
        "D": support.grid.dimension,
        "points": [list(p) for p in support.indices],
    }


def support_from_dict(payload: dict, cutoff: int) -> SupportSet:
    grid = Grid(int(payload["D"]), int(payload["N"]), cutoff)
    return SupportSet(grid, [tuple(p) for p in payload["points"]])


def flattening_filter_to_dict(filt) -> dict:
    """Filter spectrum with its ramp parameters and measured norm."""
    return {
        "N": filt.grid.size,
        "fc": filt.grid.cutoff,
        "alpha": filt.alpha,
        "a": filt.a,
        "b": filt.b,
        "coefficients": filt.multiplier.coeffs.tolist(),
        "one_norm": filt.one_norm,
        "norm_budget": filt.norm_budget,
    }


def certificate_to_dict(cert: Certificate) -> dict:
    coeffs = np.asarray(cert.coeffs)
    payload = {
        "band_limit": cert.band_limit,
        "N": cert.grid.size,
        "D": cert.grid.dimension,
        "coefficients_real": coeffs.real.tolist(),
        "coefficients_imag": coeffs.imag.tolist(),
        "roots": [list(p) for p in cert.roots.indices],
        "rho": cert.rho,
        "sup_norm": cert.sup_norm,
        "min_value": cert.min_value,
        "root_residual": cert.root_residual,
        "growth_c1": cert.growth_c1,
        "growth_radius": cert.growth_radius,
    }
    if cert.factor_growth is not None:
        payload["factor_growth"] = list(cert.factor_growth)
    return payload
