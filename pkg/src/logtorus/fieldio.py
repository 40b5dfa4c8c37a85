"""CSV import/export for fields, masks, measures, spectra, indicators.

Every file starts with comment headers carrying the grid geometry and,
when written through the CLI, the config hash and seed, so outputs are
reproducible bit for bit.  Writes are atomic (temp file + rename).
Floats are formatted with %.17g, which round-trips doubles exactly.
"""

from __future__ import annotations

import os
import tempfile
from typing import Optional

import numpy as np

from .errors import ConfigError
from .torus import Grid, GridField, TorusSpec

__all__ = [
    "atomic_write", "field_to_csv", "mask_to_csv", "measure_to_csv",
    "spectrum_to_csv", "indicator_to_csv", "read_field_csv", "format_float",
]


def format_float(x) -> str:
    return "%.17g" % float(x)


def atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_logtorus_")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _headers(grid: Grid, extra: Optional[dict]) -> str:
    lines = [f"# nx {grid.nx} ny {grid.ny} P {format_float(grid.spec.P)}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {v}")
    return "\n".join(lines) + "\n"


def field_to_csv(path: str, field: GridField, style: str = "matrix",
                 extra: Optional[dict] = None):
    """Write a field as a matrix block (rows over y, outer) or as
    x,y,value lines; complex fields get re,im columns."""
    grid = field.grid
    vals = field.values
    out = [_headers(grid, extra)]
    cplx = np.iscomplexobj(vals)
    if style == "matrix":
        for row in (vals if not cplx else vals.real):
            out.append(",".join(format_float(v) for v in row) + "\n")
        if cplx:
            out.append("# imaginary part\n")
            for row in vals.imag:
                out.append(",".join(format_float(v) for v in row) + "\n")
    elif style == "xyz":
        X, Y = grid.meshgrid()
        for j in range(grid.ny):
            for i in range(grid.nx):
                if cplx:
                    out.append(f"{format_float(X[j, i])},{format_float(Y[j, i])},"
                               f"{format_float(vals[j, i].real)},"
                               f"{format_float(vals[j, i].imag)}\n")
                else:
                    out.append(f"{format_float(X[j, i])},{format_float(Y[j, i])},"
                               f"{format_float(vals[j, i])}\n")
    else:
        raise ConfigError(f"unknown field style {style!r}")
    atomic_write(path, "".join(out))


def window_field_to_csv(path: str, window, values: np.ndarray,
                        extra: Optional[dict] = None):
    """Matrix block for a field on a covering window; the header records
    the window's period span alongside the parent grid geometry."""
    grid = window.grid
    lines = [f"# nx {grid.nx} ny {grid.ny} P {format_float(grid.spec.P)}",
             f"# window px {window.px_lo} {window.px_hi} "
             f"py {window.py_lo} {window.py_hi}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {v}")
    out = ["\n".join(lines) + "\n"]
    for row in values:
        out.append(",".join(format_float(v) for v in row) + "\n")
    atomic_write(path, "".join(out))


def mask_to_csv(path: str, mask, extra: Optional[dict] = None):
    """0/1 cells, row-major with y as the outer index."""
    out = [_headers(mask.grid, extra)]
    for row in mask.inside.astype(int):
        out.append(",".join(str(v) for v in row) + "\n")
    atomic_write(path, "".join(out))


def measure_to_csv(path: str, measure, extra: Optional[dict] = None):
    out = [_headers(measure.grid, extra)]
    for row in measure.masses:
        out.append(",".join(format_float(v) for v in row) + "\n")
    atomic_write(path, "".join(out))


def spectrum_to_csv(path: str, result, extra: Optional[dict] = None):
    """Lines 're im residual', sorted by |rho| (as computed)."""
    lines = [_headers(result.domain.grid, extra)]
    lines.append("# re im residual\n")
    for rho, res in zip(result.eigenvalues, result.residuals):
        lines.append(f"{format_float(rho.real)} {format_float(rho.imag)} "
                     f"{format_float(res)}\n")
    atomic_write(path, "".join(lines))


def indicator_to_csv(path: str, indicator, extra: Optional[dict] = None):
    lines = []
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {v}\n")
    lines.append("# theta,value\n")
    for t, v in zip(indicator.thetas(), indicator.values):
        lines.append(f"{format_float(t)},{format_float(v)}\n")
    atomic_write(path, "".join(lines))


def read_field_csv(path: str) -> GridField:
    """Read a matrix-block field file written by field_to_csv."""
    nx = ny = None
    P = None
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["nx"]:
                    nx, ny, P = int(parts[1]), int(parts[3]), float(parts[5])
                continue
            rows.append([float(v) for v in line.split(",")])
    if nx is None:
        raise ConfigError(f"{path}: missing '# nx ... ny ... P ...' header")
    vals = np.array(rows)
    if vals.shape != (ny, nx):
        raise ConfigError(f"{path}: expected {ny}x{nx} block, got {vals.shape}")
    return GridField(Grid(TorusSpec(P), nx, ny), vals)
