"""Plain-text CSV output with round-trip precision."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import numpy.typing as npt

FMT = "%.17g"


def format_float(x: float) -> str:
    """Seventeen significant digits, enough to round-trip any double."""
    return FMT % x


def write_columns(path: str | Path, header: Sequence[str], columns: Sequence[npt.ArrayLike]) -> Path:
    """Write equally long columns as CSV with a header row."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = {c.size for c in cols}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_xy(path: str | Path, x: npt.ArrayLike, values: npt.ArrayLike, xname: str = "x") -> Path:
    """Write samples of a (possibly complex) function as ``x,re,im`` rows."""
    v = np.asarray(values, dtype=complex)
    return write_columns(path, [xname, "re", "im"], [x, v.real, v.imag])


def read_columns(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a CSV written by :func:`write_columns`."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data
