"""SVG plots built only from the CSV and JSON files of an output bundle.

Plots are byte-stable: the SVG hash salt is fixed, date and creator
metadata are dropped, and text is written as text rather than glyph paths.
"""

from __future__ import annotations

import json
import logging
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import read_columns  # noqa: E402

log = logging.getLogger(__name__)

_RC = {
    "svg.hashsalt": "radialwave",
    "svg.fonttype": "none",
    "path.simplify": False,
    "figure.figsize": (6.4, 4.2),
    "font.size": 9,
}
_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_snapshots(csv_paths: list[Path], out: Path, title: str) -> Path | None:
    """Overlay ``Re u(r)`` from snapshot CSVs (columns ``r,re_u,im_u,re_ut,im_ut``)."""
    if not csv_paths:
        warnings.warn(f"no snapshots for {title}; plot skipped", stacklevel=2)
        return None
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for p in csv_paths:
            _, data = read_columns(p)
            ax.plot(data[:, 0], data[:, 1], lw=0.9, label=p.stem)
        ax.set_xlabel("r")
        ax.set_ylabel("Re u")
        ax.set_title(title)
        ax.legend(fontsize=7)
        return _save(fig, out)


def plot_energy(csv_path: Path, out: Path) -> Path | None:
    """K, P and E against t from an energy CSV (``t,K,P,E``)."""
    _, data = read_columns(csv_path)
    if data.size == 0:
        warnings.warn("empty energy table; plot skipped", stacklevel=2)
        return None
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for k, name in enumerate(("K", "P", "E"), start=1):
            ax.plot(data[:, 0], data[:, k], marker="o", ms=3, lw=1, label=name)
        ax.set_xlabel("t")
        ax.set_ylabel("energy")
        ax.legend()
        return _save(fig, out)


def plot_decay(csv_path: Path, report_path: Path, out: Path) -> Path | None:
    """Log-scale plot of a decay report with a vertical line where its claim starts."""
    _, data = read_columns(csv_path)
    if data.size == 0:
        warnings.warn(f"empty report {csv_path.name}; plot skipped", stacklevel=2)
        return None
    report = json.loads(report_path.read_text())
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        y = np.abs(data[:, 1])
        ax.semilogy(data[:, 0], np.where(y > 0, y, np.nan), lw=1)
        ax.axvline(report["region_start"], color="k", ls="--", lw=0.8, label="claim threshold")
        if report.get("claim") in ("strong_huygens", "equipartition_exact"):
            level = report["threshold"] * (report.get("peak") or 1.0)
            ax.axhline(level, color="r", ls=":", lw=0.8, label="tolerance")
        ax.set_xlabel("t")
        ax.set_title(report["claim"])
        ax.legend(fontsize=7)
        return _save(fig, out)


def emit_plots(bundle: Path) -> list[Path]:
    """Create every plot the files in ``bundle`` support; returns the SVG paths."""
    bundle = Path(bundle)
    made: list[Path] = []
    snap_dir = bundle / "snapshots"
    if snap_dir.is_dir():
        solvers = sorted({p.name.split("_t")[0] for p in snap_dir.glob("*.csv")})
        for s in solvers:
            paths = sorted(snap_dir.glob(f"{s}_t*.csv"))
            p = plot_snapshots(paths, bundle / "plots" / f"snapshots_{s}.svg", s)
            if p is not None:
                made.append(p)
    energy_csv = bundle / "energy.csv"
    if energy_csv.exists():
        p = plot_energy(energy_csv, bundle / "plots" / "energy.svg")
        if p is not None:
            made.append(p)
    diag = bundle / "diagnostics"
    if diag.is_dir():
        for csv_path in sorted(diag.glob("*.csv")):
            rep = csv_path.with_suffix(".json")
            if rep.exists() and "region_start" in json.loads(rep.read_text()):
                p = plot_decay(csv_path, rep, bundle / "plots" / f"{csv_path.stem}.svg")
                if p is not None:
                    made.append(p)
    log.info("wrote %d plots", len(made))
    return made
