"""Command-line scenario runner.

A scenario file is a flat list of ``section.key = value`` lines::

    model.alpha = 0.5
    model.beta = -0.5
    data.radius = 0.5
    grid.lambda_max = 800
    grid.times = 0, 1, 2
    run.solvers = spectral
    run.diagnostics = huygens, equipartition

Every grid is checked against the guards of the numerical modules before
anything is computed or written.  Exit codes: 0 when all asserted
diagnostics pass, 2 when one fails, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import traceback
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numba
import numpy as np

from . import analysis, eigen, wave
from .csvio import write_columns
from .density import DensityModel, model_from_mapping, parse_key_values
from .errors import ConfigError, DomainError, RadialWaveError
from .plots import emit_plots
from .quadrature import make_lambda_grid
from .transforms import RESOLUTION_LIMIT, RadialFunction, check_resolution, bump, calibrate_c0, radial_grid, spectral_norm2

log = logging.getLogger("radialwave")

SOLVERS = ("spectral", "series", "dalembert", "fdtd")
DIAGNOSTICS = (
    "huygens", "equipartition", "energy", "leakage", "agreement",
    "paley_wiener", "pw_radius", "energy_bound",
)
KNOWN_KEYS = {
    "scenario.name",
    "model.kind", "model.alpha", "model.beta", "model.scale", "model.table",
    "data.radius", "data.f_amplitude", "data.g_amplitude", "data.g_radius",
    "grid.lambda_max", "grid.dr", "grid.r_max", "grid.dr_out", "grid.times",
    "run.solvers", "run.diagnostics",
    "series.r_dom", "series.k",
    "dalembert.points", "dalembert.lambda_max",
    "fdtd.dr", "fdtd.dt",
    "huygens.d", "huygens.t",
    "equipartition.t",
    "paley_wiener.n", "paley_wiener.tau", "paley_wiener.lambda_max",
    "pw_radius.lambda_edge", "pw_radius.j_max",
    "agreement.tol",
}


# ----------------------------------------------------------------------
# parsing helpers
def _float(cfg: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return float(default)
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from None


def _list(cfg: dict[str, str], key: str, default: Sequence[str] = ()) -> list[str]:
    if key not in cfg:
        return list(default)
    return [x.strip() for x in cfg[key].split(",") if x.strip()]


def parse_values(text: str, key: str = "value") -> list[float]:
    """Comma-separated numbers; ``a:b:step`` expands to an inclusive range."""
    out: list[float] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        try:
            if ":" in part:
                a, b, h = (float(x) for x in part.split(":"))
                if h <= 0 or b < a:
                    raise ConfigError(f"{key}: bad range {part!r}")
                n = int(round((b - a) / h))
                out.extend(np.linspace(a, a + n * h, n + 1).tolist())
            else:
                out.append(float(part))
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {part!r}") from None
    return out


# ----------------------------------------------------------------------
@dataclass
class Scenario:
    """A validated scenario; all numbers already checked against the guards."""

    name: str
    config: dict[str, str]
    model: DensityModel
    radius: float
    f_amplitude: float
    g_amplitude: float
    g_radius: float
    lambda_max: float
    dr: float
    r_max: float
    dr_out: float
    times: list[float]
    solvers: list[str]
    diagnostics: list[str]
    series_r_dom: float = 0.0
    series_k: int = 0
    dalembert_points: list[tuple[float, float]] = field(default_factory=list)
    dalembert_lambda_max: float = 0.0
    fdtd_dr: float = 1e-3
    fdtd_dt: float = 5e-4
    huygens_d: float = 2.0
    huygens_t: list[float] = field(default_factory=list)
    equipartition_t: list[float] = field(default_factory=list)
    pw_n: list[int] = field(default_factory=list)
    pw_tau: list[float] = field(default_factory=list)
    pw_lambda_max: float = 400.0
    pw_lambda_edge: float = 2.0
    pw_j_max: int = 40
    agreement_tol: float = 1e-4

    @property
    def t_max(self) -> float:
        return max((abs(t) for t in self.times), default=0.0)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return scenario_from_mapping(parse_key_values(text), path.parent, path.stem)


def scenario_from_mapping(cfg: dict[str, str], base_dir: Path | None = None, default_name: str = "scenario") -> Scenario:
    """Parse and validate a scenario mapping (raises before any computation)."""
    unknown = sorted(set(cfg) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    mspec = {"model": cfg.get("model.kind", "jacobi")}
    for k in ("alpha", "beta", "scale", "table"):
        if f"model.{k}" in cfg:
            mspec[k] = cfg[f"model.{k}"]
    model = model_from_mapping(mspec, base_dir)
    s = model.scale

    radius = _float(cfg, "data.radius", 1.0 / s)
    if not radius > 0:
        raise ConfigError("data.radius must be positive")
    f_amp = _float(cfg, "data.f_amplitude", 1.0)
    g_amp = _float(cfg, "data.g_amplitude", 0.0)
    g_radius = _float(cfg, "data.g_radius", radius)
    if g_amp != 0 and not 0 < g_radius <= radius:
        raise ConfigError("data.g_radius must lie in (0, data.radius]")

    lam_max = _float(cfg, "grid.lambda_max", 800.0 * s)
    dr = _float(cfg, "grid.dr", RESOLUTION_LIMIT / lam_max)
    check_resolution(lam_max, dr)
    times = parse_values(cfg.get("grid.times", "0"), "grid.times")
    t_max = max(abs(t) for t in times)
    r_max = _float(cfg, "grid.r_max", radius + t_max + 1.0 / s)
    if r_max < radius + t_max + 1.0 / s - 1e-12:
        raise ConfigError("grid.r_max must be at least data.radius + max|t| + 1")
    dr_out = _float(cfg, "grid.dr_out", 0.01 / s)

    solvers = _list(cfg, "run.solvers", ["spectral"])
    diags = _list(cfg, "run.diagnostics", [])
    for x in solvers:
        if x not in SOLVERS:
            raise ConfigError(f"unknown solver {x!r}")
    for x in diags:
        if x not in DIAGNOSTICS:
            raise ConfigError(f"unknown diagnostic {x!r}")
    if not solvers and any(d in diags for d in ("energy", "leakage", "agreement")):
        raise ConfigError("energy, leakage and agreement need at least one solver")

    sc = Scenario(
        cfg.get("scenario.name", default_name), dict(cfg), model, radius, f_amp, g_amp, g_radius,
        lam_max, dr, r_max, dr_out, times, solvers, diags,
    )
    if "series" in solvers:
        sc.series_r_dom = _float(cfg, "series.r_dom", radius + t_max + 0.5 / s)
        if not sc.series_r_dom > radius + t_max:
            raise DomainError("series.r_dom must exceed data.radius + max|t|")
        k_default = wave.series_mode_count(model, sc.series_r_dom, lam_max)
        sc.series_k = int(_float(cfg, "series.k", k_default))
        if sc.series_k < 1:
            raise ConfigError("series.k must be positive")
    if any(t < 0 for t in times) and "fdtd" in solvers:
        raise ConfigError("the fdtd solver only runs forward in time")
    if "dalembert" in solvers:
        pts = []
        for item in _list(cfg, "dalembert.points"):
            try:
                d, t = (float(x) for x in item.split(":"))
            except ValueError:
                raise ConfigError(f"dalembert.points: expected d:t, got {item!r}") from None
            if d < 0:
                raise ConfigError("dalembert distances must be non-negative")
            pts.append((d, t))
        if not pts:
            raise ConfigError("dalembert solver needs dalembert.points")
        sc.dalembert_points = pts
        sc.dalembert_lambda_max = _float(cfg, "dalembert.lambda_max", min(lam_max, 400.0 * s))
    if "fdtd" in solvers:
        sc.fdtd_dr = _float(cfg, "fdtd.dr", 1e-3 / s)
        sc.fdtd_dt = _float(cfg, "fdtd.dt", 0.5 * sc.fdtd_dr)
        wave.check_cfl(sc.fdtd_dr, sc.fdtd_dt)
        ratio = sc.dr_out / sc.fdtd_dr
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("grid.dr_out must be a multiple of fdtd.dr")
    if "huygens" in diags:
        sc.huygens_d = _float(cfg, "huygens.d", 2.0 / s)
        sc.huygens_t = parse_values(cfg.get("huygens.t", f"0:{sc.huygens_d + radius + 4.0 / s}:0.02"), "huygens.t")
        if max(sc.huygens_t) <= sc.huygens_d + radius:
            raise ConfigError("huygens.t must extend beyond huygens.d + data.radius")
    if "equipartition" in diags:
        sc.equipartition_t = parse_values(cfg.get("equipartition.t", f"0:{radius + 6.0 / s}:0.05"), "equipartition.t")
    if "paley_wiener" in diags:
        sc.pw_n = [int(x) for x in parse_values(cfg.get("paley_wiener.n", "0,1,2,3,4,5,6"))]
        sc.pw_tau = parse_values(cfg.get("paley_wiener.tau", "0, 0.5"))
        sc.pw_lambda_max = _float(cfg, "paley_wiener.lambda_max", 400.0)
        check_resolution(sc.pw_lambda_max * s, dr)
        if any(abs(t) > model.rho + eigen.STRIP_MARGIN * s for t in sc.pw_tau):
            raise DomainError("paley_wiener.tau outside the supported strip")
    if "pw_radius" in diags or "energy_bound" in diags:
        sc.pw_lambda_edge = _float(cfg, "pw_radius.lambda_edge", 2.0 * s)
        sc.pw_j_max = int(_float(cfg, "pw_radius.j_max", 40))
    sc.agreement_tol = _float(cfg, "agreement.tol", 1e-4)
    return sc


# ----------------------------------------------------------------------
# running
@dataclass
class Bundle:
    """Files written by a run and the pass/fail state of asserted diagnostics."""

    out_dir: Path
    files: list[Path] = field(default_factory=list)
    results: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.results.values())


def _json_dump(path: Path, obj: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(x: Any) -> Any:
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _diag_record(claim: str, region: str, measured: float, threshold: float, passed: bool, **extra: Any) -> dict[str, Any]:
    rec = {"claim": claim, "region": region, "measured": float(measured), "threshold": float(threshold), "pass": bool(passed)}
    rec.update(extra)
    return rec


class Runner:
    """Executes a validated scenario and writes its bundle."""

    def __init__(self, sc: Scenario, out_dir: Path):
        self.sc = sc
        self.bundle = Bundle(Path(out_dir))
        self.model = sc.model
        self._data: wave.CauchyData | None = None
        self._spectrum: wave.CauchySpectrum | None = None
        self.states: dict[str, list[wave.WaveState]] = {}
        self.r_out = radial_grid(sc.r_max, sc.dr_out)

    # -- shared products
    @property
    def data(self) -> wave.CauchyData:
        if self._data is None:
            sc = self.sc
            self._data = wave.bump_data(
                radial_grid(sc.radius, sc.dr), sc.radius, sc.f_amplitude, sc.g_amplitude, sc.g_radius
            )
        return self._data

    @property
    def spectrum(self) -> wave.CauchySpectrum:
        if self._spectrum is None:
            sc = self.sc
            t_span = max([sc.t_max] + sc.huygens_t + sc.equipartition_t)
            bw = self.data.support_radius + t_span + max(sc.r_max, sc.huygens_d)
            grid = make_lambda_grid(sc.lambda_max, bandwidth=bw)
            log.info("transforming Cauchy data on %d spectral nodes", grid.size)
            self._spectrum = wave.cauchy_spectrum(self.model, self.data, grid)
        return self._spectrum

    def _write(self, path: Path) -> None:
        self.bundle.files.append(path)

    # -- solvers
    def run_solvers(self, write: bool = True) -> None:
        sc = self.sc
        for name in sc.solvers:
            log.info("solver %s", name)
            if name == "spectral":
                self.states[name] = wave.spectral_trajectory(self.model, self.data, sc.times, self.r_out, self.spectrum)
            elif name == "series":
                sol = wave.series_solution(self.model, self.data, sc.series_r_dom, sc.series_k)
                r = self.r_out[self.r_out <= sc.series_r_dom]
                self.states[name] = sol.states(self.model, sc.times, r)
            elif name == "fdtd":
                order = np.argsort(sc.times, kind="stable")
                traj = wave.fdtd_trajectory(self.model, self.data, [sc.times[i] for i in order], sc.fdtd_dr, sc.fdtd_dt)
                step = int(round(sc.dr_out / sc.fdtd_dr))
                states: list[wave.WaveState] = [None] * len(traj)  # type: ignore[list-item]
                for k, st in zip(order, traj):
                    n = min(self.r_out.size, (st.r_grid.size - 1) // step + 1)
                    r = st.r_grid[::step][:n]
                    states[k] = wave.WaveState(
                        st.t, RadialFunction(r, st.u.values[::step][:n], st.u.support_radius),
                        RadialFunction(r, st.ut.values[::step][:n], st.ut.support_radius),
                    )
                    self.states.setdefault("fdtd_full", []).append(st)
                self.states[name] = states
            elif name == "dalembert":
                self.states[name] = []
        if write:
            for name, states in self.states.items():
                if name in ("dalembert", "fdtd_full"):
                    continue
                for k, st in enumerate(states):
                    self._write(st.to_csv(self.bundle.out_dir / "snapshots" / f"{name}_t{k:03d}.csv"))
        if "dalembert" in sc.solvers:
            self.dalembert_values = self._dalembert()
            if write:
                d, t, v = zip(*self.dalembert_values) if self.dalembert_values else ((), (), ())
                vals = np.asarray(v, dtype=complex)
                self._write(write_columns(self.bundle.out_dir / "dalembert_points.csv", ["d", "t", "re_u", "im_u"],
                                          [d, t, vals.real, vals.imag]))

    def _dalembert(self) -> list[tuple[float, float, complex]]:
        sc = self.sc
        grid = make_lambda_grid(sc.dalembert_lambda_max, bandwidth=2 * (max(d for d, _ in sc.dalembert_points) + sc.radius) + sc.t_max)
        out = []
        by_d: dict[float, list[float]] = {}
        for d, t in sc.dalembert_points:
            by_d.setdefault(d, []).append(t)
        for d in sorted(by_d):
            ts = by_d[d]
            vals = wave.propagate_dalembert_times(self.model, self.data, d, ts, grid)
            out += [(d, t, complex(v)) for t, v in zip(ts, vals)]
        order = {p: i for i, p in enumerate(sc.dalembert_points)}
        return sorted(out, key=lambda x: order[(x[0], x[1])])

    # -- diagnostics
    def run_diagnostics(self) -> None:
        sc = self.sc
        ddir = self.bundle.out_dir / "diagnostics"
        huygens_rate = None
        for name in sc.diagnostics:
            log.info("diagnostic %s", name)
            if name == "huygens":
                rep = analysis.huygens_profile(self.model, self.data, sc.huygens_d, sc.huygens_t, self.spectrum)
                huygens_rate = rep.rate
                self._report(ddir, "huygens", rep, extra={"d": sc.huygens_d})
            elif name == "equipartition":
                rep = analysis.equipartition_profile(self.model, self.data, sc.equipartition_t, self.spectrum, huygens_rate)
                self._report(ddir, "equipartition", rep)
            elif name == "energy":
                self._energy(ddir)
            elif name == "leakage":
                recs = {}
                for s, states in self.states.items():
                    if s in ("dalembert", "fdtd_full") or not states:
                        continue
                    if s == "fdtd":
                        states = self.states["fdtd_full"]
                    leak = analysis.light_cone_leakage(self.model, states, self.data.support_radius)
                    tol = 1e-4 if s == "fdtd" else 1e-8
                    recs[s] = _diag_record("finite_propagation_speed", "r > R0 + |t| + 3 dr", leak, tol, leak <= tol)
                    self.bundle.results[f"leakage_{s}"] = leak <= tol
                self._write(_json_dump(ddir / "leakage.json", recs))
            elif name == "agreement":
                self._agreement(ddir)
            elif name == "paley_wiener":
                f = bump(radial_grid(sc.radius, sc.dr), sc.radius, sc.f_amplitude)
                rows = analysis.paley_wiener_report(self.model, f, sc.pw_n, sc.pw_tau, sc.pw_lambda_max)
                ok = all(r.plateau for r in rows) and all(r.within_envelope in (None, True) for r in rows)
                recs = [r.__dict__ for r in rows]
                failing = sum(1 for r in rows if not r.plateau or r.within_envelope is False)
                self._write(_json_dump(ddir / "paley_wiener.json", _diag_record(
                    "paley_wiener_plateau", f"lambda in [0, {sc.pw_lambda_max}], tau in {sc.pw_tau}",
                    failing, 0, ok, rows=recs)))
                self.bundle.results["paley_wiener"] = ok
            elif name == "pw_radius":
                F = analysis.band_limited_spectrum(self.model, sc.pw_lambda_edge)
                res = analysis.pw_radius(self.model, F, sc.pw_j_max)
                err = abs(res.radius / sc.pw_lambda_edge - 1.0)
                ok = err <= 0.02
                self._write(write_columns(ddir / "pw_radius.csv", ["j", "m_j"], [np.arange(1, res.m.size + 1), res.m]))
                self._write(_json_dump(ddir / "pw_radius.json", _diag_record(
                    "spectral_radius", f"j <= {sc.pw_j_max}", err, 0.02, ok,
                    radius=res.radius, m_last=res.m_last, expected=sc.pw_lambda_edge)))
                self.bundle.results["pw_radius"] = ok
            elif name == "energy_bound":
                self._energy_bound(ddir)

    def _report(self, ddir: Path, name: str, rep: analysis.DecayReport, extra: dict[str, Any] | None = None) -> None:
        self._write(write_columns(ddir / f"{name}.csv", ["t", "value"], [rep.abscissa, rep.values]))
        rec = rep.to_json()
        rec["pass"] = rec.pop("passed")
        if extra:
            rec.update(extra)
        self._write(_json_dump(ddir / f"{name}.json", rec))
        self.bundle.results[name] = rep.passed

    def _energy(self, ddir: Path) -> None:
        sc = self.sc
        base = "spectral" if "spectral" in self.states else next(s for s in self.states if s not in ("dalembert", "fdtd_full"))
        states = self.states[base] if base != "fdtd" else self.states["fdtd_full"]
        spec = self.spectrum
        rows = [wave.energy(self.model, st, spec) for st in states]
        E0 = wave.spectral_total_energy(self.model, spec)
        self._write(write_columns(self.bundle.out_dir / "energy.csv", ["t", "K", "P", "E"],
                                  [[r.t for r in rows], [r.K for r in rows], [r.P for r in rows], [r.E for r in rows]]))
        scale = abs(E0) if E0 != 0 else 1.0
        drift = max(abs(r.E - E0) for r in rows) / scale
        ident = abs(wave.physical_identity_energy(self.model, self.data) - E0) / scale
        recs = {
            "conservation": _diag_record("energy_conservation", f"t in {sc.times}", drift, 1e-6, drift <= 1e-6, solver=base),
            "identity": _diag_record("energy_identity_t0", "t = 0", ident, 1e-6, ident <= 1e-6),
        }
        self._write(_json_dump(ddir / "energy.json", recs))
        self.bundle.results["energy_conservation"] = drift <= 1e-6
        self.bundle.results["energy_identity"] = ident <= 1e-6

    def _agreement(self, ddir: Path) -> None:
        sc = self.sc
        ref = self.states.get("spectral")
        if ref is None:
            raise ConfigError("agreement needs the spectral solver as reference")
        table = {}
        for s, states in self.states.items():
            if s in ("spectral", "dalembert", "fdtd_full") or not states:
                continue
            worst = 0.0
            for a, b in zip(ref, states):
                n = min(a.r_grid.size, b.r_grid.size)
                worst = max(worst, float(np.max(np.abs(a.u.values[:n] - b.u.values[:n]))))
            table[s] = _diag_record("solver_agreement", f"r <= {sc.r_max}, t in {sc.times}", worst,
                                    sc.agreement_tol, worst <= sc.agreement_tol)
        if "dalembert" in sc.solvers:
            worst = 0.0
            for d, t, v in self.dalembert_values:
                u, _ = wave.spectral_point_values(self.model, self.spectrum, d, [t])
                worst = max(worst, abs(complex(u[0]) - v))
            table["dalembert"] = _diag_record("solver_agreement", "dalembert.points", worst,
                                              sc.agreement_tol, worst <= sc.agreement_tol)
        for s, rec in table.items():
            self.bundle.results[f"agreement_{s}"] = rec["pass"]
        self._write(_json_dump(ddir / "agreement.json", table))

    def _energy_bound(self, ddir: Path) -> None:
        sc = self.sc
        F = analysis.band_limited_spectrum(self.model, sc.pw_lambda_edge)
        zero = F.with_values(np.zeros(F.grid.size))
        spec = wave.CauchySpectrum(F, zero, math.inf)
        twoE = 2.0 * wave.spectral_total_energy(self.model, spec)
        bound = sc.pw_lambda_edge**2 * spectral_norm2(self.model, F)
        ok = twoE <= bound + 1e-6
        self._write(_json_dump(ddir / "energy_bound.json", _diag_record(
            "energy_bound_band_limited", f"spectral support [0, {sc.pw_lambda_edge}]", twoE, bound + 1e-6, ok)))
        self.bundle.results["energy_bound"] = ok

    # -- spectrum command
    def write_spectrum(self) -> None:
        spec = self.spectrum
        lam = spec.lambdas
        out = self.bundle.out_dir
        self._write(write_columns(out / "spectrum.csv", ["lambda", "weight", "re_F", "im_F", "re_G", "im_G"],
                                  [lam, spec.grid.weights, spec.F.values.real, spec.F.values.imag,
                                   spec.G.values.real, spec.G.values.imag]))
        self._write(write_columns(out / "plancherel.csv", ["lambda", "eta"], [lam, spec.weight]))

    # -- manifest
    def write_manifest(self, command: str) -> None:
        cal = calibrate_c0(self.model)
        versions = {"python": platform.python_version(), "numpy": np.__version__}
        for pkg in ("scipy", "numba", "matplotlib", "artifact"):
            try:
                versions[pkg] = metadata.version(pkg)
            except metadata.PackageNotFoundError:
                versions[pkg] = "unknown"
        files = sorted(str(p.relative_to(self.bundle.out_dir)) for p in self.bundle.files)
        manifest = {
            "command": command,
            "scenario": self.sc.name,
            "config": dict(sorted(self.sc.config.items())),
            "model": self.model.key,
            "c0": {"value": cal.value, "theory": cal.theory, "spread": cal.spread, "plancherel": cal.plancherel},
            "times": self.sc.times,
            "versions": versions,
            "files": files,
            "results": dict(sorted(self.bundle.results.items())),
            "passed": self.bundle.passed,
        }
        _json_dump(self.bundle.out_dir / "manifest.json", manifest)


def run_scenario(config_path: str | Path, out_dir: str | Path | None = None, command: str = "run") -> Bundle:
    """Validate the scenario, then compute and write its bundle."""
    sc = load_scenario(config_path)
    out = Path(out_dir) if out_dir is not None else Path("out") / sc.name
    runner = Runner(sc, out)
    if command == "spectrum":
        runner.write_spectrum()
    elif command == "check":
        runner.run_solvers(write=False)
        runner.run_diagnostics()
    else:
        runner.run_solvers(write=True)
        runner.run_diagnostics()
        runner.bundle.files += emit_plots(out)
    runner.write_manifest(command)
    return runner.bundle


# ----------------------------------------------------------------------
def _provenance(exc: BaseException) -> str:
    tb = traceback.extract_tb(exc.__traceback__)
    for frame in reversed(tb):
        p = Path(frame.filename)
        if p.parent.name == "radialwave":
            return p.stem
    return "cli"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radialwave", description="Radial wave scenarios on harmonic-manifold models.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run solvers and diagnostics, write CSV/JSON/SVG"),
        ("spectrum", "write the spectral data of the scenario"),
        ("check", "run diagnostics only"),
    ):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("config", type=Path)
        q.add_argument("--out", type=Path, default=None, help="output directory (default out/<name>)")
        q.add_argument("--threads", type=int, default=None, help="numba worker threads")
        q.add_argument("--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        bundle = run_scenario(args.config, args.out, args.command)
    except RadialWaveError as exc:
        print(f"error [{_provenance(exc)}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit code 1
        print(f"error [{_provenance(exc)}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for key, ok in sorted(bundle.results.items()):
        print(f"{'PASS' if ok else 'FAIL'} {key}")
    return 0 if bundle.passed else 2


if __name__ == "__main__":
    sys.exit(main())
