"""Diagnostics: Huygens and equipartition decay, Paley-Wiener bounds, supports.

Every report records the region in which it makes a claim, the measured
quantity and the threshold it is compared against, so the CLI can write it
out as JSON unchanged.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
from scipy.special import logsumexp

from . import eigen
from .density import DensityModel
from .errors import DomainError
from .quadrature import make_lambda_grid, uniform_weights
from .transforms import (
    RadialFunction,
    SpectralFunction,
    _radial_weights,
    abel,
    plancherel_constant,
    smooth_step,
)
from .wave import (
    CauchyData,
    CauchySpectrum,
    WaveState,
    _derivative,
    cauchy_spectrum,
    spectral_energies,
    spectral_point_values,
    spectral_total_energy,
)

FloatArray = npt.NDArray[np.float64]

HUYGENS_TOL = 1e-6
EQUIPARTITION_TOL = 1e-6
FIT_RESIDUAL_MAX = 0.1
# fits of decay rates start this many curvature lengths past the threshold
FIT_DELAY = 1.5
# samples below this fraction of the peak are round-off and excluded from fits
FIT_FLOOR = 1e-13


@dataclass
class DecayReport:
    """A decay measurement along ``abscissa`` (times or spectral parameters).

    ``rate`` is the fitted exponential decay rate (``None`` unless the RMS
    residual of the log-linear fit is below 0.1).  ``measured`` is the value
    compared with ``threshold`` to decide ``passed``.
    """

    claim: str
    abscissa: FloatArray
    values: FloatArray
    region_start: float
    threshold: float
    measured: float
    passed: bool
    rate: float | None = None
    residual: float | None = None
    peak: float | None = None
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["abscissa"] = [float(x) for x in self.abscissa]
        d["values"] = [float(x) for x in self.values]
        d["region"] = f"t >= {self.region_start!r}"
        return d


def has_polynomial_plancherel(model: DensityModel) -> bool:
    """True when ``eta`` is a polynomial for a Jacobi model.

    With ``s = 1``, ``eta`` is proportional to
    ``|Gamma((i lam + p)/2) Gamma((i lam + q)/2) / Gamma(i lam)|^2`` with
    ``p = alpha + beta + 1`` and ``q = alpha - beta + 1``.  The Gamma poles at
    ``lam = i (p + 2m)`` and ``i (q + 2m)`` are all cancelled by the simple
    zeros of ``lam sinh(pi lam)`` exactly when ``p`` and ``q`` are positive
    integers of different parity, i.e. ``2 beta`` odd and ``p`` integral.
    """
    if model.kind != "jacobi":
        return False
    p = model.alpha + model.beta + 1.0
    q = model.alpha - model.beta + 1.0

    def is_int(x: float) -> bool:
        return abs(x - round(x)) < 1e-12

    return is_int(p) and is_int(q) and p > 0 and q > 0 and int(round(p - q)) % 2 != 0


def fit_decay(t: FloatArray, values: FloatArray, floor: float = 0.0) -> tuple[float, float, int]:
    """Least-squares fit ``log v = c - rate * t``; returns ``(rate, rms residual, n used)``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = v > floor
    if ok.sum() < 3:
        return float("nan"), float("inf"), int(ok.sum())
    p = np.polyfit(t[ok], np.log(v[ok]), 1)
    res = float(np.sqrt(np.mean((np.polyval(p, t[ok]) - np.log(v[ok])) ** 2)))
    return float(-p[0]), res, int(ok.sum())


def _spectrum(model: DensityModel, data: CauchyData, spectrum: CauchySpectrum | None, bandwidth: float) -> CauchySpectrum:
    return spectrum if spectrum is not None else cauchy_spectrum(model, data, bandwidth=bandwidth)


def huygens_profile(
    model: DensityModel,
    data: CauchyData,
    d: float,
    t_grid: npt.ArrayLike,
    spectrum: CauchySpectrum | None = None,
    fit_start: float | None = None,
) -> DecayReport:
    """``|u(d, t)|`` behind the light cone ``t = d + R0``.

    For polynomial ``eta`` the solution must vanish there: the report passes
    if ``|u| <= 1e-6 * peak`` for ``t >= d + R0 + 2 dr``.  Otherwise the decay
    rate is fitted for ``t >= d + R0 + 1.5/s`` (or ``fit_start``) and reported
    as a measured lower bound for the strip width.
    """
    t = np.asarray(t_grid, dtype=float)
    R0 = data.support_radius
    edge = d + R0
    if t.size == 0 or t.max() <= edge:
        raise DomainError("t_grid must extend beyond d + R0")
    spec = _spectrum(model, data, spectrum, bandwidth=R0 + float(np.max(np.abs(t))) + d)
    u, _ = spectral_point_values(model, spec, d, t)
    vals = np.abs(u)
    peak = float(vals.max())
    if has_polynomial_plancherel(model):
        start = edge + 2.0 * data.dr
        region = t >= start
        measured = float(vals[region].max()) / peak if peak > 0 and region.any() else 0.0
        return DecayReport("strong_huygens", t, vals, start, HUYGENS_TOL, measured, measured <= HUYGENS_TOL, peak=peak)
    start = edge + FIT_DELAY / model.scale if fit_start is None else fit_start
    region = t >= start
    rate, res, n = fit_decay(t[region], vals[region], FIT_FLOOR * peak)
    ok = res < FIT_RESIDUAL_MAX and rate > 0
    return DecayReport(
        "huygens_decay", t, vals, start, FIT_RESIDUAL_MAX, res, bool(ok),
        rate=rate if res < FIT_RESIDUAL_MAX else None, residual=res, peak=peak, notes={"points": n},
    )


def equipartition_profile(
    model: DensityModel,
    data: CauchyData,
    t_grid: npt.ArrayLike,
    spectrum: CauchySpectrum | None = None,
    huygens_rate: float | None = None,
    fit_start: float | None = None,
) -> DecayReport:
    """``|K - P| / E`` along ``t_grid`` from the spectral energy formulas.

    Polynomial ``eta``: passes if the ratio is at most 1e-6 for
    ``t >= R0 + 2 dr``.  Otherwise the decay rate of ``|K - P|`` is fitted
    for ``t >= R0 + 1.5/s`` (or ``fit_start``); the report passes if the fit
    residual is below 0.1, the slope is negative and, when ``huygens_rate``
    is given, the rate is at least ``0.9 * 2 * huygens_rate``.
    """
    t = np.asarray(t_grid, dtype=float)
    R0 = data.support_radius
    spec = _spectrum(model, data, spectrum, bandwidth=R0 + float(np.max(np.abs(t))))
    E = spectral_total_energy(model, spec)
    KP = np.array([spectral_energies(model, spec, tk) for tk in t])
    if E == 0:
        vals = np.zeros(t.size)
    else:
        vals = np.abs(KP[:, 0] - KP[:, 1]) / E
    notes: dict[str, Any] = {"E": E}
    if has_polynomial_plancherel(model):
        start = R0 + 2.0 * data.dr
        region = t >= start
        measured = float(vals[region].max()) if region.any() else 0.0
        return DecayReport("equipartition_exact", t, vals, start, EQUIPARTITION_TOL, measured,
                           measured <= EQUIPARTITION_TOL, notes=notes)
    start = R0 + FIT_DELAY / model.scale if fit_start is None else fit_start
    start = max(start, float(t.min()))
    region = t >= start
    rate, res, n = fit_decay(t[region], vals[region], FIT_FLOOR)
    ok = res < FIT_RESIDUAL_MAX and rate > 0
    if huygens_rate is not None and ok:
        notes["huygens_rate"] = huygens_rate
        ok = rate >= 0.9 * 2.0 * huygens_rate
    notes["points"] = n
    return DecayReport(
        "equipartition_decay", t, vals, start, FIT_RESIDUAL_MAX, res, bool(ok),
        rate=rate if res < FIT_RESIDUAL_MAX else None, residual=res, notes=notes,
    )


# ----------------------------------------------------------------------
# Paley-Wiener
@dataclass
class PaleyWienerRow:
    """One ``(N, tau)`` entry of a Paley-Wiener table."""

    N: int
    tau: float
    sup: float
    sup_half: float
    argmax: float
    plateau: bool
    envelope: float | None = None
    within_envelope: bool | None = None


def transform_on_line(model: DensityModel, f: RadialFunction, lams: npt.ArrayLike, tau: float) -> np.ndarray:
    """``F f(lam + i tau)`` for real ``lams`` (complex eigenfunctions when ``tau != 0``)."""
    lams = np.asarray(lams, dtype=float)
    m, w = _radial_weights(model, f)
    if m == 0:
        return np.zeros(lams.size, dtype=complex)
    r = f.r_grid[:m]
    weights = model.sphere_const * w * model.A(r) * f.values[:m]
    z = lams + 1j * tau
    out = np.empty(lams.size, dtype=complex)
    chunk = max(1, 4_000_000 // max(m, 1))
    for i in range(0, lams.size, chunk):
        vals, _ = eigen.phi_table(model, z[i:i + chunk], r)
        out[i:i + chunk] = weights @ vals
    return out


def abel_l1_norm(model: DensityModel, f: RadialFunction) -> float:
    """``int |A f(s)| ds`` over the real line (even function, twice the half line)."""
    a = abel(model, f)
    w = uniform_weights(a.s_grid.size, a.ds, left=False, right=True)
    return 2.0 * float(np.sum(w * np.abs(a.values)))


def paley_wiener_report(
    model: DensityModel,
    f: RadialFunction,
    N_list: Sequence[int],
    tau_list: Sequence[float],
    lambda_max: float = 400.0,
    n_lambda: int = 801,
    plateau_tol: float = 1e-3,
) -> list[PaleyWienerRow]:
    """Table of ``sup_lam e^{-R tau} (1 + |lam + i tau|)^N |F f(lam + i tau)|``.

    The sup is taken over ``[0, lambda_max]`` and over its first half; the
    row reports a plateau when doubling the range raises the sup by less
    than ``plateau_tol`` (relative).  For ``N = 0`` the envelope
    ``int |A f| ds`` bounding the weighted transform is also reported.
    """
    R = f.support_radius
    lams = np.linspace(0.0, lambda_max * model.scale, n_lambda)
    half = lams <= 0.5 * lams[-1]
    rows: list[PaleyWienerRow] = []
    env = None
    for tau in tau_list:
        Fz = np.abs(transform_on_line(model, f, lams, float(tau)))
        for N in N_list:
            g = math.exp(-R * tau) * (1.0 + np.abs(lams + 1j * tau)) ** N * Fz
            top = float(g.max())
            top_half = float(g[half].max())
            plateau = top <= top_half * (1.0 + plateau_tol) if top > 0 else True
            row = PaleyWienerRow(int(N), float(tau), top, top_half, float(lams[int(np.argmax(g))]), bool(plateau))
            if N == 0:
                if env is None:
                    env = abel_l1_norm(model, f)
                row.envelope = env
                row.within_envelope = bool(top <= env * (1 + 1e-9))
            rows.append(row)
    return rows


@dataclass
class PWRadius:
    """Spectral radius estimates from moments ``M_j = C0 int lam^{2j} |F|^2 eta``.

    ``m`` holds ``M_j^{1/(2j)}`` for ``j = 1..j_max``; ``radius`` is the
    limit extrapolated from the last moments (see :func:`pw_radius`).
    """

    radius: float
    m: FloatArray
    log_moments: FloatArray

    @property
    def m_last(self) -> float:
        return float(self.m[-1]) if self.m.size else 0.0


def log_moments(model: DensityModel, F: SpectralFunction, j_max: int) -> FloatArray:
    """``log M_j`` for ``j = 1..j_max`` computed in log space (``-inf`` for ``F = 0``)."""
    weight = F.weight if F.weight is not None else eigen.plancherel_density(model, F.lambdas)
    dens = F.grid.weights * weight * np.abs(F.values) ** 2
    pos = (dens > 0) & (F.lambdas > 0)
    out = np.full(j_max, -np.inf)
    if not pos.any():
        return out
    ld = np.log(dens[pos])
    ll = np.log(F.lambdas[pos])
    c0 = math.log(plancherel_constant(model))
    for j in range(1, j_max + 1):
        out[j - 1] = c0 + float(logsumexp(2 * j * ll + ld))
    return out


def pw_radius(model: DensityModel, F: SpectralFunction, j_max: int = 40, n_fit: int = 16) -> PWRadius:
    """Estimate the radius of the spectral support of ``F``.

    The raw sequence ``m_j = M_j^{1/(2j)}`` increases towards the radius but
    only slowly: for a spectrum ending at ``R`` with a power-law edge one has
    ``log M_j = 2 j log R + c - g log j + O(1/j)``, so ``m_j`` sits a factor
    ``exp((c - g log j)/(2j))`` below ``R``.  The returned ``radius`` fits
    this model to the last ``n_fit`` moments and reads ``R`` off the slope;
    ``m`` keeps the raw sequence.
    """
    if j_max < 1:
        raise DomainError("j_max must be positive")
    lm = log_moments(model, F, j_max)
    js = np.arange(1, j_max + 1, dtype=float)
    if not np.isfinite(lm).all():
        return PWRadius(0.0, np.zeros(j_max), lm)
    m = np.exp(lm / (2.0 * js))
    sel = js > max(0, j_max - n_fit)
    if sel.sum() >= 4:
        X = np.stack([2.0 * js[sel], np.ones(sel.sum()), -np.log(js[sel]), 1.0 / js[sel]], axis=1)
        coef = np.linalg.lstsq(X, lm[sel], rcond=None)[0]
        radius = float(math.exp(coef[0]))
    else:
        radius = float(m[-1])
    return PWRadius(radius, m, lm)


def multiplier_radius(model: DensityModel, F: SpectralFunction, j: int) -> float:
    """``||(Delta + rho^2)^j f||^{1/(2j)}`` through the multiplier ``(-lam^2)^j`` and Plancherel.

    The squared norm is the moment ``M_{2j}``, so the result equals
    ``pw_radius(...).m[2j - 1]``.
    """
    weight = F.weight if F.weight is not None else eigen.plancherel_density(model, F.lambdas)
    G = F.values * (-(F.lambdas**2)) ** j
    norm2 = plancherel_constant(model) * float(np.sum(F.grid.weights * weight * np.abs(G) ** 2))
    return norm2 ** (1.0 / (4.0 * j)) if norm2 > 0 else 0.0


def band_limited_spectrum(model: DensityModel, lambda_edge: float, edge_width: float = 0.02, panel: float = 0.02) -> SpectralFunction:
    """Spectrum equal to 1 on ``[0, lambda_edge - edge_width]`` with a smooth drop to 0 at ``lambda_edge``."""
    grid = make_lambda_grid(lambda_edge, near_width=panel, max_width=panel)
    lam = grid.nodes
    vals = 1.0 - smooth_step((lam - (lambda_edge - edge_width)) / edge_width)
    return SpectralFunction(grid, vals.astype(complex), eigen.plancherel_density(model, lam))


# ----------------------------------------------------------------------
# supports and leakage
def support_radius(f: RadialFunction, tol: float = 1e-10) -> float:
    """Largest grid radius where ``|f| > tol * max |f|`` (0 for the zero function)."""
    v = np.abs(f.values)
    top = float(v.max()) if v.size else 0.0
    if top == 0.0:
        return 0.0
    idx = np.nonzero(v > tol * top)[0]
    return float(f.r_grid[idx[-1]])


def _energy_density(model: DensityModel, state: WaveState) -> FloatArray:
    ur = state.ur if state.ur is not None else _derivative(model, state.u)
    r = state.r_grid
    A = model.A(r)
    return 0.5 * (np.abs(state.ut.values) ** 2 + np.abs(ur) ** 2) * A


def light_cone_leakage(
    model: DensityModel, trajectory: Sequence[WaveState], R0: float, dr: float | None = None
) -> float:
    """Largest fraction of the (positive) energy density outside ``R0 + |t| + 3 dr``.

    The density is ``(|u_t|^2 + |u_r|^2) A / 2``; ``dr`` defaults to the step
    of each snapshot grid.
    """
    worst = 0.0
    for st in trajectory:
        r = st.r_grid
        h = st.u.dr if dr is None else dr
        dens = _energy_density(model, st)
        w = uniform_weights(r.size, st.u.dr, left=False, right=True) if r.size > 1 else np.ones(r.size)
        total = float(np.sum(w * dens))
        if total == 0.0:
            continue
        outside = r > R0 + abs(st.t) + 3.0 * h
        worst = max(worst, float(np.sum((w * dens)[outside])) / total)
    return worst
