"""Solvers for the shifted wave equation ``u_tt = L_A u + rho^2 u`` with radial data.

Four independent routes are provided:

* :func:`propagate_spectral` multiplies the transforms of the Cauchy data by
  ``cos(lam t)`` and ``sin(lam t)/lam`` and inverts;
* :func:`propagate_series` expands the data in Dirichlet eigenfunctions of a
  ball large enough that the wave never reaches its boundary;
* :func:`propagate_dalembert` evaluates the solution at one point from
  spherical means and the inverse dual Abel transform;
* :func:`propagate_fdtd` is a second-order finite-volume leapfrog scheme
  that serves as an oracle independent of any eigenfunction machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np
import numpy.typing as npt
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvalsh_tridiagonal

from . import eigen
from .csvio import write_columns
from .density import DensityModel
from .eigen import DirichletBasis
from .errors import BoundaryTouchError, CFLError, DomainError, ResolutionError, TailError
from .meanvalue import _fd_stencils, radial_laplacian, spherical_mean
from .quadrature import LambdaGrid, gauss_legendre_panels, make_lambda_grid, uniform_weights
from .transforms import (
    RESOLUTION_LIMIT,
    TRUNCATION_TOL,
    RadialFunction,
    SpectralFunction,
    _complex_columns,
    _even_integrand,
    _radial_weights,
    auto_lambda_grid,
    bump_profile,
    check_truncation,
    cosine_synthesis,
    forward_radial_fourier,
    l2_norm2,
    plancherel_constant,
    radial_grid,
)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

SMALL_LAMBDA = 1e-6
DEFAULT_OUTPUT_STEP = 0.01
SUPPORT_TOL = 1e-13


# ----------------------------------------------------------------------
# data types
Profile = Callable[[FloatArray], tuple[ComplexArray, ComplexArray]]


@dataclass(frozen=True)
class CauchyData:
    """Initial displacement ``f`` and velocity ``g`` on a common grid.

    ``profile``, when present, evaluates ``(f, g)`` exactly on any grid; it
    lets grid-based solvers resample the data without interpolation error.
    """

    f: RadialFunction
    g: RadialFunction
    support_radius: float
    profile: Profile | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.f.r_grid.shape != self.g.r_grid.shape or np.any(self.f.r_grid != self.g.r_grid):
            raise DomainError("f and g must share one grid")
        outside = self.f.r_grid > self.support_radius * (1 + 1e-12) + 1e-15
        scale = max(float(np.max(np.abs(self.f.values))), float(np.max(np.abs(self.g.values))), 1e-300)
        if np.any(np.abs(self.f.values[outside]) > SUPPORT_TOL * scale) or np.any(
            np.abs(self.g.values[outside]) > SUPPORT_TOL * scale
        ):
            raise DomainError("Cauchy data extends beyond its declared support radius")

    @property
    def r_grid(self) -> FloatArray:
        return self.f.r_grid

    @property
    def dr(self) -> float:
        return self.f.dr

    def resample(self, r_grid: npt.ArrayLike) -> "CauchyData":
        """The same data on another grid (exact with a profile, cubic spline otherwise)."""
        r = np.asarray(r_grid, dtype=float)
        if self.profile is not None:
            fv, gv = self.profile(r)
        else:
            fv = _spline(self.f, r)
            gv = _spline(self.g, r)
        fv = np.where(r <= self.support_radius, fv, 0.0)
        gv = np.where(r <= self.support_radius, gv, 0.0)
        R0 = self.support_radius
        return CauchyData(RadialFunction(r, fv, R0), RadialFunction(r, gv, R0), R0, self.profile)

    def combine(self, a: complex, other: "CauchyData", b: complex = 1.0) -> "CauchyData":
        """``a * self + b * other`` on the common grid."""
        R0 = max(self.support_radius, other.support_radius)
        f = RadialFunction(self.r_grid, a * self.f.values + b * other.f.values, R0)
        g = RadialFunction(self.r_grid, a * self.g.values + b * other.g.values, R0)
        return CauchyData(f, g, R0)

    def reversed(self) -> "CauchyData":
        """Data ``(f, -g)``: the solution run backwards in time."""
        prof = None
        if self.profile is not None:
            base = self.profile

            def prof(r: FloatArray) -> tuple[ComplexArray, ComplexArray]:
                fv, gv = base(r)
                return fv, -gv

        return CauchyData(self.f, self.g.with_values(-self.g.values), self.support_radius, prof)


def _spline(u: RadialFunction, r: FloatArray) -> ComplexArray:
    # even extension keeps the spline symmetric at the origin
    rr = np.concatenate([-u.r_grid[:0:-1], u.r_grid])
    vv = np.concatenate([u.values[:0:-1], u.values])
    out = np.zeros(r.size, dtype=complex)
    inside = r <= u.r_max
    out[inside] = CubicSpline(rr, vv.real)(r[inside]) + 1j * CubicSpline(rr, vv.imag)(r[inside])
    return out


def bump_data(
    r_grid: npt.ArrayLike,
    radius: float,
    f_amplitude: complex = 1.0,
    g_amplitude: complex = 0.0,
    g_radius: float | None = None,
) -> CauchyData:
    """Bump-shaped Cauchy data; ``g`` uses ``g_radius`` (default ``radius``)."""
    if not radius > 0:
        raise DomainError("bump radius must be positive")
    gr = radius if g_radius is None else g_radius
    R0 = max(radius, gr) if g_amplitude != 0 else radius

    def profile(r: FloatArray) -> tuple[ComplexArray, ComplexArray]:
        r = np.asarray(r, dtype=float)
        return (
            f_amplitude * bump_profile(r, radius).astype(complex),
            g_amplitude * bump_profile(r, gr).astype(complex),
        )

    r = np.asarray(r_grid, dtype=float)
    fv, gv = profile(r)
    return CauchyData(RadialFunction(r, fv, R0), RadialFunction(r, gv, R0), R0, profile)


@dataclass(frozen=True)
class WaveState:
    """Solution snapshot at time ``t``.

    ``ur`` holds the r-derivative of ``u`` when the solver produced it
    exactly (spectral and series solvers); energy evaluation falls back to
    finite differences otherwise.
    """

    t: float
    u: RadialFunction
    ut: RadialFunction
    ur: ComplexArray | None = None

    def __post_init__(self) -> None:
        if self.u.r_grid.shape != self.ut.r_grid.shape or np.any(self.u.r_grid != self.ut.r_grid):
            raise DomainError("u and ut must share one grid")

    @property
    def r_grid(self) -> FloatArray:
        return self.u.r_grid

    def to_csv(self, path: str | Path) -> Path:
        u, ut = self.u.values, self.ut.values
        return write_columns(
            path, ["r", "re_u", "im_u", "re_ut", "im_ut"], [self.r_grid, u.real, u.imag, ut.real, ut.imag]
        )


# ----------------------------------------------------------------------
# spectral solver
@dataclass(frozen=True)
class CauchySpectrum:
    """Transforms of the Cauchy data on one spectral grid."""

    F: SpectralFunction
    G: SpectralFunction
    support_radius: float

    @property
    def grid(self) -> LambdaGrid:
        return self.F.grid

    @property
    def lambdas(self) -> FloatArray:
        return self.F.lambdas

    @property
    def weight(self) -> FloatArray:
        return self.F.weight

    def at(self, t: float) -> tuple[ComplexArray, ComplexArray]:
        """``(u_hat, ut_hat)`` at time ``t``."""
        lam = self.lambdas
        c = np.cos(lam * t)
        s = np.sin(lam * t)
        u_hat = self.F.values * c + self.G.values * sinc_multiplier(lam, t)
        ut_hat = -lam * self.F.values * s + self.G.values * c
        return u_hat, ut_hat


def sinc_multiplier(lam: FloatArray, t: float) -> FloatArray:
    """``sin(lam t)/lam``, read as ``t`` (by its series) for ``|lam| < 1e-6``."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty_like(lam)
    small = np.abs(lam) < SMALL_LAMBDA
    out[~small] = np.sin(lam[~small] * t) / lam[~small]
    x = lam[small] * t
    out[small] = t * (1.0 - x * x / 6.0)
    return out


def cauchy_spectrum(
    model: DensityModel,
    data: CauchyData,
    lambda_grid: LambdaGrid | None = None,
    bandwidth: float | None = None,
    truncation_tol: float = TRUNCATION_TOL,
) -> CauchySpectrum:
    """Transforms of ``f`` and ``g`` on a shared grid (chosen automatically if absent).

    ``bandwidth`` is the largest ``T`` with integrands oscillating like
    ``exp(i T lam)``; for synthesis at radius ``r`` and time ``t`` it is
    ``R0 + |t| + r``.
    """
    R0 = data.support_radius
    if lambda_grid is None:
        bw = 2.0 * R0 + 1.0 if bandwidth is None else bandwidth
        gf = auto_lambda_grid(model, data.f, bandwidth=bw)
        gg = auto_lambda_grid(model, data.g, bandwidth=bw)
        lambda_grid = make_lambda_grid(max(gf.lambda_max, gg.lambda_max), bw)
    F = forward_radial_fourier(model, data.f, lambda_grid)
    G = forward_radial_fourier(model, data.g, lambda_grid)
    check_truncation(F, truncation_tol)
    check_truncation(G, truncation_tol)
    return CauchySpectrum(F, G, R0)


def default_output_grid(model: DensityModel, data: CauchyData, t_max: float) -> FloatArray:
    """Grid on ``[0, R0 + t_max + 1]`` with step ``0.01/scale``."""
    return radial_grid(data.support_radius + abs(t_max) + 1.0 / model.scale, DEFAULT_OUTPUT_STEP / model.scale)


def spectral_trajectory(
    model: DensityModel,
    data: CauchyData,
    times: Sequence[float],
    r_grid: npt.ArrayLike | None = None,
    spectrum: CauchySpectrum | None = None,
) -> list[WaveState]:
    """Spectral solution at several times with one synthesis sweep."""
    times = [float(t) for t in times]
    t_max = max((abs(t) for t in times), default=0.0)
    r = default_output_grid(model, data, t_max) if r_grid is None else np.asarray(r_grid, dtype=float)
    if spectrum is None:
        spectrum = cauchy_spectrum(model, data, bandwidth=data.support_radius + t_max + float(r[-1]))
    c0 = plancherel_constant(model)
    base = c0 * spectrum.grid.weights * spectrum.weight
    cols = []
    for t in times:
        u_hat, ut_hat = spectrum.at(t)
        cols += [base * u_hat.real, base * u_hat.imag, base * ut_hat.real, base * ut_hat.imag]
    coef = np.ascontiguousarray(np.stack(cols, axis=1))
    S, SD = eigen.synth_phi(model, spectrum.lambdas, coef, r, want_deriv=True)
    states = []
    for k, t in enumerate(times):
        u = S[:, 4 * k] + 1j * S[:, 4 * k + 1]
        ut = S[:, 4 * k + 2] + 1j * S[:, 4 * k + 3]
        ur = SD[:, 4 * k] + 1j * SD[:, 4 * k + 1]
        support = data.support_radius + abs(t)
        states.append(WaveState(t, RadialFunction(r, u, support), RadialFunction(r, ut, support), ur))
    return states


def propagate_spectral(
    model: DensityModel,
    data: CauchyData,
    t: float,
    r_grid: npt.ArrayLike | None = None,
    spectrum: CauchySpectrum | None = None,
) -> WaveState:
    """Solution at time ``t`` from the spectral multipliers.

    At ``t = 0`` with no ``r_grid`` the propagator is the identity and the
    data is returned unchanged.
    """
    if t == 0 and r_grid is None:
        return WaveState(0.0, data.f, data.g)
    return spectral_trajectory(model, data, [t], r_grid, spectrum)[0]


def spectral_point_values(
    model: DensityModel, spectrum: CauchySpectrum, d: float, times: npt.ArrayLike
) -> tuple[ComplexArray, ComplexArray]:
    """``u(d, t)`` and ``u_t(d, t)`` for many ``t`` at one radius."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    vals, _ = eigen.phi_table(model, spectrum.lambdas, np.array([d]))
    lam = spectrum.lambdas
    coef = plancherel_constant(model) * spectrum.grid.weights * spectrum.weight * vals[0]
    F = coef * spectrum.F.values
    G = coef * spectrum.G.values
    u = np.empty(t.size, dtype=complex)
    ut = np.empty(t.size, dtype=complex)
    for k, tk in enumerate(t):
        c = np.cos(lam * tk)
        u[k] = np.sum(F * c + G * sinc_multiplier(lam, tk))
        ut[k] = np.sum(-lam * F * np.sin(lam * tk) + G * c)
    return u, ut


# ----------------------------------------------------------------------
# Dirichlet series solver
def dirichlet_coefficients(model: DensityModel, f: RadialFunction, basis: DirichletBasis) -> ComplexArray:
    """``<f, phi_k>_{A dr} / ||phi_k||^2`` for every mode of ``basis``."""
    lam_top = float(np.max(basis.eigen_lambdas))
    if lam_top * f.dr > RESOLUTION_LIMIT * (1 + 1e-9):
        raise ResolutionError(f"lambda_K * dr = {lam_top * f.dr:.3g} exceeds {RESOLUTION_LIMIT}")
    m, w = _radial_weights(model, f)
    if m == 0:
        return np.zeros(basis.eigen_lambdas.size, dtype=complex)
    r = f.r_grid[:m]
    cols, has_imag = _complex_columns(f.values[:m])
    P = eigen.project_phi(model, basis.eigen_lambdas, r, cols * (w * model.A(r))[:, None])
    proj = P[:, 0] + 1j * P[:, 1] if has_imag else P[:, 0].astype(complex)
    return proj / basis.norms


def check_series_tail(coeffs: Sequence[ComplexArray], data_scale: float = 1.0, tail_tol: float = 1e-10) -> float:
    """Largest coefficient among the last 5% of modes, in units of ``data_scale``.

    ``data_scale`` is the sup norm of the data, so the test reads
    ``|a_k| < tail_tol`` for data of unit size.
    """
    mags = np.max(np.abs(np.stack(coeffs)), axis=0)
    if mags.size == 0 or data_scale == 0.0:
        return 0.0
    n_tail = max(1, mags.size // 20)
    ratio = float(mags[-n_tail:].max()) / data_scale
    if ratio > tail_tol:
        raise TailError(f"series coefficients decayed only to {ratio:.2e} (tol {tail_tol:g})")
    return ratio


def series_mode_count(model: DensityModel, R_dom: float, lambda_max: float) -> int:
    """Number of Dirichlet modes with ``lam_k`` safely below ``lambda_max``."""
    return max(1, int(math.floor(R_dom * lambda_max / math.pi)) - 2)


@dataclass(frozen=True)
class SeriesSolution:
    """Dirichlet coefficients of the data; evaluates the solution at any time."""

    basis: DirichletBasis
    a: ComplexArray
    b: ComplexArray
    support_radius: float

    def states(self, model: DensityModel, times: Sequence[float], r_grid: npt.ArrayLike) -> list[WaveState]:
        r = np.asarray(r_grid, dtype=float)
        lam = self.basis.eigen_lambdas
        cols = []
        for t in times:
            c = np.cos(lam * t)
            u_k = self.a * c + self.b * sinc_multiplier(lam, t)
            ut_k = -lam * self.a * np.sin(lam * t) + self.b * c
            cols += [u_k.real, u_k.imag, ut_k.real, ut_k.imag]
        coef = np.ascontiguousarray(np.stack(cols, axis=1))
        S, SD = eigen.synth_phi(model, lam, coef, r, want_deriv=True)
        out = []
        for k, t in enumerate(times):
            support = self.support_radius + abs(t)
            u = RadialFunction(r, S[:, 4 * k] + 1j * S[:, 4 * k + 1], support)
            ut = RadialFunction(r, S[:, 4 * k + 2] + 1j * S[:, 4 * k + 3], support)
            out.append(WaveState(float(t), u, ut, SD[:, 4 * k] + 1j * SD[:, 4 * k + 1]))
        return out


def series_solution(
    model: DensityModel,
    data: CauchyData,
    R_dom: float,
    K: int,
    basis: DirichletBasis | None = None,
    tail_tol: float = 1e-10,
) -> SeriesSolution:
    """Expand the Cauchy data in the first ``K`` Dirichlet modes of the ball ``R_dom``."""
    if data.support_radius >= R_dom:
        raise DomainError("data support must lie inside the Dirichlet ball")
    if basis is None:
        basis = eigen.dirichlet_spectrum(model, R_dom, K)
    elif basis.eigen_lambdas.size != K or basis.domain_radius != R_dom:
        raise DomainError("basis does not match R_dom and K")
    a = dirichlet_coefficients(model, data.f, basis)
    b = dirichlet_coefficients(model, data.g, basis)
    scale = max(float(np.max(np.abs(data.f.values))), float(np.max(np.abs(data.g.values))))
    check_series_tail([a, b], scale, tail_tol)
    return SeriesSolution(basis, a, b, data.support_radius)


def propagate_series(
    model: DensityModel,
    data: CauchyData,
    R_dom: float,
    K: int,
    t: float,
    r_grid: npt.ArrayLike | None = None,
    basis: DirichletBasis | None = None,
    tail_tol: float = 1e-10,
) -> WaveState:
    """Dirichlet-series solution, valid while ``R0 + |t| < R_dom``."""
    if data.support_radius + abs(t) >= R_dom:
        raise DomainError("R0 + |t| must stay below R_dom (the wave would feel the wall)")
    sol = series_solution(model, data, R_dom, K, basis, tail_tol)
    if r_grid is None:
        r_grid = radial_grid(min(R_dom, data.support_radius + abs(t) + 1.0 / model.scale), DEFAULT_OUTPUT_STEP / model.scale)
    return sol.states(model, [t], r_grid)[0]


# ----------------------------------------------------------------------
# spherical-mean (d'Alembert-type) solver
def propagate_dalembert_times(
    model: DensityModel,
    data: CauchyData,
    d: float,
    times: npt.ArrayLike,
    lambda_grid: LambdaGrid | None = None,
    time_panel: float = 0.05,
    gl_order: int = 16,
) -> ComplexArray:
    """``u(d, t)`` for several ``t`` at one distance ``d``.

    ``u = a^-1(M f)(|t|) + sign(t) int_0^|t| a^-1(M g)(s) ds`` where
    ``M f`` is the spherical-mean profile about a point at distance ``d``,
    computed numerically on a radial grid and transformed again.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t_abs = np.abs(times)
    t_max = float(t_abs.max())
    R0 = data.support_radius
    reach = d + R0
    if lambda_grid is None:
        bw = reach + max(t_max, reach)
        gf = auto_lambda_grid(model, data.f, bandwidth=bw)
        gg = auto_lambda_grid(model, data.g, bandwidth=bw)
        lambda_grid = make_lambda_grid(max(gf.lambda_max, gg.lambda_max), bw)
    dr = RESOLUTION_LIMIT / lambda_grid.lambda_max
    r_mean = radial_grid(reach + 4.0 * dr, dr)

    def mean_spectrum_of(u: RadialFunction) -> SpectralFunction:
        mean = spherical_mean(model, u, d, r_mean, lambda_grid)
        mean = RadialFunction(mean.r_grid, np.where(mean.r_grid <= reach, mean.values, 0.0), reach)
        return forward_radial_fourier(model, mean, lambda_grid)

    out = np.zeros(times.size, dtype=complex)
    if np.any(data.f.values):
        out += cosine_synthesis(model, mean_spectrum_of(data.f), t_abs).values
    if np.any(data.g.values):
        Mg = mean_spectrum_of(data.g)
        for k, (t, ta) in enumerate(zip(times, t_abs)):
            if ta == 0:
                continue
            n_pan = max(1, int(math.ceil(ta / time_panel)))
            s_nodes, s_w = gauss_legendre_panels(np.linspace(0.0, ta, n_pan + 1), gl_order)
            vals = cosine_synthesis(model, Mg, s_nodes).values
            out[k] += math.copysign(1.0, t) * np.sum(s_w * vals)
    return out


def propagate_dalembert(
    model: DensityModel,
    data: CauchyData,
    d: float,
    t: float,
    lambda_grid: LambdaGrid | None = None,
) -> complex:
    """Solution value at distance ``d`` from the centre of the data and time ``t``."""
    if d < 0:
        raise DomainError("distance d must be non-negative")
    return complex(propagate_dalembert_times(model, data, d, [t], lambda_grid)[0])


# ----------------------------------------------------------------------
# finite-difference oracle
@dataclass(frozen=True)
class FDTDOperator:
    """Finite-volume discretisation of ``L_A + rho^2`` with a wall at ``r_max``.

    Row ``j`` reads ``lo[j] u[j-1] + di[j] u[j] + up[j] u[j+1]``.  Interior
    rows are ``(A(r+h/2)(u[j+1]-u[j]) - A(r-h/2)(u[j]-u[j-1])) / (A(r) h^2)``;
    the row at ``r = 0`` is ``(a + 1) * 2 (u[1] - u[0]) / h^2`` with ``a`` the
    small-r exponent of A (limit of the pole term with mirror symmetry).
    """

    r: FloatArray
    lo: FloatArray
    di: FloatArray
    up: FloatArray

    def apply(self, u: npt.NDArray) -> npt.NDArray:
        out = self.di * u
        out[1:] += self.lo[1:] * u[:-1]
        out[:-1] += self.up[:-1] * u[1:]
        out[-1] = 0.0
        return out

    def stable_step(self) -> float:
        """Largest leapfrog step for which the scheme is stable.

        The matrix is similar to a symmetric tridiagonal one; its most
        negative eigenvalue ``-w2`` gives the bound ``2 / sqrt(w2)``.
        """
        inner = slice(0, self.r.size - 1)
        di = self.di[inner]
        off = np.sqrt(self.up[inner][:-1] * self.lo[inner][1:])
        w = eigvalsh_tridiagonal(di, off, select="i", select_range=(0, 0))
        return 2.0 / math.sqrt(max(-float(w[0]), 1e-300))


def fdtd_operator(model: DensityModel, dr: float, r_max: float) -> FDTDOperator:
    r = radial_grid(r_max, dr)
    n = r.size
    lo = np.zeros(n)
    up = np.zeros(n)
    di = np.full(n, model.rho**2)
    rp = r[1:-1]
    la = model.log_A(rp)
    cp = np.exp(model.log_A(rp + 0.5 * dr) - la) / dr**2
    cm = np.exp(model.log_A(rp - 0.5 * dr) - la) / dr**2
    up[1:-1] = cp
    lo[1:-1] = cm
    di[1:-1] -= cp + cm
    k0 = 2.0 * (model.exponent + 1.0) / dr**2
    up[0] = k0
    di[0] -= k0
    di[-1] = 0.0
    return FDTDOperator(r, lo, di, up)


CFL_LIMIT = 0.9


def check_cfl(dr: float, dt: float) -> None:
    """Raise CFLError unless ``0 < dt <= 0.9 dr``."""
    if not (dr > 0 and dt > 0):
        raise CFLError("dr and dt must be positive")
    if dt > CFL_LIMIT * dr:
        raise CFLError(f"dt = {dt:g} exceeds {CFL_LIMIT} * dr = {CFL_LIMIT * dr:g}")


def fdtd_trajectory(
    model: DensityModel,
    data: CauchyData,
    times: Sequence[float],
    dr: float,
    dt: float,
    r_max: float | None = None,
    check_every: int = 50,
) -> list[WaveState]:
    """Leapfrog (velocity Verlet) solution at non-negative, increasing ``times``.

    Each interval between requested times is split into equal steps no
    longer than ``dt``.
    """
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(b < a for a, b in zip(times, times[1:])):
        raise DomainError("times must be non-negative and non-decreasing")
    check_cfl(dr, dt)
    t_end = times[-1] if times else 0.0
    R0 = data.support_radius
    need = R0 + t_end + 1.0 / model.scale
    if r_max is None:
        r_max = need
    if r_max < need * (1 - 1e-12):
        raise DomainError(f"r_max = {r_max:g} must be at least R0 + t + 1 = {need:g}")
    op = fdtd_operator(model, dr, r_max)
    dt_stable = op.stable_step()
    if dt > 0.99 * dt_stable:
        raise CFLError(f"dt = {dt:g} exceeds the stability limit {dt_stable:.4g} of the origin stencil")
    d0 = data.resample(op.r)
    u = d0.f.values.copy()
    v = d0.g.values.copy()
    n = op.r.size
    scale = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))), 1e-300)
    acc = op.apply(u)
    t_now = 0.0
    out: list[WaveState] = []
    for t_target in times:
        span = t_target - t_now
        n_steps = int(math.ceil(span / dt - 1e-12)) if span > 0 else 0
        h = span / n_steps if n_steps else 0.0
        for step in range(n_steps):
            v += 0.5 * h * acc
            u += h * v
            acc = op.apply(u)
            v += 0.5 * h * acc
            if step % check_every == 0 and np.max(np.abs(u[n - 3:])) > 1e-10 * scale:
                raise BoundaryTouchError("solution reached the wall at r_max")
        t_now = t_target
        if np.max(np.abs(u[n - 3:])) > 1e-10 * scale:
            raise BoundaryTouchError("solution reached the wall at r_max")
        support = R0 + t_now
        out.append(WaveState(t_now, RadialFunction(op.r, u.copy(), support), RadialFunction(op.r, v.copy(), support)))
    return out


def propagate_fdtd(
    model: DensityModel, data: CauchyData, t: float, dr: float, dt: float, r_max: float | None = None
) -> WaveState:
    """Finite-difference solution at ``t >= 0`` on the grid ``0, dr, ..., r_max``."""
    return fdtd_trajectory(model, data, [t], dr, dt, r_max)[0]


# ----------------------------------------------------------------------
# energies
@dataclass(frozen=True)
class EnergyReport:
    """Kinetic, potential and total energy at one time.

    ``P`` is the spectral potential energy when a :class:`CauchySpectrum` was
    supplied, otherwise the physical-space value ``P_physical``.
    """

    t: float
    K: float
    P: float
    E: float
    P_physical: float

    def __iter__(self) -> Iterator[float]:
        return iter((self.K, self.P, self.E))


def _grid_integral(model: DensityModel, r: FloatArray, density: FloatArray, even: bool) -> float:
    if r.size < 2:
        return 0.0
    w = uniform_weights(r.size, float(r[1] - r[0]), left=not even, right=True)
    return model.sphere_const * float(np.sum(w * density * model.A(r)))


def _derivative(model: DensityModel, u: RadialFunction) -> ComplexArray:
    p = 4
    d1, _ = _fd_stencils(p)
    n = u.r_grid.size
    ext = np.concatenate([u.values[p:0:-1], u.values, np.zeros(p, dtype=complex)])
    out = np.zeros(n, dtype=complex)
    for k in range(2 * p + 1):
        out += d1[k] * ext[k:k + n]
    return out / u.dr


def spectral_energies(model: DensityModel, spectrum: CauchySpectrum, t: float) -> tuple[float, float]:
    """``(K, P)`` at time ``t`` from the spectral formulas."""
    lam = spectrum.lambdas
    base = 0.5 * plancherel_constant(model) * spectrum.grid.weights * spectrum.weight
    c = np.cos(lam * t)
    s = np.sin(lam * t)
    F, G = spectrum.F.values, spectrum.G.values
    K = float(np.sum(base * np.abs(-lam * F * s + G * c) ** 2))
    P = float(np.sum(base * np.abs(lam * F * c + G * s) ** 2))
    return K, P


def spectral_total_energy(model: DensityModel, spectrum: CauchySpectrum) -> float:
    """``E = (||lam F||^2 + ||G||^2) / 2`` in the Plancherel norm."""
    base = 0.5 * plancherel_constant(model) * spectrum.grid.weights * spectrum.weight
    lam = spectrum.lambdas
    return float(np.sum(base * (lam**2 * np.abs(spectrum.F.values) ** 2 + np.abs(spectrum.G.values) ** 2)))


def energy(model: DensityModel, state: WaveState, spectral: CauchySpectrum | None = None) -> EnergyReport:
    """Energies of a snapshot.

    ``K = omega/2 int |u_t|^2 A dr`` in physical space; the potential energy
    uses the spectral formula when ``spectral`` is given.  The physical
    surrogate ``omega/2 int (|u_r|^2 - rho^2 |u|^2) A dr`` is always
    reported as ``P_physical``.
    """
    r = state.r_grid
    even = _even_integrand(model)
    K = 0.5 * _grid_integral(model, r, np.abs(state.ut.values) ** 2, even)
    ur = state.ur if state.ur is not None else _derivative(model, state.u)
    dens = np.abs(ur) ** 2 - model.rho**2 * np.abs(state.u.values) ** 2
    P_phys = 0.5 * _grid_integral(model, r, dens, even)
    if spectral is not None:
        _, P = spectral_energies(model, spectral, state.t)
    else:
        P = P_phys
    return EnergyReport(state.t, K, P, K + P, P_phys)


def physical_identity_energy(model: DensityModel, data: CauchyData) -> float:
    """``(||g||^2 + ||grad f||^2 - rho^2 ||f||^2) / 2`` from the data in physical space."""
    f, g = data.f, data.g
    fr = _derivative(model, f)
    even = _even_integrand(model)
    grad2 = _grid_integral(model, f.r_grid, np.abs(fr) ** 2, even)
    return 0.5 * (l2_norm2(model, g) + grad2 - model.rho**2 * l2_norm2(model, f))


def laplacian_data(model: DensityModel, data: CauchyData) -> CauchyData:
    """Cauchy data ``(L_A f, L_A g)`` by finite differences (compact support preserved)."""
    return CauchyData(radial_laplacian(model, data.f), radial_laplacian(model, data.g), data.support_radius)
