"""Spherical means of radial functions.

For ``f`` radial about a base point ``sigma`` and a point ``x`` at distance
``d`` from ``sigma``, the mean of ``f`` over the geodesic sphere of radius
``r`` about ``x`` only depends on ``(d, r)``.  Since spherical means act on
eigenfunctions by ``M_x phi_{lam,sigma}(r) = phi_lam(d) phi_lam(r)``, the
mean of a general radial ``f`` is the inverse transform of
``F f(lam) phi_lam(d)``.  A Dirichlet-series version of the same formula is
provided as an independent cross-check.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from . import eigen
from .density import DensityModel
from .eigen import DirichletBasis
from .errors import DomainError
from .quadrature import LambdaGrid, make_lambda_grid
from .transforms import (
    RESOLUTION_LIMIT,
    RadialFunction,
    SpectralFunction,
    _complex_columns,
    _from_columns,
    auto_lambda_grid,
    bump_profile,
    check_truncation,
    forward_radial_fourier,
    plancherel_constant,
    plateau_window,
    radial_grid,
)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]


def _phi_at(model: DensityModel, lams: FloatArray, d: float) -> FloatArray:
    vals, _ = eigen.phi_table(model, lams, np.array([d]))
    return vals[0]


def mean_spectrum(model: DensityModel, F: SpectralFunction, d: float) -> SpectralFunction:
    """Spectrum of ``r -> M_x f(r)``: ``F f(lam) phi_lam(d)``."""
    if d < 0:
        raise DomainError("distance d must be non-negative")
    scaled = F.values * _phi_at(model, F.lambdas, d)
    support = None if F.support_hint is None else d + F.support_hint
    return SpectralFunction(F.grid, scaled, F.weight, support)


def spherical_mean(
    model: DensityModel,
    f: RadialFunction,
    d: float,
    r_grid: npt.ArrayLike,
    lambda_grid: LambdaGrid | None = None,
    truncation_tol: float = 1e-10,
    want_deriv: bool = False,
) -> RadialFunction | tuple[RadialFunction, ComplexArray]:
    """Mean of ``f`` over spheres of radius ``r`` about a point at distance ``d``.

    ``M_x f(r) = C0 int F f(lam) phi_lam(d) phi_lam(r) eta(lam) dlam``.  With
    ``want_deriv`` the r-derivative of the mean is returned as well.
    """
    r = np.asarray(r_grid, dtype=float)
    if d < 0:
        raise DomainError("distance d must be non-negative")
    if r.size == 0 or np.any(np.diff(r) <= 0) or r[0] < 0:
        raise DomainError("r_grid must be non-negative and strictly increasing")
    if lambda_grid is None:
        lambda_grid = auto_lambda_grid(model, f, bandwidth=d + f.support_radius + float(r[-1]))
    F = forward_radial_fourier(model, f, lambda_grid)
    check_truncation(F, truncation_tol)
    M = mean_spectrum(model, F, d)
    coef = plancherel_constant(model) * M.grid.weights * M.weight * M.values
    cols, has_imag = _complex_columns(coef)
    S, SD = eigen.synth_phi(model, M.lambdas, cols, r, want_deriv)
    out = RadialFunction(r, _from_columns(S, has_imag), d + f.support_radius)
    if want_deriv:
        return out, _from_columns(SD, has_imag)
    return out


def spherical_mean_series(
    model: DensityModel, f: RadialFunction, d: float, r_grid: npt.ArrayLike, basis: DirichletBasis
) -> RadialFunction:
    """Dirichlet-series mean ``sum_k a_k phi_k(d) phi_k(r)`` on the ball of ``basis``.

    Valid while ``d + r`` and the support of ``f`` stay inside the ball.
    """
    from .wave import dirichlet_coefficients  # wave imports this module

    r = np.asarray(r_grid, dtype=float)
    if d + float(r.max()) > basis.domain_radius or f.support_radius > basis.domain_radius:
        raise DomainError("sphere leaves the Dirichlet ball")
    a = dirichlet_coefficients(model, f, basis)
    coef = a * _phi_at(model, basis.eigen_lambdas, d)
    cols, has_imag = _complex_columns(coef)
    S, _ = eigen.synth_phi(model, basis.eigen_lambdas, cols, r)
    return RadialFunction(r, _from_columns(S, has_imag), d + f.support_radius)


def windowed_eigenfunction(
    model: DensityModel, lam: float, inner: float, outer: float, dr: float
) -> RadialFunction:
    """``phi_lam`` multiplied by a smooth window equal to 1 on ``[0, inner]``."""
    r = radial_grid(outer, dr)
    vals, _ = eigen.phi_table(model, np.array([lam]), r)
    return RadialFunction(r, vals[:, 0] * plateau_window(r, inner, outer), outer)


def asgeirsson_residual(
    model: DensityModel,
    lam: float,
    d1: float,
    d2: float,
    r: float,
    s: float,
    lambda_max: float | None = None,
) -> float:
    """Symmetry defect of two-point means of a separable eigen-solution.

    ``u(x, y) = phi_lam(d(sigma, x)) phi_lam(d(q, y))`` solves
    ``Delta_x u = Delta_y u``.  Taking the mean over radius ``r`` in ``x``
    (at distance ``d1`` from ``sigma``) and radius ``s`` in ``y`` (at
    distance ``d2`` from ``q``) must give the same number as swapping the
    radii.  Each mean is computed numerically from a windowed copy of
    ``phi_lam`` with :func:`spherical_mean`; the window is 1 wherever the
    spheres reach, so the exact means are unaffected by it.
    """
    for v in (d1, d2, r, s):
        if v < 0:
            raise DomainError("distances and radii must be non-negative")
    reach = max(d1, d2) + max(r, s)
    inner = reach + 1.0 / model.scale
    outer = inner + 2.0 / model.scale
    if lambda_max is None:
        lambda_max = 400.0 * model.scale
    dr = RESOLUTION_LIMIT / lambda_max
    f = windowed_eigenfunction(model, lam, inner, outer, dr)
    grid = make_lambda_grid(lambda_max, bandwidth=outer + reach)
    F = forward_radial_fourier(model, f, grid)
    radii = np.unique(np.array([r, s], dtype=float))
    c0 = plancherel_constant(model)

    def means(d: float) -> dict[float, complex]:
        M = mean_spectrum(model, F, d)
        coef = c0 * M.grid.weights * M.weight * M.values
        S, _ = eigen.synth_phi(model, M.lambdas, coef.real[:, None], radii)
        return {float(x): float(S[k, 0]) for k, x in enumerate(radii)}

    m1 = means(d1)
    m2 = m1 if d2 == d1 else means(d2)
    left = m1[float(r)] * m2[float(s)]
    right = m1[float(s)] * m2[float(r)]
    return float(abs(left - right))


def point_value(model: DensityModel, F: SpectralFunction, d: float) -> complex:
    """``C0 int F(lam) phi_lam(d) eta dlam``: the value at distance ``d`` of the function with spectrum ``F``."""
    weight = F.weight if F.weight is not None else eigen.plancherel_density(model, F.lambdas)
    phi = _phi_at(model, F.lambdas, d)
    return complex(plancherel_constant(model) * np.sum(F.grid.weights * weight * F.values * phi))


def radial_laplacian(model: DensityModel, f: RadialFunction, order: int = 8) -> RadialFunction:
    """``L_A f = f'' + (A'/A) f'`` by centred finite differences on the grid of ``f``.

    Uses the even extension of ``f`` across ``r = 0``; at ``r = 0`` the
    operator is ``(1 + a) f''(0)`` with ``a`` the small-r exponent of A.
    """
    h = f.dr
    p = order // 2
    d1, d2 = _fd_stencils(p)
    n = f.r_grid.size
    ext = np.concatenate([f.values[p:0:-1], f.values, np.zeros(p, dtype=complex)])
    fp = np.zeros(n, dtype=complex)
    fpp = np.zeros(n, dtype=complex)
    for k in range(2 * p + 1):
        fp += d1[k] * ext[k:k + n]
        fpp += d2[k] * ext[k:k + n]
    fp /= h
    fpp /= h * h
    out = np.empty_like(f.values)
    r = f.r_grid
    pos = r > 0
    out[pos] = fpp[pos] + model.logderiv(r[pos]) * fp[pos]
    out[~pos] = (1.0 + model.exponent) * fpp[~pos]
    return f.with_values(out)


def _fd_stencils(p: int) -> tuple[FloatArray, FloatArray]:
    """Centred first/second derivative stencils on ``2p + 1`` points."""
    offsets = np.arange(-p, p + 1, dtype=float)
    V = offsets[None, :] ** np.arange(2 * p + 1)[:, None]
    e1 = np.zeros(2 * p + 1)
    e1[1] = 1.0
    e2 = np.zeros(2 * p + 1)
    e2[2] = 2.0
    return np.linalg.solve(V, e1), np.linalg.solve(V, e2)


def bump_laplacian_profile(model: DensityModel, r: npt.ArrayLike, radius: float) -> FloatArray:
    """Exact ``L_A`` of the bump ``exp(-1/(1 - (r/R)^2))`` (closed form derivatives)."""
    r = np.asarray(r, dtype=float)
    x = r / radius
    b = bump_profile(r, radius)
    out = np.zeros_like(r)
    inside = np.abs(x) < 1
    xi = x[inside]
    q = 1.0 - xi**2
    # d/dx exp(-1/q) = -2x/q^2 exp(-1/q)
    g1 = -2.0 * xi / q**2
    g2 = g1**2 - 2.0 / q**2 - 8.0 * xi**2 / q**3
    bp = g1 * b[inside] / radius
    bpp = g2 * b[inside] / radius**2
    ri = r[inside]
    res = np.empty_like(ri)
    pos = ri > 0
    res[pos] = bpp[pos] + model.logderiv(ri[pos]) * bp[pos]
    res[~pos] = (1.0 + model.exponent) * bpp[~pos]
    out[inside] = res
    return out
