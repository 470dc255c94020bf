from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from radialwave import transforms as T
from radialwave.density import hyperbolic_model
from radialwave.eigen import eval_phi
from radialwave.errors import ResolutionError, TruncationError
from radialwave.meanvalue import bump_laplacian_profile, windowed_eigenfunction
from radialwave.quadrature import make_lambda_grid, uniform_weights

DR = 5e-4


@pytest.fixture(scope="module")
def h3_bump(h3):
    r = T.radial_grid(4.0, DR)
    f = T.bump(r, 1.0)
    grid = T.auto_lambda_grid(h3, f)
    return f, grid, T.forward_radial_fourier(h3, f, grid)


def test_bump_generator_support():
    r = T.radial_grid(2.0, 0.01)
    f = T.bump(r, 1.0)
    assert f.support_radius == 1.0
    assert np.all(f.values[r >= 1.0] == 0)
    assert f.values[0] == pytest.approx(math.exp(-1.0))


def test_zero_function_has_zero_spectrum(h4):
    r = T.radial_grid(3.0, 0.01)
    f = T.RadialFunction(r, np.zeros(r.size), 1.0)
    grid = make_lambda_grid(20.0)
    F = T.forward_radial_fourier(h4, f, grid)
    assert np.all(F.values == 0)
    assert np.all(T.inverse_radial_fourier(h4, F, r).values == 0)


def test_resolution_guard(h3):
    r = T.radial_grid(3.0, 0.01)
    with pytest.raises(ResolutionError):
        T.forward_radial_fourier(h3, T.bump(r, 1.0), make_lambda_grid(21.0))


def test_truncation_guard(h3):
    r = T.radial_grid(3.0, 0.01)
    f = T.bump(r, 1.0)
    F = T.forward_radial_fourier(h3, f, make_lambda_grid(10.0))
    with pytest.raises(TruncationError):
        T.inverse_radial_fourier(h3, F, r)


def test_h3_spectrum_against_oracle(h3, h3_bump, oracles):
    f, _, _ = h3_bump
    table = oracles["h3_bump_R1_transform"]
    lams = np.array([float(k) for k in table])
    ref = h3.sphere_const * np.array(list(table.values()))
    F = T.forward_radial_fourier(h3, f, _grid_with_nodes(lams))
    assert np.max(np.abs(F.values - ref)) <= 1e-12


def test_zero_node_is_weighted_mass(h3, h3_bump):
    f, _, _ = h3_bump
    # phi_0(r) = r / sinh r and A = 4 sinh^2 r on H^3
    direct, _ = quad(lambda x: 4.0 * T.bump_profile(x, 1.0) * x * math.sinh(x), 0.0, 1.0, epsabs=1e-14)
    F0 = T.forward_radial_fourier(h3, f, _grid_with_nodes(np.array([0.0])))
    assert F0.values[0].real == pytest.approx(h3.sphere_const * direct, rel=1e-10)


def _grid_with_nodes(lams: np.ndarray):
    """A LambdaGrid carrying exactly the given nodes (weights unused)."""
    grid = make_lambda_grid(max(float(lams.max()), 1.0))
    return replace(grid, nodes=lams, weights=np.zeros_like(lams))


def test_round_trip_and_plancherel(h3, h3_bump):
    f, _, F = h3_bump
    back = T.inverse_radial_fourier(h3, F, f.r_grid)
    assert np.max(np.abs(back.values - f.values)) <= 1e-6
    assert abs(T.l2_norm2(h3, f) - T.spectral_norm2(h3, F)) <= 1e-6 * T.l2_norm2(h3, f)


def test_h4_plancherel(h4):
    r = T.radial_grid(3.0, DR)
    f = T.bump(r, 0.8, center=0.6)
    F = T.forward_radial_fourier(h4, f, T.auto_lambda_grid(h4, f))
    assert T.spectral_norm2(h4, F) == pytest.approx(T.l2_norm2(h4, f), rel=1e-6)


def test_c0_calibration_is_stable(models):
    for m in models.values():
        cal = T.calibrate_c0(m)
        assert cal.spread <= 1e-6
        assert cal.value == pytest.approx(cal.theory, rel=1e-6)
        assert cal.value == pytest.approx(cal.plancherel, rel=1e-6)
    h3 = models["H3"]
    # H^3: sphere_const = pi, kappa = 1, so C0 = 1 / (2 pi^2)
    assert T.calibrate_c0(h3).value == pytest.approx(1.0 / (2 * math.pi**2), rel=1e-9)


@pytest.mark.parametrize("name", ["H3", "H4"])
def test_transform_intertwines_laplacian(models, name):
    m = models[name]
    r = T.radial_grid(3.0, DR)
    f = T.bump(r, 1.0)
    grid = T.auto_lambda_grid(m, f)
    F = T.forward_radial_fourier(m, f, grid)
    LF = T.forward_radial_fourier(m, f.with_values(bump_laplacian_profile(m, r, 1.0)), grid)
    err = np.abs(LF.values + (grid.nodes**2 + m.rho**2) * F.values)
    assert err.max() <= 1e-6 * np.abs(LF.values).max()


@settings(max_examples=10, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), radius=st.floats(0.3, 1.5))
def test_forward_transform_is_linear(a, b, radius):
    m = hyperbolic_model(4)
    r = T.radial_grid(2.0, 0.005)
    grid = make_lambda_grid(30.0)
    f, g = T.bump(r, radius), T.bump(r, 0.5, center=1.0)
    lhs = T.forward_radial_fourier(m, f.with_values(a * f.values + b * g.values), grid).values
    rhs = a * T.forward_radial_fourier(m, f, grid).values + b * T.forward_radial_fourier(m, g, grid).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.abs(rhs).max())


# ----------------------------------------------------------------------
def test_line_fourier_gaussian():
    s = np.linspace(0.0, 12.0, 6001)
    u = T.EvenLineFunction(s, np.exp(-(s**2) / 2))
    lams = np.array([0.0, 0.7, 2.0, 4.5])
    got = T.line_fourier_values(u, lams)
    ref = [2 * quad(lambda t, l=l: math.exp(-t * t / 2) * math.cos(l * t), 0, np.inf)[0] for l in lams]
    assert np.max(np.abs(got - ref)) <= 1e-8
    assert np.max(np.abs(got - math.sqrt(2 * math.pi) * np.exp(-(lams**2) / 2))) <= 1e-8
    zero = T.EvenLineFunction(s, np.zeros(s.size))
    assert np.all(T.line_fourier_values(zero, lams) == 0)


def test_line_fourier_round_trip():
    s = np.linspace(0.0, 10.0, 2001)
    u = T.EvenLineFunction(s, np.exp(-(s**2)))
    grid = make_lambda_grid(30.0, bandwidth=10.0)
    back = T.inverse_line_fourier(T.line_fourier(u, grid), s)
    assert np.max(np.abs(back.values - u.values)) <= 1e-10


def test_paley_wiener_envelope(h3, h3_bump):
    f, grid, _ = h3_bump
    A = T.abel(h3, f, grid)
    l1 = 2.0 * float(np.sum(uniform_weights(A.s_grid.size, A.ds) * np.abs(A.values)))
    for tau in (0.25, 0.5, 1.0, 2.0):
        lam = np.linspace(0.0, 30.0, 61) + 1j * tau
        assert np.all(np.abs(T.line_fourier_values(A, lam)) <= math.exp(tau * 1.0) * l1)


def test_abel_consistency(h3, h3_bump):
    f, grid, F = h3_bump
    A = T.abel(h3, f, grid)
    top = np.abs(A.values).max()
    assert np.max(np.abs(A.values[A.s_grid > 1.0 + 2 * DR])) <= 1e-8 * top
    s, v = A.full_line()
    assert np.array_equal(v, v[::-1]) and np.array_equal(s, -s[::-1])
    assert np.max(np.abs(T.line_fourier_values(A, grid.nodes) - F.values)) <= 1e-6 * np.abs(F.values).max()


def test_abel_of_zero(h4):
    r = T.radial_grid(2.0, 0.01)
    A = T.abel(h4, T.RadialFunction(r, np.zeros(r.size), 1.0), make_lambda_grid(10.0))
    assert np.all(A.values == 0)


def test_h3_abel_closed_form(h3):
    # On H^3, A(f)(s) = 2 pi int_|s|^inf f(r) sinh(r) dr up to the sphere constant.
    r = T.radial_grid(3.0, 1e-3)
    f = T.bump(r, 1.0)
    grid = T.auto_lambda_grid(h3, f)
    A = T.abel(h3, f, grid)
    s = np.array([0.0, 0.3, 0.7, 0.95])
    ref = np.array([quad(lambda x: T.bump_profile(x, 1.0) * math.sinh(x), v, 1.0)[0] for v in s])
    got = np.interp(s, A.s_grid, A.values.real)
    scale = got[0] / ref[0]
    assert scale == pytest.approx(2.0 * h3.sphere_const, rel=1e-8)
    assert np.max(np.abs(got - scale * ref)) <= 1e-8 * abs(got[0])


# ----------------------------------------------------------------------
def test_dual_abel_of_windowed_cosine(h3):
    lam0 = 2.0
    s = np.linspace(0.0, 30.0, 15001)
    u = T.EvenLineFunction(s, np.cos(lam0 * s) * T.plateau_window(s, 8.0, 14.0))
    r = np.linspace(0.0, 6.0, 601)
    a = T.dual_abel(h3, u, r)
    assert np.max(np.abs(a.values - eval_phi(h3, lam0, r).values)) <= 1e-4


def test_dual_abel_closed_form_and_round_trip(h3):
    # On H^3, a(u)(r) = int_0^r u / sinh r; the mean-zero Gaussian keeps it Gaussian-decaying.
    s = np.linspace(0.0, 10.0, 5001)
    u = T.EvenLineFunction(s, (1 - 2 * s**2) * np.exp(-(s**2)))
    r = T.radial_grid(8.0, 0.002)
    a = T.dual_abel(h3, u, r)
    rp = r[1:]
    assert np.max(np.abs(a.values[1:] - rp * np.exp(-(rp**2)) / np.sinh(rp))) <= 1e-10
    assert a.values[0] == pytest.approx(1.0, abs=1e-10)
    g = a.with_values(np.where(r <= 6.0, a.values, 0.0), support_radius=6.0)
    back = T.inverse_dual_abel(h3, g, s[:2001])
    assert np.max(np.abs(back.values - u.values[:2001])) <= 1e-6


def test_inverse_dual_abel_of_eigenfunction(h3):
    g = windowed_eigenfunction(h3, 2.0, 8.0, 14.0, 0.005)
    t = np.linspace(0.0, 4.0, 401)
    assert np.max(np.abs(T.inverse_dual_abel(h3, g, t).values - np.cos(2.0 * t))) <= 1e-4


def test_dual_abel_of_zero(h4):
    s = np.linspace(0.0, 5.0, 501)
    r = np.linspace(0.0, 3.0, 301)
    out = T.dual_abel(h4, T.EvenLineFunction(s, np.zeros(s.size)), r, lambda_grid=make_lambda_grid(10.0))
    assert np.all(out.values == 0)
    g = T.RadialFunction(r, np.zeros(r.size), 1.0)
    assert np.all(T.inverse_dual_abel(h4, g, s, lambda_grid=make_lambda_grid(10.0)).values == 0)


def test_csv_export(tmp_path):
    r = T.radial_grid(1.0, 0.25)
    f = T.bump(r, 1.0, amplitude=1 + 2j)
    p = f.to_csv(tmp_path / "f.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "x,re,im"
    x, re, im = lines[2].split(",")
    assert float(x) == 0.25 and float(re) == f.values[1].real and float(im) == f.values[1].imag
