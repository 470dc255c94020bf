from __future__ import annotations

import math

import numpy as np
import pytest

from radialwave import analysis as A
from radialwave import transforms as T
from radialwave import wave as W
from radialwave.density import make_jacobi_model
from radialwave.errors import DomainError


@pytest.fixture(scope="module")
def h3_small_bump() -> W.CauchyData:
    return W.bump_data(T.radial_grid(1.0, 2.5e-4), 0.5, 1.0, 0.5)


@pytest.fixture(scope="module")
def h4_bump() -> W.CauchyData:
    return W.bump_data(T.radial_grid(2.0, 5e-4), 1.0)


def test_polynomial_plancherel_classification(models):
    assert A.has_polynomial_plancherel(models["H3"])
    assert not A.has_polynomial_plancherel(models["H4"])
    # p = 5, q = 2: eta is lam^2 (lam^2 + 1)(lam^2 + 9) up to a constant
    assert A.has_polynomial_plancherel(models["DR"])
    assert A.has_polynomial_plancherel(make_jacobi_model(1.5, -0.5, 1.0))
    assert not A.has_polynomial_plancherel(make_jacobi_model(1.0, 0.0, 1.0))


def test_fit_decay_recovers_rate():
    t = np.linspace(0.0, 5.0, 51)
    rate, res, n = A.fit_decay(t, 3.0 * np.exp(-1.7 * t))
    assert rate == pytest.approx(1.7, rel=1e-12) and res <= 1e-12 and n == 51
    rate, res, n = A.fit_decay(t, np.zeros(t.size))
    assert math.isnan(rate) and n == 0


# ----------------------------------------------------------------------
def test_strong_huygens_on_h3(h3, h3_small_bump):
    t = np.arange(0.0, 6.0 + 1e-9, 0.02)
    rep = A.huygens_profile(h3, h3_small_bump, 2.0, t)
    assert rep.claim == "strong_huygens" and rep.passed
    assert rep.region_start == pytest.approx(2.5 + 2 * 2.5e-4)
    assert rep.measured <= 1e-6
    # inside the light cone the solution is not small
    assert rep.values[np.argmin(np.abs(t - 2.0))] > 1e-3 * rep.peak


def test_huygens_decay_rate_on_h4(h4, h4_bump):
    rep = A.huygens_profile(h4, h4_bump, 2.0, np.arange(0.0, 10.0 + 1e-9, 0.05))
    assert rep.claim == "huygens_decay" and rep.passed
    assert rep.rate is not None and rep.rate > 0 and rep.residual < 0.1


def test_huygens_needs_times_past_the_cone(h3, h3_small_bump):
    with pytest.raises(DomainError):
        A.huygens_profile(h3, h3_small_bump, 2.0, np.linspace(0.0, 2.4, 5))


def test_exact_equipartition_on_h3(h3, h3_small_bump):
    rep = A.equipartition_profile(h3, h3_small_bump, np.arange(0.0, 8.0 + 1e-9, 0.05))
    assert rep.passed and rep.measured <= 1e-6
    assert rep.region_start == pytest.approx(0.5 + 2 * 2.5e-4)


def test_equipartition_at_time_zero_without_velocity(h4, h4_bump):
    spec = W.cauchy_spectrum(h4, h4_bump)
    K, P = W.spectral_energies(h4, spec, 0.0)
    assert K == 0.0
    rep = A.equipartition_profile(h4, h4_bump, [0.0, 1.0, 2.0, 3.0], spectrum=spec)
    assert rep.values[0] == pytest.approx(1.0, rel=1e-12)


def test_equipartition_decay_on_h4(h4, h4_bump):
    huy = A.huygens_profile(h4, h4_bump, 2.0, np.arange(0.0, 10.0 + 1e-9, 0.05))
    rep = A.equipartition_profile(h4, h4_bump, np.arange(1.0, 8.0 + 1e-9, 0.05), huygens_rate=huy.rate)
    assert rep.passed and rep.residual < 0.1 and rep.rate > 0
    assert rep.rate >= 0.9 * 2 * huy.rate
    assert rep.to_json()["region"].startswith("t >= ")


# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def pw_rows(h3):
    f = T.bump(T.radial_grid(2.0, 5e-4), 1.0)
    return A.paley_wiener_report(h3, f, [0, 3, 6], [0.0, 0.5])


def test_paley_wiener_plateaus(pw_rows):
    assert len(pw_rows) == 6
    assert all(row.plateau for row in pw_rows)
    assert all(np.isfinite(row.sup) for row in pw_rows)


def test_paley_wiener_envelope(pw_rows):
    for row in pw_rows:
        if row.N == 0:
            assert row.within_envelope and row.sup <= row.envelope * (1 + 1e-9)


def test_paley_wiener_zero_function(h3):
    r = T.radial_grid(2.0, 0.01)
    rows = A.paley_wiener_report(h3, T.RadialFunction(r, np.zeros(r.size), 1.0), [0, 2], [0.0, 0.5], lambda_max=20.0)
    assert all(row.sup == 0.0 for row in rows)


def test_pw_radius_of_band_limited_spectrum(h3):
    F = A.band_limited_spectrum(h3, 2.0)
    res = A.pw_radius(h3, F, 40)
    assert res.radius == pytest.approx(2.0, rel=0.02)
    assert np.all(np.diff(res.m) > 0) and res.m_last < 2.0


def test_pw_radius_diverges_for_compact_support(h3):
    f = T.bump(T.radial_grid(2.0, 5e-4), 1.0)
    F = T.forward_radial_fourier(h3, f, T.auto_lambda_grid(h3, f))
    res = A.pw_radius(h3, F, 40)
    assert np.all(np.diff(res.m) > 0)
    # m_j keeps growing towards the edge of the numerical spectrum
    assert res.m[-1] > 100 * res.m[0]


def test_pw_radius_of_zero(h3):
    F = A.band_limited_spectrum(h3, 2.0)
    res = A.pw_radius(h3, F.with_values(np.zeros(F.grid.size)), 10)
    assert res.radius == 0.0 and res.m_last == 0.0
    with pytest.raises(DomainError):
        A.pw_radius(h3, F, 0)


def test_multiplier_route_matches_moments(h3, h4):
    for m in (h3, h4):
        F = A.band_limited_spectrum(m, 2.0)
        res = A.pw_radius(m, F, 40)
        for j in (1, 5, 20):
            assert A.multiplier_radius(m, F, j) == pytest.approx(res.m[2 * j - 1], rel=1e-8)


def test_energy_bound_for_band_limited_data(h4):
    F = A.band_limited_spectrum(h4, 2.0)
    r = T.radial_grid(2.0, 5e-4)
    g = T.bump(r, 0.8)
    G = T.forward_radial_fourier(h4, g, F.grid)
    spec = W.CauchySpectrum(F, G, math.inf)
    twoE = 2.0 * W.spectral_total_energy(h4, spec)
    bound = 4.0 * T.spectral_norm2(h4, F) + T.l2_norm2(h4, g)
    assert twoE <= bound + 1e-6


# ----------------------------------------------------------------------
def test_support_radius():
    r = T.radial_grid(2.0, 1e-3)
    f = T.bump(r, 1.0)
    # exp(-1/(1-x^2)) drops below 1e-10 of its peak at x = sqrt(1 - 1/(1 + 10 ln 10))
    threshold = math.sqrt(1.0 - 1.0 / (1.0 + 10.0 * math.log(10.0)))
    got = A.support_radius(f, 1e-10)
    assert abs(got - threshold) <= 1e-3 and got <= 1.0 + 2e-3
    assert A.support_radius(f, 1e-300) == pytest.approx(1.0, abs=2e-3)
    assert A.support_radius(f.with_values(np.zeros(r.size))) == 0.0


def test_abel_support(h3):
    f = T.bump(T.radial_grid(3.0, 5e-4), 1.0)
    a = T.abel(h3, f, T.auto_lambda_grid(h3, f))
    prof = T.RadialFunction(a.s_grid, a.values, 3.0)
    assert A.support_radius(prof, 1e-8) <= 1.0 + 2 * a.ds


def test_leakage_of_zero_data(h3):
    r = T.radial_grid(2.0, 0.01)
    zero = T.RadialFunction(r, np.zeros(r.size), 1.0)
    st = W.WaveState(1.0, zero, zero)
    assert A.light_cone_leakage(h3, [st], 1.0) == 0.0


def test_fdtd_leakage_tightens_under_refinement(h4, h4_bump):
    coarse = A.light_cone_leakage(h4, W.fdtd_trajectory(h4, h4_bump, [1.0, 2.0], 4e-2, 2e-2), 1.0)
    fine = A.light_cone_leakage(h4, W.fdtd_trajectory(h4, h4_bump, [1.0, 2.0], 1e-3, 5e-4), 1.0)
    assert fine <= 1e-4 and fine <= coarse
