"""Independent numerical oracles shared by the tests."""

from __future__ import annotations

import numpy as np

from radialwave.density import DensityModel
from radialwave.eigen import eval_phi


def fd_stencil(p: int, order: int) -> np.ndarray:
    """Centred ``order``-th derivative weights on ``2p + 1`` unit-spaced points."""
    offs = np.arange(-p, p + 1, dtype=float)
    V = offs[None, :] ** np.arange(2 * p + 1)[:, None]
    e = np.zeros(2 * p + 1)
    e[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, e)


def ode_residual(model: DensityModel, lam: complex, r_max: float = 20.0, h: float = 1e-3) -> float:
    """``max |phi'' + (A'/A) phi' + (lam^2 + rho^2) phi|`` over interior nodes.

    ``phi''`` is an 8th-order finite difference of the returned derivative
    samples, so the check does not reuse the integrator's own right-hand side.
    """
    r = np.arange(0.0, r_max + 0.5 * h, h)
    ef = eval_phi(model, lam, r)
    w = fd_stencil(4, 1) / h
    d2 = np.convolve(ef.derivs, w[::-1], mode="valid")
    inner = slice(4, r.size - 4)
    ri = r[inner]
    res = d2 + model.logderiv(ri) * ef.derivs[inner] + (lam**2 + model.rho**2) * ef.values[inner]
    return float(np.max(np.abs(res)))


def h3_exact_solution(f, g, r: np.ndarray, t: float, n_quad: int = 1000) -> np.ndarray:
    """Closed-form H^3 solution for profiles ``f, g`` (callables of r >= 0).

    With ``w = sinh(r) u`` the shifted equation on H^3 becomes the 1-D wave
    equation, so ``u = (h(r+t) + h(r-t)) / (2 sinh r) + int_{r-t}^{r+t} k / (2 sinh r)``
    with the odd extensions ``h = sinh * f`` and ``k = sinh * g``.  At ``r = 0``
    the limit is ``h'(t) + k(t)``.
    """
    r = np.asarray(r, dtype=float)

    def h(x: np.ndarray) -> np.ndarray:
        return np.sinh(x) * f(np.abs(x))

    def k(x: np.ndarray) -> np.ndarray:
        return np.sinh(x) * g(np.abs(x))

    xg, wg = np.polynomial.legendre.leggauss(n_quad)
    out = np.empty_like(r)
    for i, ri in enumerate(r):
        a, b = ri - t, ri + t
        s = 0.5 * (b - a) * xg + 0.5 * (b + a)
        integral = 0.5 * (b - a) * np.sum(wg * k(s))
        if ri == 0.0:
            eps = 1e-5
            dh = (h(np.array([t + eps])) - h(np.array([t - eps])))[0] / (2 * eps)
            out[i] = dh + k(np.array([t]))[0]
        else:
            out[i] = (h(np.array([b]))[0] + h(np.array([a]))[0] + integral) / (2.0 * np.sinh(ri))
    return out
