"""Quadrature rules: composite Gauss-Legendre panels and corrected trapezoid weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from scipy.special import bernoulli

FloatArray = npt.NDArray[np.float64]

GL_ORDER = 16


@lru_cache(maxsize=8)
def _gl_reference(n: int) -> tuple[FloatArray, FloatArray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre_panels(edges: npt.ArrayLike, n: int = GL_ORDER) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights of the composite n-point rule on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gl_reference(n)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class LambdaGrid:
    """Spectral quadrature grid on ``[0, lambda_max]``.

    ``nodes``/``weights`` form a composite Gauss-Legendre rule on ``edges``.
    Panels near the origin are narrow (Plancherel densities may have complex
    poles close to ``lam = 0``); further out their width is set by the
    largest frequency the integrands oscillate with in ``lam``.
    """

    lambda_max: float
    bandwidth: float
    order: int
    edges: FloatArray
    nodes: FloatArray
    weights: FloatArray

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def panel_width(self) -> float:
        return float(np.max(np.diff(self.edges)))

    def key(self) -> tuple[float, float, int]:
        return (self.lambda_max, self.bandwidth, self.order)


def make_lambda_grid(
    lambda_max: float,
    bandwidth: float = 0.0,
    order: int = GL_ORDER,
    near_width: float = 0.5,
    near_range: float = 5.0,
    max_width: float = 2.0,
) -> LambdaGrid:
    """Composite Gauss-Legendre grid for integrals over ``[0, lambda_max]``.

    ``bandwidth`` is the largest ``T`` such that integrands behave like
    ``exp(i T lam)``.  Panels on ``[0, near_range]`` are at most
    ``near_width`` wide; beyond, at most ``min(max_width, 0.6 * order / T)``.
    """
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    far = max_width
    if bandwidth > 0:
        far = min(far, 0.6 * order / bandwidth)
    near = min(near_width, far)
    split = min(near_range, lambda_max)
    n_near = max(1, int(math.ceil(split / near - 1e-9)))
    edges = list(np.linspace(0.0, split, n_near + 1))
    if lambda_max > split:
        n_far = max(1, int(math.ceil((lambda_max - split) / far - 1e-9)))
        edges += list(np.linspace(split, lambda_max, n_far + 1)[1:])
    edges_arr = np.asarray(edges)
    nodes, weights = gauss_legendre_panels(edges_arr, order)
    return LambdaGrid(float(lambda_max), float(bandwidth), order, edges_arr, nodes, weights)


# ----------------------------------------------------------------------
@lru_cache(maxsize=16)
def _end_corrections(m: int) -> FloatArray:
    """Corrections to the first ``m`` trapezoid weights (unit spacing).

    They make the corrected rule exact for polynomials of degree < m at the
    left end of a long grid.  The Euler-Maclaurin error of the trapezoid rule
    for ``x**k`` from the left end is ``-B_{k+1}/(k+1)`` for odd ``k`` and
    zero otherwise; the corrections cancel it.
    """
    B = bernoulli(m + 1)
    k = np.arange(m)
    rhs = np.array([B[kk + 1] / (kk + 1) if kk % 2 == 1 else 0.0 for kk in k])
    j = np.arange(m, dtype=float)
    V = j[None, :] ** k[:, None]
    V[0, 0] = 1.0
    return np.linalg.solve(V, rhs)


def uniform_weights(n_points: int, h: float, order: int = 8, left: bool = True, right: bool = True) -> FloatArray:
    """Weights for ``int f dr`` over a uniform grid of ``n_points`` samples.

    Trapezoid weights with Gregory-type endpoint corrections of the given
    order at each end flagged ``True``.  An end where the integrand vanishes
    to all orders needs no correction.
    """
    w = np.full(n_points, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    if n_points < 2 * order + 2:
        if n_points < 3:
            return w
        order = max(2, (n_points - 2) // 2)
    corr = _end_corrections(order) * h
    if left:
        w[:order] += corr
    if right:
        w[n_points - order:] += corr[::-1]
    return w
