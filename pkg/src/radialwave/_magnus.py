"""Sixth-order Magnus integrator for ``v'' = (G(r) - L) v``.

The eigen equation of the radial Laplacian is solved in Liouville form
``v = sqrt(A) u`` where the first-derivative term disappears.  For each mesh
step the Magnus exponent is a traceless 2x2 matrix whose entries depend
affinely on ``L = lam^2``; the ``L``-independent pieces are precomputed once
per mesh (``step_coefficients``) and the numba kernels below then sweep many
``lam`` values over the same mesh.

A 2x2 traceless matrix ``X = [[a, b], [c, -a]]`` satisfies ``X^2 = (a^2+bc) I``
so its exponential is ``cosh(th) I + sinh(th)/th X`` with ``th^2 = a^2 + bc``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np
import numpy.typing as npt

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip probing an incompatible TBB runtime; OpenMP or the builtin queue suffice
    numba.config.THREADING_LAYER = "omp"

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

_S15 = math.sqrt(15.0)
_GAUSS3 = (0.5 - _S15 / 10.0, 0.5, 0.5 + _S15 / 10.0)

# default mesh: geometric growth factor near the origin, uniform step beyond
DEFAULT_Q = 0.01
DEFAULT_H = 0.005


def step_coefficients(mesh: FloatArray, potential) -> FloatArray:
    """Per-step data ``(h, h G_mid, a0, a1, b, c0, c1)`` for the kernels.

    With ``c = h G_mid - h L`` the Magnus exponent of the step is
    ``[[a0 + a1 c, b], [c0 + c1 c, -(a0 + a1 c)]]``.
    """
    r = mesh[:-1]
    h = np.diff(mesh)
    g1 = h * potential(r + _GAUSS3[0] * h)
    g2 = h * potential(r + _GAUSS3[1] * h)
    g3 = h * potential(r + _GAUSS3[2] * h)
    d = _S15 / 3.0 * (g3 - g1)
    e = 10.0 / 3.0 * (g3 - 2.0 * g2 + g1)
    h2 = h * h
    a0 = (-20.0 * h * d + h2 * d * e / 30.0) / 240.0
    a1 = (4.0 / 3.0) * h2 * d / 240.0
    b = h + (h2 * h * d * d / 15.0 - (4.0 / 3.0) * h2 * e) / 240.0
    c1 = 1.0 + (4.0 / 3.0) * h * e / 240.0 + h2 * d * d / (15.0 * 240.0)
    c0 = e / 12.0 + (h * e * e / 15.0 - 2.0 * h * d * d) / 240.0
    return np.ascontiguousarray(np.stack([h, g2, a0, a1, b, c0, c1], axis=1))


@numba.njit(cache=True, inline="always")
def _step_real(Ck, L, v, dv):
    h = Ck[0]
    cc = Ck[1] - h * L
    oa = Ck[2] + Ck[3] * cc
    ob = Ck[4]
    oc = Ck[5] + Ck[6] * cc
    t2 = oa * oa + ob * oc
    if t2 < -1e-10:
        w = math.sqrt(-t2)
        ch = math.cos(w)
        sh = math.sin(w) / w
    elif t2 > 1e-10:
        w = math.sqrt(t2)
        ch = math.cosh(w)
        sh = math.sinh(w) / w
    else:
        ch = 1.0 + t2 / 2.0 + t2 * t2 / 24.0
        sh = 1.0 + t2 / 6.0 + t2 * t2 / 120.0
    nv = (ch + sh * oa) * v + sh * ob * dv
    ndv = sh * oc * v + (ch - sh * oa) * dv
    return nv, ndv


@numba.njit(cache=True, parallel=True)
def collect_real(C, L, v0, dv0, out_idx):
    """Values ``v`` and ``v'`` at mesh indices ``out_idx`` (ascending)."""
    n_steps = C.shape[0]
    nl = L.shape[0]
    no = out_idx.shape[0]
    V = np.empty((no, nl))
    D = np.empty((no, nl))
    for j in numba.prange(nl):
        v = v0[j]
        dv = dv0[j]
        o = 0
        while o < no and out_idx[o] == 0:
            V[o, j] = v
            D[o, j] = dv
            o += 1
        for k in range(n_steps):
            v, dv = _step_real(C[k], L[j], v, dv)
            while o < no and out_idx[o] == k + 1:
                V[o, j] = v
                D[o, j] = dv
                o += 1
    return V, D


@numba.njit(cache=True, parallel=True)
def project_real(C, L, v0, dv0, out_idx, W, squares):
    """``P[j, c] = sum_o W[o, c] * v_o(L_j)`` (or ``v_o**2`` when ``squares``)."""
    n_steps = C.shape[0]
    nl = L.shape[0]
    no = out_idx.shape[0]
    nc = W.shape[1]
    P = np.zeros((nl, nc))
    for j in numba.prange(nl):
        v = v0[j]
        dv = dv0[j]
        o = 0
        while o < no and out_idx[o] == 0:
            x = v * v if squares else v
            for c in range(nc):
                P[j, c] += W[o, c] * x
            o += 1
        for k in range(n_steps):
            if o >= no:
                break
            v, dv = _step_real(C[k], L[j], v, dv)
            while o < no and out_idx[o] == k + 1:
                x = v * v if squares else v
                for c in range(nc):
                    P[j, c] += W[o, c] * x
                o += 1
    return P


@numba.njit(cache=True)
def synth_real(C, L, v0, dv0, out_idx, coef, want_deriv):
    """``S[o, c] = sum_j coef[j, c] * v_o(L_j)`` and the same for ``v'``."""
    n_steps = C.shape[0]
    nl = L.shape[0]
    no = out_idx.shape[0]
    nc = coef.shape[1]
    S = np.zeros((no, nc))
    SD = np.zeros((no, nc)) if want_deriv else np.zeros((0, nc))
    for j in range(nl):
        v = v0[j]
        dv = dv0[j]
        o = 0
        while o < no and out_idx[o] == 0:
            for c in range(nc):
                S[o, c] += coef[j, c] * v
                if want_deriv:
                    SD[o, c] += coef[j, c] * dv
            o += 1
        for k in range(n_steps):
            if o >= no:
                break
            v, dv = _step_real(C[k], L[j], v, dv)
            while o < no and out_idx[o] == k + 1:
                for c in range(nc):
                    S[o, c] += coef[j, c] * v
                    if want_deriv:
                        SD[o, c] += coef[j, c] * dv
                o += 1
    return S, SD


@numba.njit(cache=True)
def collect_complex(C, L, v0, dv0, out_idx):
    """Complex ``L`` and data; returns mantissas and a log-scale per output.

    The true solution is ``V * exp(E)``; rescaling keeps exponentially
    growing solutions (complex ``lam``) representable.
    """
    n_steps = C.shape[0]
    nl = L.shape[0]
    no = out_idx.shape[0]
    V = np.empty((no, nl), dtype=np.complex128)
    D = np.empty((no, nl), dtype=np.complex128)
    E = np.zeros((no, nl))
    for j in range(nl):
        v = v0[j]
        dv = dv0[j]
        sc = 0.0
        o = 0
        while o < no and out_idx[o] == 0:
            V[o, j] = v
            D[o, j] = dv
            E[o, j] = sc
            o += 1
        for k in range(n_steps):
            h = C[k, 0]
            cc = C[k, 1] - h * L[j]
            oa = C[k, 2] + C[k, 3] * cc
            ob = C[k, 4]
            oc = C[k, 5] + C[k, 6] * cc
            t2 = oa * oa + ob * oc
            if abs(t2) > 1e-10:
                w = np.sqrt(t2)
                ch = np.cosh(w)
                sh = np.sinh(w) / w
            else:
                ch = 1.0 + t2 / 2.0 + t2 * t2 / 24.0
                sh = 1.0 + t2 / 6.0 + t2 * t2 / 120.0
            nv = (ch + sh * oa) * v + sh * ob * dv
            dv = sh * oc * v + (ch - sh * oa) * dv
            v = nv
            m = max(abs(v), abs(dv))
            if m > 1e100:
                v = v / m
                dv = dv / m
                sc += math.log(m)
            while o < no and out_idx[o] == k + 1:
                V[o, j] = v
                D[o, j] = dv
                E[o, j] = sc
                o += 1
    return V, D, E


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Mesh:
    """Integration mesh together with positions of the requested outputs."""

    nodes: FloatArray
    out_idx: IntArray
    coeffs: FloatArray


def forward_mesh(
    r0: float, r_out: FloatArray, h: float, q: float = DEFAULT_Q, r_end: float | None = None
) -> tuple[FloatArray, IntArray]:
    """Mesh from ``r0`` outward: geometric while ``q r < h``, then uniform ``h``.

    Every entry of ``r_out`` (all ``>= r0``) is inserted so the march stops on it.
    """
    r_out = np.asarray(r_out, dtype=float)
    top = float(r_out.max()) if r_out.size else r0
    if r_end is not None:
        top = max(top, r_end)
    r_switch = h / q
    n_geo = int(math.ceil(math.log(max(r_switch, r0) / r0) / math.log1p(q))) + 1
    geo = r0 * (1.0 + q) ** np.arange(n_geo)
    geo = geo[geo < min(r_switch, top)]
    start = geo[-1] if geo.size else r0
    n_uni = int(math.ceil((top - start) / h))
    uni = start + h * np.arange(1, n_uni + 1)
    nodes = np.unique(np.concatenate([[r0], geo, uni[uni < top], [top], r_out]))
    idx = np.searchsorted(nodes, r_out)
    return nodes, idx.astype(np.int64)


def backward_mesh(r_start: float, r_out: FloatArray, h: float) -> tuple[FloatArray, IntArray]:
    """Decreasing uniform mesh from ``r_start`` down to ``min(r_out)``."""
    r_out = np.asarray(r_out, dtype=float)
    bottom = float(r_out.min())
    n = int(math.ceil((r_start - bottom) / h))
    uni = r_start - h * np.arange(n + 1)
    uni = uni[uni > bottom]
    nodes = np.unique(np.concatenate([uni, [r_start, bottom], r_out]))[::-1].copy()
    idx = len(nodes) - 1 - np.searchsorted(nodes[::-1], r_out)
    return nodes, idx.astype(np.int64)
