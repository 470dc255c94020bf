"""Radial eigenfunctions, Jost-type solutions, the c-function and Dirichlet spectra.

All solutions of ``u'' + (A'/A) u' = -(lam^2 + rho^2) u`` are computed with a
sixth-order Magnus integrator applied to ``v = sqrt(A) u``.  The regular
solution ``phi_lam`` is launched from a two-term series at a tiny radius
``r0``; the Jost-type solutions ``Phi_lam ~ exp((i lam - rho) r)`` are seeded
at a large radius and integrated inwards.

Vectorised helpers (``phi_table``, ``project_phi``, ``synth_phi``) sweep many
real ``lam`` over one shared mesh and are what the transform module uses.
"""

from __future__ import annotations

import math
import threading
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.special import roots_jacobi

from . import _magnus as mg
from .density import DensityModel
from .errors import DomainError, RootError, SingularError
from .quadrature import uniform_weights

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

LAMBDA_SINGULAR = 1e-6
STRIP_MARGIN = 10.0
# Off the real axis the pure-exponential Jost seed leaves an admixture of the
# other solution of relative size exp(-2 (scale - |Im lam|) r_start), while
# round-off in the backward march grows like exp(2 |Im lam| r_start).  The
# best r_start is then about 18/scale for every Im lam and the attainable
# relative accuracy is roughly 1e-16 ** (1 - |Im lam| / scale), so c(lam) is
# only extracted for |Im lam| < C_IMAG_FRACTION * scale.
C_IMAG_FRACTION = 0.9


@dataclass(frozen=True)
class EigenFunction:
    """Samples of a radial solution and its r-derivative on ``r_grid``."""

    lam: complex
    r_grid: FloatArray
    values: ComplexArray
    derivs: ComplexArray


@dataclass(frozen=True)
class CFunctionValue:
    """c(lam) together with the Plancherel weight.

    ``plancherel_weight`` is ``|c(lam)|^-2`` for real ``lam``; for complex
    ``lam`` it is the analytic continuation ``1 / (c(lam) c(-lam))``.
    """

    lam: complex
    c: complex
    plancherel_weight: float | complex


# ----------------------------------------------------------------------
# mesh and step-coefficient cache
_cache_lock = threading.Lock()
_mesh_cache: "OrderedDict[tuple, mg.Mesh]" = OrderedDict()
_MESH_CACHE_SIZE = 32


def _mesh_h(model: DensityModel) -> float:
    return mg.DEFAULT_H / model.scale


def _launch_radius(model: DensityModel, mu_max: float) -> float:
    # bucket mu_max to powers of two so meshes can be shared between calls
    bucket = 2.0 ** math.ceil(math.log2(max(mu_max / model.scale**2, 1.0)))
    return 1e-3 / (model.scale * math.sqrt(1.0 + bucket))


def _forward(model: DensityModel, r_pos: FloatArray, mu_max: float) -> tuple[mg.Mesh, float]:
    # launch no further out than the smallest requested radius
    r0 = min(_launch_radius(model, mu_max), float(r_pos.min()))
    key = ("f", model.key, r0, r_pos.size, hash(r_pos.tobytes()))
    with _cache_lock:
        hit = _mesh_cache.get(key)
        if hit is not None:
            _mesh_cache.move_to_end(key)
            return hit, r0
    nodes, idx = mg.forward_mesh(r0, r_pos, _mesh_h(model))
    mesh = mg.Mesh(nodes, idx, mg.step_coefficients(nodes, model.liouville_potential))
    with _cache_lock:
        _mesh_cache[key] = mesh
        while len(_mesh_cache) > _MESH_CACHE_SIZE:
            _mesh_cache.popitem(last=False)
    return mesh, r0


def _launch(model: DensityModel, L, r0: float):
    """Liouville data ``(v, v')`` at ``r0`` from the two-term series of phi."""
    mu = L + model.rho**2
    a = model.exponent
    phi = 1.0 - mu * r0 * r0 / (2.0 * (a + 1.0))
    dphi = -mu * r0 / (a + 1.0)
    la = float(model.log_A(np.array([r0]))[0])
    p = float(model.logderiv(np.array([r0]))[0])
    sa = math.exp(0.5 * la)
    return sa * phi, sa * (0.5 * p * phi + dphi)


def _check_strip(model: DensityModel, lams: ComplexArray) -> None:
    if np.any(np.abs(np.imag(lams)) > model.rho + STRIP_MARGIN * model.scale):
        raise DomainError("|Im lam| exceeds the supported strip rho + 10")


def _real_L(lams: ComplexArray) -> bool:
    lams = np.asarray(lams)
    return bool(np.all((np.imag(lams) == 0) | (np.real(lams) == 0)))


def _split_grid(r: npt.ArrayLike) -> tuple[FloatArray, FloatArray, npt.NDArray[np.bool_]]:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise DomainError("radial grid must be one-dimensional")
    if np.any(r < 0):
        raise DomainError("radial grid must be non-negative")
    zero = r == 0
    return r, r[~zero], zero


def phi_table(
    model: DensityModel, lams: npt.ArrayLike, r: npt.ArrayLike, exact_small_r: bool = False
) -> tuple[npt.NDArray, npt.NDArray]:
    """``phi_lam(r)`` and ``d/dr phi_lam(r)`` as arrays of shape ``(len(r), len(lams))``.

    ``r`` must be non-decreasing.  Real or purely imaginary ``lam`` give real
    output; other complex ``lam`` give complex output.

    Near the origin the derivative recovered from the Liouville variables
    loses digits to the cancellation ``v'/v - A'/(2A)``.  With
    ``exact_small_r`` those entries are recomputed from the integral identity
    of :func:`_small_r_derivative` (costs one extra table on 16 nodes per
    affected radius).
    """
    lams = np.atleast_1d(np.asarray(lams))
    r, r_pos, zero = _split_grid(r)
    if np.any(np.diff(r) < 0):
        raise DomainError("radial grid must be non-decreasing")
    _check_strip(model, lams)
    L = lams.astype(complex) ** 2
    mu_max = float(np.max(np.abs(L + model.rho**2))) if L.size else 0.0
    real = _real_L(lams)
    dtype = float if real else complex
    vals = np.ones((r.size, lams.size), dtype=dtype)
    ders = np.zeros((r.size, lams.size), dtype=dtype)
    if r_pos.size == 0 or lams.size == 0:
        return vals, ders
    mesh, r0 = _forward(model, r_pos, mu_max)
    if real:
        Lr = np.ascontiguousarray(L.real)
        v0, dv0 = _launch(model, Lr, r0)
        V, D = mg.collect_real(mesh.coeffs, Lr, v0, dv0, mesh.out_idx)
        E = 0.0
    else:
        v0, dv0 = _launch(model, L, r0)
        V, D, E = mg.collect_complex(mesh.coeffs, L, v0.astype(complex), dv0.astype(complex), mesh.out_idx)
    half = 0.5 * model.log_A(r_pos)[:, None]
    p = model.logderiv(r_pos)[:, None]
    scale = np.exp(E - half)
    vals[~zero] = V * scale
    ders[~zero] = (D - 0.5 * p * V) * scale
    if exact_small_r:
        _small_r_derivative(model, lams, r, zero, ders)
    return vals, ders


_GJ_CACHE: dict[tuple[int, float], tuple[FloatArray, FloatArray]] = {}
SMALL_R_CANCELLATION = 100.0


def _gauss_jacobi_unit(n: int, a: float) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights for ``int_0^1 x^a h(x) dx``."""
    key = (n, a)
    if key not in _GJ_CACHE:
        x, w = roots_jacobi(n, 0.0, a)
        _GJ_CACHE[key] = (0.5 * (x + 1.0), w / 2.0 ** (a + 1.0))
    return _GJ_CACHE[key]


def _small_r_derivative(
    model: DensityModel, lams: npt.NDArray, r: FloatArray, zero: npt.NDArray[np.bool_], ders: npt.NDArray
) -> None:
    """Overwrite ``ders`` where ``A'/(2A)`` dominates ``phi'/phi`` by more than 100.

    Integrating ``(A phi')' = -mu A phi`` from 0 gives
    ``phi'(r) = -mu r int_0^1 x^a [B(r x) / B(r)] phi(r x) dx`` with
    ``A = r^a B``; the integral is a 16-point Gauss-Jacobi sum and only needs
    values of phi, which are accurate to round-off.
    """
    a = model.exponent
    mu = lams.astype(complex) ** 2 + model.rho**2
    with np.errstate(divide="ignore"):
        r_cut = np.sqrt(a * (a + 1.0) / (2.0 * SMALL_R_CANCELLATION * np.maximum(np.abs(mu), 1e-300)))
    mask = (~zero)[:, None] & (r[:, None] < r_cut[None, :])
    rows = np.nonzero(mask.any(axis=1))[0]
    if rows.size == 0:
        return
    cols = np.nonzero(mask.any(axis=0))[0]
    x, w = _gauss_jacobi_unit(16, a)
    rr = r[rows]
    nodes = (rr[:, None] * x[None, :]).ravel()
    order = np.argsort(nodes, kind="stable")
    vals_n = np.empty((nodes.size, cols.size), dtype=ders.dtype)
    vals_n[order], _ = phi_table(model, lams[cols], nodes[order])
    vals_n = vals_n.reshape(rr.size, x.size, cols.size)
    ratio = np.exp(model.log_A(nodes).reshape(rr.size, x.size) - a * np.log(x)[None, :] - model.log_A(rr)[:, None])
    integral = np.einsum("j,ij,ijk->ik", w, ratio, vals_n)
    fresh = -(mu[cols][None, :] * rr[:, None]) * integral
    if not np.iscomplexobj(ders):
        fresh = fresh.real
    sub = mask[np.ix_(rows, cols)]
    block = ders[np.ix_(rows, cols)]
    ders[np.ix_(rows, cols)] = np.where(sub, fresh, block)


def _sorted_unique(r: FloatArray) -> tuple[FloatArray, npt.NDArray[np.int64]]:
    u, inv = np.unique(r, return_inverse=True)
    return u, inv


def project_phi(model: DensityModel, lams: FloatArray, r: FloatArray, W: FloatArray) -> FloatArray:
    """``P[j, c] = sum_i W[i, c] phi_{lam_j}(r_i)`` for real ``lams``.

    ``r`` must be strictly increasing and non-negative.  Memory use is
    independent of ``len(r) * len(lams)``.
    """
    lams = np.asarray(lams, dtype=float)
    r, r_pos, zero = _split_grid(r)
    W = np.asarray(W, dtype=float).reshape(r.size, -1)
    out = np.zeros((lams.size, W.shape[1]))
    if np.any(zero):
        out += W[zero].sum(axis=0)[None, :]
    if r_pos.size == 0 or lams.size == 0:
        return out
    L = lams**2
    mesh, r0 = _forward(model, r_pos, float(L.max()) + model.rho**2)
    Wp = W[~zero] * np.exp(-0.5 * model.log_A(r_pos))[:, None]
    v0, dv0 = _launch(model, L, r0)
    out += mg.project_real(mesh.coeffs, L, v0, dv0, mesh.out_idx, np.ascontiguousarray(Wp), False)
    return out


def synth_phi(
    model: DensityModel, lams: FloatArray, coef: FloatArray, r: FloatArray, want_deriv: bool = False
) -> tuple[FloatArray, FloatArray | None]:
    """``S[i, c] = sum_j coef[j, c] phi_{lam_j}(r_i)`` (and the r-derivative).

    ``r`` must be strictly increasing and non-negative.
    """
    lams = np.asarray(lams, dtype=float)
    r, r_pos, zero = _split_grid(r)
    coef = np.asarray(coef, dtype=float).reshape(lams.size, -1)
    S = np.zeros((r.size, coef.shape[1]))
    SD = np.zeros_like(S) if want_deriv else None
    if np.any(zero):
        S[zero] = coef.sum(axis=0)[None, :]
    if r_pos.size == 0 or lams.size == 0:
        return S, SD
    L = lams**2
    mesh, r0 = _forward(model, r_pos, float(L.max()) + model.rho**2)
    v0, dv0 = _launch(model, L, r0)
    Sv, Sd = mg.synth_real(mesh.coeffs, L, v0, dv0, mesh.out_idx, np.ascontiguousarray(coef), want_deriv)
    scale = np.exp(-0.5 * model.log_A(r_pos))[:, None]
    S[~zero] = Sv * scale
    if want_deriv:
        p = model.logderiv(r_pos)[:, None]
        SD[~zero] = (Sd - 0.5 * p * Sv) * scale
    return S, SD


def weighted_norms(model: DensityModel, lams: FloatArray, r: FloatArray, w: FloatArray) -> FloatArray:
    """``sum_i w_i phi_{lam_j}(r_i)^2 A(r_i)`` for real ``lams`` (strictly increasing ``r``)."""
    lams = np.asarray(lams, dtype=float)
    r, r_pos, zero = _split_grid(r)
    w = np.asarray(w, dtype=float)[~zero]
    L = lams**2
    mesh, r0 = _forward(model, r_pos, float(L.max()) + model.rho**2)
    v0, dv0 = _launch(model, L, r0)
    return mg.project_real(mesh.coeffs, L, v0, dv0, mesh.out_idx, np.ascontiguousarray(w[:, None]), True)[:, 0]


# ----------------------------------------------------------------------
def eval_phi(model: DensityModel, lam: complex, r_grid: npt.ArrayLike) -> EigenFunction:
    """Regular eigenfunction ``phi_lam`` with ``phi_lam(0) = 1`` on ``r_grid``."""
    r = np.asarray(r_grid, dtype=float)
    if r.size and r.max() > 100.0 / model.scale * (1 + 1e-12):
        raise DomainError("grid extends beyond r = 100/scale")
    vals, ders = phi_table(model, np.array([lam]), r, exact_small_r=True)
    return EigenFunction(complex(lam), r, vals[:, 0].astype(complex), ders[:, 0].astype(complex))


def _seed_log(model: DensityModel, lam: complex, r_start: float) -> tuple[complex, complex]:
    la = float(model.log_A(np.array([r_start]))[0])
    p = float(model.logderiv(np.array([r_start]))[0])
    k = 1j * lam - model.rho
    logv = 0.5 * la + k * r_start
    return logv, 0.5 * p + k


def _jost_values(model: DensityModel, lam: complex, r: FloatArray, r_start: float):
    """Liouville values of Phi_lam at radii ``r`` (descending), scaled as exp(E) * V."""
    logv, ratio = _seed_log(model, lam, r_start)
    nodes, idx = mg.backward_mesh(r_start, r, _mesh_h(model))
    C = mg.step_coefficients(nodes, model.liouville_potential)
    L = np.array([complex(lam) ** 2])
    v0 = np.array([1.0 + 0j])
    dv0 = np.array([complex(ratio)])
    V, D, E = mg.collect_complex(C, L, v0, dv0, idx)
    return V[:, 0], D[:, 0], E[:, 0] + logv.real, logv.imag


def eval_phi_asymptotic(
    model: DensityModel, lam: complex, r_grid: npt.ArrayLike, r_start: float
) -> EigenFunction:
    """Jost-type solution ``Phi_lam`` seeded by ``exp((i lam - rho) r)`` at ``r_start``.

    Only the positive part of ``r_grid`` is returned (Phi is singular at 0
    in general).
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("Phi_lam needs lam != 0")
    _check_strip(model, np.array([lam]))
    r = np.asarray(r_grid, dtype=float)
    r = r[r > 0]
    if r.size == 0 or r.max() > r_start * (1 + 1e-14):
        raise DomainError("grid must be positive and below r_start")
    if math.exp(-2.0 * model.scale * r_start) > 1e-10:
        warnings.warn("r_start may be too small for the asymptotic regime", stacklevel=2)
    order = np.argsort(-r, kind="stable")
    V, D, E, phase = _jost_values(model, lam, r[order], r_start)
    half = 0.5 * model.log_A(r[order])
    p = model.logderiv(r[order])
    fac = np.exp(E - half + 1j * phase)
    vals = np.empty(r.size, dtype=complex)
    ders = np.empty(r.size, dtype=complex)
    vals[order] = V * fac
    ders[order] = (D - 0.5 * p * V) * fac
    return EigenFunction(lam, r, vals, ders)


def _default_r_start(model: DensityModel, r_match: float) -> float:
    return max(r_match, 20.0 / model.scale)


def _c_wronskian(model: DensityModel, lam: complex, r_match: float, r_start: float) -> complex:
    """c(lam) as ``W_A[phi_lam, Phi_-lam] / W_A[Phi_lam, Phi_-lam]`` at ``r_match``."""
    rm = np.array([r_match])
    phi_v, phi_d = phi_table(model, np.array([lam]), rm)
    half = 0.5 * float(model.log_A(rm)[0])
    p = float(model.logderiv(rm)[0])
    # phi in Liouville form, scaled by exp(-half) to stay O(1)
    pv = complex(phi_v[0, 0])
    pd = complex(phi_d[0, 0]) + 0.5 * p * pv

    def jost(sign: int):
        if r_match == r_start:
            logv, ratio = _seed_log(model, sign * lam, r_start)
            return 1.0 + 0j, complex(ratio), logv
        V, D, E, phase = _jost_values(model, sign * lam, rm, r_start)
        return complex(V[0]), complex(D[0]), E[0] + 1j * phase

    Pv, Pd, lp = jost(+1)
    Mv, Md, _ = jost(-1)
    # Liouville values carry factors exp(half) (phi), exp(lp) and exp(lm);
    # exp(lm) cancels in the ratio
    w_phi_m = pv * Md - pd * Mv
    w_p_m = Pv * Md - Pd * Mv
    return complex(w_phi_m / w_p_m * np.exp(half - lp))


def compute_c(
    model: DensityModel, lam: complex, r_match: float | None = None, r_start: float | None = None
) -> CFunctionValue:
    """c(lam) from weighted Wronskians at ``r_match``.

    ``W_A[u, v] = A (u v' - u' v)`` equals the plain Wronskian of the
    Liouville functions ``sqrt(A) u`` and ``sqrt(A) v``.  Off the real axis
    the Plancherel weight is continued as ``1 / (c(lam) c(-lam))``.
    """
    lam = complex(lam)
    if abs(lam) < LAMBDA_SINGULAR * model.scale:
        raise SingularError("c(lam) degenerates at lam = 0; extrapolate the weight instead")
    if abs(lam.imag) >= C_IMAG_FRACTION * model.scale:
        raise DomainError("c(lam) extraction needs |Im lam| < 0.9 * scale")
    if r_match is None:
        r_match = 20.0 / model.scale
    if r_start is None:
        r_start = _default_r_start(model, r_match)
    if r_match > r_start:
        raise DomainError("r_match must not exceed r_start")
    _check_strip(model, np.array([lam]))
    c = _c_wronskian(model, lam, r_match, r_start)
    if lam.imag == 0:
        weight: float | complex = 1.0 / abs(c) ** 2
    else:
        weight = complex(1.0 / (c * _c_wronskian(model, -lam, r_match, r_start)))
    return CFunctionValue(lam, c, weight)


def c_function(model: DensityModel, lams: npt.ArrayLike, r_match: float | None = None) -> ComplexArray:
    """Vectorised c(lam) for real nonzero ``lams`` (Jost solutions seeded at ``r_match``)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if np.any(np.abs(lams) < LAMBDA_SINGULAR * model.scale):
        raise SingularError("c(lam) degenerates at lam = 0")
    if r_match is None:
        r_match = 20.0 / model.scale
    rm = np.array([r_match])
    vals, ders = phi_table(model, lams, rm)
    p = float(model.logderiv(rm)[0])
    pv = vals[0]
    pd = ders[0] + 0.5 * p * pv
    k_minus = -1j * lams - model.rho
    # Phi_{-lam} in Liouville form is exp(h + k_minus r) with h = log(A)/2,
    # so its log-derivative is p/2 + k_minus.  The Wronskians are
    # W[phi, Phi_-] = exp(2h + k_minus r) (pv ratio_m - pd) and
    # W[Phi_+, Phi_-] = -2 i lam exp(2h - 2 rho r); the exp(2h) factors cancel.
    ratio_m = 0.5 * p + k_minus
    num = (pv * ratio_m - pd) * np.exp((-1j * lams + model.rho) * r_match)
    return num / (-2j * lams)


_eta_lock = threading.Lock()
_eta_cache: "OrderedDict[tuple, FloatArray]" = OrderedDict()


def plancherel_density(model: DensityModel, lambda_grid: npt.ArrayLike) -> FloatArray:
    """``|c(lam)|^-2`` on a real grid; nodes at ``lam = 0`` use quadratic extrapolation."""
    lam = np.abs(np.asarray(lambda_grid, dtype=float))
    key = (model.key, lam.size, hash(lam.tobytes()))
    with _eta_lock:
        hit = _eta_cache.get(key)
        if hit is not None:
            return hit.copy()
    small = lam < LAMBDA_SINGULAR * model.scale
    eta = np.empty_like(lam)
    if np.any(~small):
        eta[~small] = 1.0 / np.abs(c_function(model, lam[~small])) ** 2
    if np.any(small):
        d = 0.02 * model.scale
        e = 1.0 / np.abs(c_function(model, np.array([d, 2 * d, 3 * d]))) ** 2
        eta[small] = 3 * e[0] - 3 * e[1] + e[2]
    with _eta_lock:
        _eta_cache[key] = eta
        while len(_eta_cache) > 64:
            _eta_cache.popitem(last=False)
    return eta.copy()


def estimate_strip_width(
    model: DensityModel, lambda_max: float = 6.0, tau_step: float = 0.05, tau_max: float | None = None
) -> float:
    """Lower estimate of the half-width of the strip where eta extends analytically.

    The continuation ``1/(c(lam) c(-lam))`` is evaluated on horizontal lines
    ``Im lam = tau``; the first ``tau`` where it blows up (or becomes
    non-smooth along the line) bounds the first pole from below.  The scan
    stops below ``0.9 * scale`` where the Wronskian extraction stays
    reliable, so models without a nearby pole report that cap.  The result
    is an estimate, not a proof.
    """
    limit = C_IMAG_FRACTION * model.scale
    tau_max = limit if tau_max is None else min(tau_max, limit)
    xs = np.linspace(0.0, lambda_max, 25)
    last_ok = 0.0
    base = None
    for tau in np.arange(tau_step, tau_max + 1e-12, tau_step):
        try:
            w = np.array([compute_c(model, x + 1j * tau).plancherel_weight for x in xs])
        except (SingularError, DomainError, FloatingPointError, ZeroDivisionError):
            break
        mag = np.max(np.abs(w))
        if base is None:
            base = mag
        if not np.all(np.isfinite(w)) or mag > 1e6 * max(base, 1.0):
            break
        last_ok = float(tau)
    return last_ok


# ----------------------------------------------------------------------
@dataclass
class DirichletBasis:
    """Dirichlet eigenfunctions of the radial Laplacian on ``[0, R_dom]``.

    ``norms`` holds ``int_0^R phi_k^2 A dr``.  The ``basis`` samples are
    produced lazily on ``r_grid``.
    """

    model: DensityModel
    domain_radius: float
    eigen_lambdas: FloatArray
    norms: FloatArray
    r_grid: FloatArray
    _basis: list[EigenFunction] | None = field(default=None, repr=False)

    @property
    def eigenvalues(self) -> FloatArray:
        """``mu_k = lam_k^2 + rho^2``."""
        return self.eigen_lambdas**2 + self.model.rho**2

    @property
    def basis(self) -> list[EigenFunction]:
        if self._basis is None:
            vals, ders = phi_table(self.model, self.eigen_lambdas, self.r_grid)
            self._basis = [
                EigenFunction(complex(l), self.r_grid, vals[:, k].astype(complex), ders[:, k].astype(complex))
                for k, l in enumerate(self.eigen_lambdas)
            ]
        return self._basis


def _phi_at_R(model: DensityModel, lams: FloatArray, R: float) -> FloatArray:
    vals, _ = phi_table(model, lams, np.array([R]))
    return vals[0]


def _refine_roots(model, R, lo, hi, flo, fhi, tol=1e-14, max_iter=200):
    """Vectorised Illinois regula falsi on sign-change brackets."""
    lo, hi, flo, fhi = lo.copy(), hi.copy(), flo.copy(), fhi.copy()
    side = np.zeros(lo.size, dtype=int)
    for _ in range(max_iter):
        width = hi - lo
        active = width > tol * np.maximum(1.0, np.abs(hi))
        if not np.any(active):
            break
        x = np.where(fhi != flo, (lo * fhi - hi * flo) / (fhi - flo), 0.5 * (lo + hi))
        bad = ~((x > lo) & (x < hi))
        x = np.where(bad, 0.5 * (lo + hi), x)
        fx = np.zeros_like(x)
        fx[active] = _phi_at_R(model, x[active], R)
        left = active & (np.sign(fx) == np.sign(flo))
        right = active & ~left
        exact = active & (fx == 0)
        lo = np.where(left, x, lo)
        flo = np.where(left, fx, flo)
        fhi = np.where(left & (side == -1), 0.5 * fhi, fhi)
        hi = np.where(right, x, hi)
        fhi = np.where(right, fx, fhi)
        flo = np.where(right & (side == 1), 0.5 * flo, flo)
        side = np.where(left, -1, np.where(right, 1, side))
        lo = np.where(exact, x, lo)
        hi = np.where(exact, x, hi)
    return 0.5 * (lo + hi)


def dirichlet_spectrum(model: DensityModel, R_dom: float, K: int, n_grid: int = 401) -> DirichletBasis:
    """First ``K`` Dirichlet eigenpairs of the radial Laplacian on the ball ``[0, R_dom]``."""
    if not R_dom > 0 or K < 1:
        raise DomainError("need R_dom > 0 and K >= 1")
    lam_hi = (K + 1) * math.pi / R_dom + 2.0 * model.scale
    step = math.pi / (4.0 * R_dom)
    for _ in range(7):
        grid = np.arange(0.0, lam_hi + step, step)
        f = _phi_at_R(model, grid, R_dom)
        change = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
        if change.size >= K:
            break
        step *= 0.5
    else:
        raise RootError(f"found only {change.size} of {K} Dirichlet roots")
    change = change[:K]
    lams = _refine_roots(model, R_dom, grid[change], grid[change + 1], f[change], f[change + 1])
    # each root must sit inside its interlacing window
    k = np.arange(1, K + 1)
    lo_win = np.maximum(0.0, (k - 1) * math.pi / R_dom - 2.0 * model.scale)
    hi_win = (k + 1) * math.pi / R_dom + 2.0 * model.scale
    if np.any((lams < lo_win) | (lams > hi_win)):
        raise RootError("a Dirichlet root fell outside its expected window")
    norms = dirichlet_norms(model, lams, R_dom)
    r_grid = np.linspace(0.0, R_dom, n_grid)
    return DirichletBasis(model, float(R_dom), lams, norms, r_grid)


def dirichlet_norms(model: DensityModel, lams: FloatArray, R_dom: float) -> FloatArray:
    """``int_0^R phi^2 A dr`` by corrected trapezoid sums of ``(sqrt(A) phi)^2``."""
    lam_top = float(np.max(lams)) if np.size(lams) else 1.0
    n = int(math.ceil(R_dom * max(lam_top, model.scale) / 0.1)) + 1
    n = max(n, 2001)
    r = np.linspace(0.0, R_dom, n)
    w = uniform_weights(n, r[1] - r[0])
    return weighted_norms(model, np.asarray(lams, dtype=float), r, w)
