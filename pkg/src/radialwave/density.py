"""Radial density functions A(r) and the quantities derived from them.

A rank-one harmonic manifold is represented here only through its radial
density ``A(r)`` (the geodesic sphere volume density, up to a constant), the
exponential growth rate ``rho`` and a dimension surrogate ``n``.  Two kinds
of density are supported:

* Jacobi models ``A(r) = (2 sinh(s r)/s)**(2a+1) * (2 cosh(s r))**(2b+1)``
  with parameters ``(alpha, beta, scale)``.  Real hyperbolic space H^3 is
  ``(1/2, -1/2, 1)``, H^4 is ``(1, -1/2, 1)``.
* Tabulated models built from samples ``(r_i, A_i)``.  They are interpolated
  as ``A(r) = r**a * B(r)`` with a monotone cubic interpolant of ``log B``.

Everything downstream works with the logarithm of ``A`` because ``A`` grows
like ``exp(2 rho r)`` and overflows quickly for the larger models.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, DomainError, InterpolationError

FloatArray = npt.NDArray[np.float64]

_LOG2 = math.log(2.0)


def sphere_area(n: float) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n (real ``n`` allowed)."""
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def _log_sinh(x: FloatArray) -> FloatArray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > 20.0
    out[big] = x[big] - _LOG2 + np.log1p(-np.exp(-2.0 * x[big]))
    out[~big] = np.log(np.sinh(x[~big]))
    return out


def _log_cosh(x: FloatArray) -> FloatArray:
    x = np.abs(np.asarray(x, dtype=float))
    return x - _LOG2 + np.log1p(np.exp(-2.0 * x))


@dataclass(frozen=True)
class TableData:
    """Samples of a tabulated density, kept alongside its interpolant."""

    r: tuple[float, ...]
    A: tuple[float, ...]


@dataclass(frozen=True)
class DensityModel:
    """Immutable description of a radial density.

    ``alpha`` and ``beta`` are the Jacobi indices (for tables ``alpha`` is
    recovered from the small-r power law and ``beta`` is ``nan``).  The
    manifold volume element of a radial integral is ``sphere_const * A(r) dr``.
    """

    kind: str
    alpha: float
    beta: float
    scale: float
    dim_n: int
    rho: float
    sphere_const: float
    non_integer_dim: bool = False
    table: TableData | None = None
    kappa_inf: float = 1.0
    _interp: PchipInterpolator | None = field(default=None, compare=False, repr=False)

    # ------------------------------------------------------------------
    @property
    def exponent(self) -> float:
        """Small-r power ``2 alpha + 1`` of A, also the pole strength of A'/A."""
        return 2.0 * self.alpha + 1.0

    @property
    def small_r_coefficient(self) -> float:
        """Coefficient ``c`` in ``A'(r)/A(r) = c / r + O(r)`` near the origin."""
        return self.exponent

    @property
    def key(self) -> str:
        """Stable identifier used for caching and manifests."""
        if self.kind == "jacobi":
            return f"jacobi(alpha={self.alpha!r},beta={self.beta!r},scale={self.scale!r})"
        digest = hashlib.sha256(
            np.asarray(self.table.r).tobytes() + np.asarray(self.table.A).tobytes()
        ).hexdigest()[:16]
        return f"table({digest})"

    @property
    def r_table_max(self) -> float:
        return math.inf if self.table is None else self.table.r[-1]

    def __hash__(self) -> int:
        return hash(self.key)

    # ------------------------------------------------------------------
    def _check_r(self, r: FloatArray) -> None:
        if np.any(r < 0):
            raise DomainError("radius must be non-negative")
        if self.table is not None and np.any(r > self.table.r[-1] * (1 + 1e-12)):
            raise InterpolationError(
                f"radius beyond the tabulated range r <= {self.table.r[-1]}"
            )

    def log_A(self, r: npt.ArrayLike) -> FloatArray:
        """Natural logarithm of A at positive radii."""
        r = np.asarray(r, dtype=float)
        self._check_r(r)
        if self.kind == "jacobi":
            s, a, b = self.scale, self.alpha, self.beta
            x = s * r
            with np.errstate(divide="ignore"):
                return (2 * a + 1) * (_log_sinh(x) + _LOG2 - math.log(s)) + (2 * b + 1) * (
                    _log_cosh(x) + _LOG2
                )
        with np.errstate(divide="ignore"):
            return self.exponent * np.log(r) + self._interp(self._clip(r))

    def _clip(self, r: FloatArray) -> FloatArray:
        return np.clip(r, self.table.r[0], self.table.r[-1])

    def _logB_derivs(self, r: FloatArray) -> tuple[FloatArray, FloatArray]:
        rc = self._clip(r)
        d1 = self._interp.derivative(1)(rc)
        d2 = self._interp.derivative(2)(rc)
        inside = r >= self.table.r[0]
        return np.where(inside, d1, 0.0), np.where(inside, d2, 0.0)

    def logderiv(self, r: npt.ArrayLike) -> FloatArray:
        """A'(r)/A(r) for r > 0."""
        r = np.asarray(r, dtype=float)
        self._check_r(r)
        with np.errstate(divide="ignore"):
            if self.kind == "jacobi":
                s, a, b = self.scale, self.alpha, self.beta
                x = s * r
                return s * ((2 * a + 1) / np.tanh(x) + (2 * b + 1) * np.tanh(x))
            d1, _ = self._logB_derivs(r)
            return self.exponent / r + d1

    def logderiv_prime(self, r: npt.ArrayLike) -> FloatArray:
        """Derivative of A'/A for r > 0."""
        r = np.asarray(r, dtype=float)
        self._check_r(r)
        if self.kind == "jacobi":
            s, a, b = self.scale, self.alpha, self.beta
            x = s * r
            return s * s * (-(2 * a + 1) / np.sinh(x) ** 2 + (2 * b + 1) / np.cosh(x) ** 2)
        _, d2 = self._logB_derivs(r)
        return -self.exponent / r**2 + d2

    def liouville_potential(self, r: npt.ArrayLike) -> FloatArray:
        """``G(r) = (A'/A)^2/4 + (A'/A)'/2 - rho^2``.

        With ``v = sqrt(A) u`` the eigen equation ``L_A u = -(lam^2 + rho^2) u``
        turns into ``v'' = (G - lam^2) v``.
        """
        r = np.asarray(r, dtype=float)
        if self.kind == "jacobi":
            self._check_r(r)
            s, a, b = self.scale, self.alpha, self.beta
            x = s * r
            return s * s * ((a * a - 0.25) / np.sinh(x) ** 2 - (b * b - 0.25) / np.cosh(x) ** 2)
        p = self.logderiv(r)
        return 0.25 * p * p + 0.5 * self.logderiv_prime(r) - self.rho**2

    def A(self, r: npt.ArrayLike) -> FloatArray:
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            out = np.exp(self.log_A(np.where(r > 0, r, 1.0)))
        return np.where(r > 0, out, 0.0)


# ----------------------------------------------------------------------
def make_jacobi_model(alpha: float, beta: float, scale: float = 1.0) -> DensityModel:
    """Build the Jacobi density with indices ``(alpha, beta)`` and length scale."""
    alpha, beta, scale = float(alpha), float(beta), float(scale)
    if not scale > 0:
        raise DomainError("scale must be positive")
    if not alpha > -0.5:
        raise DomainError("alpha must exceed -1/2")
    if not alpha + beta + 1 > 0:
        raise DomainError("rho = scale*(alpha+beta+1) must be positive")
    n_real = 2 * alpha + 2
    dim_n = int(round(n_real))
    non_int = abs(n_real - dim_n) > 1e-12
    if non_int:
        warnings.warn(f"2*alpha+2 = {n_real} is not an integer", stacklevel=2)
    sphere_const = sphere_area(n_real) / 2.0 ** (2 * alpha + 2 * beta + 2)
    return DensityModel(
        kind="jacobi",
        alpha=alpha,
        beta=beta,
        scale=scale,
        dim_n=max(dim_n, 1),
        rho=scale * (alpha + beta + 1),
        sphere_const=sphere_const,
        non_integer_dim=non_int,
        kappa_inf=scale ** (-(2 * alpha + 1)),
    )


def hyperbolic_model(n: int) -> DensityModel:
    """Real hyperbolic space H^n as a Jacobi model (curvature -1)."""
    return make_jacobi_model(0.5 * n - 1.0, -0.5, 1.0)


def make_table_model(r: npt.ArrayLike, A: npt.ArrayLike, n_fit: int = 5) -> DensityModel:
    """Build a density from samples.

    The small-r exponent ``2 alpha + 1`` is fitted on the first ``n_fit``
    positive samples, ``rho`` is half the logarithmic derivative at the last
    sample.  No admissibility conditions are enforced here; use
    :func:`validate_conditions` to check them.
    """
    r = np.asarray(r, dtype=float)
    A = np.asarray(A, dtype=float)
    if r.ndim != 1 or r.shape != A.shape or r.size < n_fit + 2:
        raise DomainError("table needs matching 1-D arrays with enough samples")
    keep = r > 0
    r, A = r[keep], A[keep]
    if np.any(np.diff(r) <= 0):
        raise DomainError("table radii must be strictly increasing")
    if np.any(A <= 0):
        raise DomainError("table densities must be positive for r > 0")
    logA = np.log(A)
    a = float(np.polyfit(np.log(r[:n_fit]), logA[:n_fit], 1)[0])
    logB = logA - a * np.log(r)
    interp = PchipInterpolator(r, logB, extrapolate=False)
    alpha = 0.5 * (a - 1.0)
    n_real = a + 1.0
    dim_n = max(int(round(n_real)), 1)
    tail_deriv = a / r[-1] + float(interp.derivative(1)(r[-1]))
    rho = 0.5 * tail_deriv
    B0 = math.exp(logB[0])
    sphere_const = sphere_area(n_real) / B0 if n_real > 0 else float("nan")
    kappa = math.exp(logA[-1] - 2 * rho * r[-1])
    return DensityModel(
        kind="table",
        alpha=alpha,
        beta=float("nan"),
        scale=1.0,
        dim_n=dim_n,
        rho=rho,
        sphere_const=sphere_const,
        non_integer_dim=abs(n_real - dim_n) > 1e-6,
        table=TableData(tuple(r.tolist()), tuple(A.tolist())),
        kappa_inf=kappa,
        _interp=interp,
    )


def eval_density(model: DensityModel, r: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Return ``(A(r), A'(r)/A(r))``.

    At ``r = 0`` the density is 0 and the logarithmic derivative is reported
    as ``+inf``; the pole strength is ``model.small_r_coefficient``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radius must be non-negative")
    pos = r_arr > 0
    safe = np.where(pos, r_arr, 1.0)
    A = np.where(pos, model.A(safe), 0.0)
    ld = np.where(pos, model.logderiv(safe), np.inf)
    if np.ndim(r) == 0:
        return float(A), float(ld)
    return A, ld


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the admissibility checks on a density.

    ``increasing``: A is increasing and unbounded on the sampled range.
    ``logderiv_decreasing``: A'/A decreases towards ``2 rho`` with ``rho > 0``.
    ``small_r_power``: log-log slope near 0 equals ``2 alpha + 1``.
    ``potential_integrable``: the integral of ``r |G(r)|`` over ``[0.1, r_max]``
    is finite and its upper half contributes a negligible tail.
    """

    increasing: bool
    logderiv_decreasing: bool
    small_r_power: bool
    potential_integrable: bool
    min_increment_A: float
    max_increment_logderiv: float
    rho_measured: float
    exponent_fit: float
    exponent_expected: float
    potential_integral: float
    potential_tail: float

    @property
    def all_pass(self) -> bool:
        return (
            self.increasing
            and self.logderiv_decreasing
            and self.small_r_power
            and self.potential_integrable
        )


def validate_conditions(model: DensityModel, r_max: float, n_samples: int = 2000) -> ConditionReport:
    """Check the four admissibility conditions numerically on ``(0, r_max]``."""
    if not r_max > 0 or n_samples < 16:
        raise DomainError("need r_max > 0 and at least 16 samples")
    r_max = min(r_max, model.r_table_max)
    r = np.linspace(r_max / n_samples, r_max, n_samples)
    logA = model.log_A(r)
    dlogA = np.diff(logA)
    increasing = bool(np.all(dlogA > 0) and logA[-1] > logA[n_samples // 2])

    ld = model.logderiv(r)
    dld = np.diff(ld)
    tol = 1e-10 * np.maximum(np.abs(ld[1:]), 1.0)
    decreasing = bool(np.all(dld <= tol))
    rho_measured = 0.5 * float(ld[-1])
    ld_ok = decreasing and model.rho > 0 and rho_measured >= model.rho * (1 - 1e-9)

    if model.table is None:
        rs = np.geomspace(1e-4, 1e-2, 64) / model.scale
    else:
        tr = np.asarray(model.table.r)
        rs = tr[: max(5, int(np.searchsorted(tr, 1e-2)))]
    slope = float(np.polyfit(np.log(rs), model.log_A(rs), 1)[0])
    power_ok = abs(slope - model.exponent) <= 1e-4 and model.alpha > -0.5

    r1 = 0.1 / model.scale if model.table is None else max(0.1, model.table.r[0])
    if r1 < r_max:
        rq = np.linspace(r1, r_max, 4 * n_samples + 1)
        integrand = rq * np.abs(model.liouville_potential(rq))
        total = float(simpson(integrand, x=rq))
        half = rq >= 0.5 * (r1 + r_max)
        tail = float(simpson(integrand[half], x=rq[half]))
    else:
        total, tail = 0.0, 0.0
    finite = bool(np.isfinite(total))
    integrable = finite and (tail <= 1e-3 * total or tail <= 1e-10)
    return ConditionReport(
        increasing=increasing,
        logderiv_decreasing=ld_ok,
        small_r_power=power_ok,
        potential_integrable=integrable,
        min_increment_A=float(dlogA.min()),
        max_increment_logderiv=float(dld.max()),
        rho_measured=rho_measured,
        exponent_fit=slope,
        exponent_expected=model.exponent,
        potential_integral=total,
        potential_tail=tail,
    )


# ----------------------------------------------------------------------
def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def model_from_mapping(spec: dict[str, str], base_dir: Path | None = None) -> DensityModel:
    """Build a model from catalog keys (``model``, ``alpha``, ``beta``, ``scale``, ``table``)."""
    kind = spec.get("model", "jacobi").strip().lower()
    try:
        if kind == "jacobi":
            return make_jacobi_model(
                float(spec["alpha"]), float(spec["beta"]), float(spec.get("scale", "1.0"))
            )
        if kind == "table":
            path = Path(spec["table"])
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
            if data.shape[1] != 2:
                raise ConfigError("table file must have two columns r, A")
            return make_table_model(data[:, 0], data[:, 1])
    except KeyError as exc:
        raise ConfigError(f"missing model key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, (ConfigError, DomainError)):
            raise
        raise ConfigError(f"bad model value: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read table: {exc}") from None
    raise ConfigError(f"unknown model kind {kind!r}")


def load_model_catalog(path: str | Path) -> DensityModel:
    """Read a model catalog file made of ``key = value`` lines."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return model_from_mapping(parse_key_values(text), path.parent)
