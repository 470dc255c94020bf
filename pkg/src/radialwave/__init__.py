"""Numerical laboratory for the shifted wave equation on radial densities.

The package works with a volume density ``A(r)`` of geodesic spheres and
everything built from it: the radial eigenfunctions ``phi_lam``, the radial
Fourier and Abel transforms, spherical means, four independent solvers for
``u_tt = L_A u + rho^2 u`` and diagnostics for Huygens-type decay,
equipartition and Paley-Wiener bounds.
"""

from .density import (
    DensityModel,
    eval_density,
    hyperbolic_model,
    make_jacobi_model,
    make_table_model,
    validate_conditions,
)
from .eigen import (
    DirichletBasis,
    c_function,
    compute_c,
    dirichlet_spectrum,
    eval_phi,
    eval_phi_asymptotic,
    plancherel_density,
)
from .errors import RadialWaveError
from .meanvalue import asgeirsson_residual, spherical_mean
from .quadrature import LambdaGrid, make_lambda_grid
from .transforms import (
    RadialFunction,
    SpectralFunction,
    abel,
    bump,
    dual_abel,
    forward_radial_fourier,
    inverse_dual_abel,
    inverse_radial_fourier,
    radial_grid,
)
from .wave import (
    CauchyData,
    WaveState,
    bump_data,
    energy,
    propagate_dalembert,
    propagate_fdtd,
    propagate_series,
    propagate_spectral,
)

__all__ = [
    "CauchyData",
    "DensityModel",
    "DirichletBasis",
    "LambdaGrid",
    "RadialFunction",
    "RadialWaveError",
    "SpectralFunction",
    "WaveState",
    "abel",
    "asgeirsson_residual",
    "bump",
    "bump_data",
    "c_function",
    "compute_c",
    "dirichlet_spectrum",
    "dual_abel",
    "energy",
    "eval_density",
    "eval_phi",
    "eval_phi_asymptotic",
    "forward_radial_fourier",
    "hyperbolic_model",
    "inverse_dual_abel",
    "inverse_radial_fourier",
    "make_jacobi_model",
    "make_lambda_grid",
    "make_table_model",
    "plancherel_density",
    "propagate_dalembert",
    "propagate_fdtd",
    "propagate_series",
    "propagate_spectral",
    "radial_grid",
    "spherical_mean",
    "validate_conditions",
]
