"""Two-interval minimizers of interaction energies with Riesz-type repulsion.

The energy with kernel ``-|x|^b/b`` (1 < b < 2) and confinement ``x^4/4``
is minimized by a density on ``[-R2, -R1] U [R1, R2]``.  It is computed
from signed Riesz steady states ``mu_lambda`` on ``[-1, -lambda] U [lambda, 1]``
(kernel ``|x|^{-s}``, ``s = 2 - b``), the iterated balayage sequence, and
the root of the gap functional ``F``.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .balayage import (
    SolveConfig,
    balayage_onto,
    balayage_point,
    equilibrium_measure,
    min_smooth_factor,
    residual,
    solve_mu_lambda,
    solve_on_intervals,
)
from .exceptions import ConsistencyError, DomainError, SolverError
from .iba import (
    F_of_lambda,
    IbaTrace,
    MinimizerResult,
    assemble_minimizer,
    find_lambda_star,
    next_lambda,
    run_iba,
    verify_euler_lagrange,
)
from .measures import (
    EdgeDensity,
    Interval,
    SignedMeasure,
    field_V,
    gauss_jacobi,
    original_potential,
    potential,
    total_mass,
)
from .oracle import ParticleSystem, descend, discrete_energy, empirical_support
from .special import (
    RieszParams,
    balayage_point_interval,
    equilibrium_interval,
    gamma_fn,
    kelvin_point_balayage,
    mu0_exact,
)

__all__ = [
    "BACKEND", "ConsistencyError", "DomainError", "EdgeDensity", "F_of_lambda", "IbaTrace", "Interval",
    "MinimizerResult", "ParticleSystem", "RieszParams", "SignedMeasure", "SolveConfig", "SolverError",
    "assemble_minimizer", "balayage_onto", "balayage_point", "balayage_point_interval", "descend",
    "discrete_energy", "empirical_support", "equilibrium_interval", "equilibrium_measure", "field_V",
    "find_lambda_star", "gamma_fn", "gauss_jacobi", "kelvin_point_balayage", "min_smooth_factor", "mu0_exact",
    "next_lambda", "original_potential", "potential", "residual", "run_iba", "solve_mu_lambda",
    "solve_on_intervals", "total_mass", "verify_euler_lagrange",
]
