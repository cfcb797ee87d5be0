"""Maximal graphs in Lorentz-Minkowski space with prescribed light-cone singularities.

Radial fundamental solutions, mollified sources, a P1 finite-element energy
minimizer on discs, and numerical checks of the qualitative theory.
"""

from .core import (ConefieldError, ContractError, Dimension, DimensionError, DomainError,
                   InfeasibleFieldError, LightSegment, LocationError, NotApplicable, Pole,
                   PoleConfig, min_pole_gap)
from .mesh import DiscMesh, ScalarField, build_mesh, integrate
from .mollifier import Mollifier, SourceField, assemble_source, eta_n
from .radial import (RadialProfile, RadialSource, fundamental_profile, phi, phi_2d,
                     phi_grad_mag, phi_nd, radial_dirichlet)
from .solver import (SolveResult, SolverConfig, energy, energy_gradient, solve_dirac_ladder,
                     solve_dirichlet)

__version__ = "0.1.0"

__all__ = [
    "ConefieldError", "ContractError", "Dimension", "DimensionError", "DomainError",
    "InfeasibleFieldError", "LightSegment", "LocationError", "NotApplicable", "Pole",
    "PoleConfig", "min_pole_gap", "DiscMesh", "ScalarField", "build_mesh", "integrate",
    "Mollifier", "SourceField", "assemble_source", "eta_n", "RadialProfile", "RadialSource",
    "fundamental_profile", "phi", "phi_2d", "phi_grad_mag", "phi_nd", "radial_dirichlet",
    "SolveResult", "SolverConfig", "energy", "energy_gradient", "solve_dirac_ladder",
    "solve_dirichlet",
]
