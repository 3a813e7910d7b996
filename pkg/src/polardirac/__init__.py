"""Exact square-integrable solutions of the free Dirac equation in polar form."""

__version__ = "0.1.0"

from .model import Branch, ModelParams, PolarPoint, GridSpec, validate_params, derived_scales, make_grid
from .fields import field_sample, module_squared, x_profile, z_profile, v_potential
from .junction import solve_mass, junction_params, continuity_report
from .quadrature import norm_integral, separated_upper_bound

__all__ = [
    "Branch",
    "ModelParams",
    "PolarPoint",
    "GridSpec",
    "validate_params",
    "derived_scales",
    "make_grid",
    "field_sample",
    "module_squared",
    "x_profile",
    "z_profile",
    "v_potential",
    "solve_mass",
    "junction_params",
    "continuity_report",
    "norm_integral",
    "separated_upper_bound",
]
