"""Desk-scale spectral laboratory for Ornstein-Uhlenbeck generators in
gradient form, their Hodge-Dirac operators, and the associated semigroups,
wave groups, and resolvents on Gaussian L^2 spaces."""

from .hermite import (
    BasisTruncation,
    DiracState,
    MultiIndex,
    QuadratureGrid,
    SpectralField,
    SpectralFunction,
    default_grid,
    expand,
    hermite_eval,
    lp_norm,
    synthesize,
    unit_function,
)
from .model import OUModel, isotropic_model, rotated_model
from .operators import (
    OperatorMatrix,
    assemble_companion,
    assemble_dirac,
    assemble_divergence,
    assemble_generator,
    assemble_gradient,
)

__all__ = [
    "BasisTruncation",
    "DiracState",
    "MultiIndex",
    "OperatorMatrix",
    "OUModel",
    "QuadratureGrid",
    "SpectralField",
    "SpectralFunction",
    "assemble_companion",
    "assemble_dirac",
    "assemble_divergence",
    "assemble_generator",
    "assemble_gradient",
    "default_grid",
    "expand",
    "hermite_eval",
    "isotropic_model",
    "lp_norm",
    "rotated_model",
    "synthesize",
    "unit_function",
]
