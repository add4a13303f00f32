"""Interaction energies with attractive-repulsive power-law kernels.

Pairwise energies, closed forms for simplices, cross-polytopes and spheres,
concavity-based lower bounds on the minimal energy, lower bounds on the
simplex transition threshold, and particle minimization with support
diagnostics.
"""

from .energy import (DiscreteMeasure, Params, diameter_bound, energy, energy_d2beta,
                     energy_dbeta, kernel_d2beta, kernel_dbeta, kernel_value)
from .errors import BracketError, DomainError, PropertyViolation, UnsupportedRangeError

__all__ = [
    "DiscreteMeasure", "Params", "diameter_bound", "energy", "energy_d2beta", "energy_dbeta",
    "kernel_d2beta", "kernel_dbeta", "kernel_value",
    "BracketError", "DomainError", "PropertyViolation", "UnsupportedRangeError",
]
