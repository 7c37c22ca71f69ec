"""Spectral laboratory for magnetic leaky wires: (i∇+A)² − αδ_Γ on a locally deformed line."""

__version__ = "0.1.0"

from .errors import ConfigError, SolverError
from .geometry import CurveSpec, arc_length_weights, eval_gamma, gamma_prime_sup, validate_curve
from .grid import GridSpec
from .magnetic import FieldSpec, eval_B, flux, landau_A, validate_field

__all__ = [
    "ConfigError",
    "CurveSpec",
    "FieldSpec",
    "GridSpec",
    "SolverError",
    "arc_length_weights",
    "eval_B",
    "eval_gamma",
    "flux",
    "gamma_prime_sup",
    "landau_A",
    "validate_curve",
    "validate_field",
]
