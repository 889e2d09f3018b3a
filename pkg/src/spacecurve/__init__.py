"""Space curves through tropical prevarieties, Puiseux series and end games."""

__version__ = "0.1.0"

from .polycore import GaussianRational, ParseError, Polynomial, PolynomialSystem, parse_system
from .geometry import LatticePolytope, newton_polytope, primitive, unimodular_extend
from .tropical import prevariety, system_prevariety, pretropism_rays, interior_membership
from .mixedvol import mixed_volume, degree_bound, degree_decomposition
from .homotopy import Config, run_curve
from .puiseux import certify, extend_series, leading_terms

__all__ = [
    "GaussianRational",
    "ParseError",
    "Polynomial",
    "PolynomialSystem",
    "parse_system",
    "LatticePolytope",
    "newton_polytope",
    "primitive",
    "unimodular_extend",
    "prevariety",
    "system_prevariety",
    "pretropism_rays",
    "interior_membership",
    "mixed_volume",
    "degree_bound",
    "degree_decomposition",
    "Config",
    "run_curve",
    "certify",
    "extend_series",
    "leading_terms",
]
