"""Solid-angle polynomials, Ehrhart quasipolynomials and valuation numerators."""
from .angle import (
    DEFAULT_POLICY,
    AngleValue,
    AomotoInput,
    EnginePolicy,
    aomoto_angle,
    aomoto_calibration_report,
    cone_angle,
    face_angle,
    girard_angle,
    monte_carlo_angle,
    prism_angle_bound_check,
    solid_angle,
)
from .ehrhart import NumeratorVector, QuasiPolynomial, TheoremViolation, fit_ehrhart, hstar
from .estimators import EhrhartPolynomial, SolidAnglePolynomial, check_polytope
from .families import FamilySpec, build
from .polytope import PointedCone, Polytope, lattice_points, tangent_cone
from .rational_linalg import Polynomial
from .solidpoly import (
    brianchon_gram_residual,
    fit_solid,
    numerator,
    period_report,
    vertex_sum,
)
from .valuation import (
    IndicatorValuation,
    SolidAngleValuation,
    g_numerator,
    monotonicity_compare,
    parallelepiped_numerator,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
