"""Hyperelliptic sigma and p-functions, and the reduction of a bielliptic genus-3 curve."""

from .bielliptic import BiellipticFamily, build_family
from .curves import INFINITY, CurvePoint, CurveSpec, curve_from_coefficients, curve_from_roots
from .errors import HefError, InvalidInput, NumericalFailure
from .periods import PeriodData, compute_periods
from .reduction import ReductionContext
from .theta_sigma import SigmaEvaluator, theta

__all__ = [
    "BiellipticFamily", "build_family", "INFINITY", "CurvePoint", "CurveSpec", "curve_from_coefficients",
    "curve_from_roots", "HefError", "InvalidInput", "NumericalFailure", "PeriodData", "compute_periods",
    "ReductionContext", "SigmaEvaluator", "theta",
]
