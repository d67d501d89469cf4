"""Numerical laboratory for noncommutative planar kinematics.

Truncated Hermite-basis realizations of the planar kinematical algebra,
its twisted convolution algebra, Moyal-type star products, Landau-level
Dirac operators, and localized gauge perturbations with their resolvent
limits.
"""

from .basis import (
    BasisTruncation,
    OperatorMatrix,
    QuadratureGrid,
    build_1d_ops,
    hermite_eval,
    inner_product,
    lift_2d,
)
from .errors import NCPlaneError, RangeError, ResolutionError, ScaleError, ValidationError
from .params import CANONICAL, ParameterSet, canonical_params

__all__ = [
    "BasisTruncation",
    "OperatorMatrix",
    "QuadratureGrid",
    "build_1d_ops",
    "hermite_eval",
    "inner_product",
    "lift_2d",
    "NCPlaneError",
    "RangeError",
    "ResolutionError",
    "ScaleError",
    "ValidationError",
    "CANONICAL",
    "ParameterSet",
    "canonical_params",
]

__version__ = "0.1.0"
