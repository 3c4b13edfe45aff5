"""Numerical checks for spinor and differential-form operator identities."""
from .algebra import Multivector, Signature
from .fields import FormField, SpinorField
from .gauge import GaugePotential
from .geometry import ConstantCurvature, Flat, make_geometry
from .operators import Context, EquationId, OperatorSpec, OpKind, apply, pipeline, residual

__version__ = "0.1.0"

__all__ = [
    "ConstantCurvature", "Context", "EquationId", "Flat", "FormField", "GaugePotential",
    "Multivector", "OpKind", "OperatorSpec", "Signature", "SpinorField", "apply",
    "make_geometry", "pipeline", "residual",
]
