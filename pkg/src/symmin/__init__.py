"""Numerical verification of complex-valued eigenfunctions on the classical
compact symmetric spaces and of the minimality of their zero fibres."""

from symmin.catalog import EigenfunctionSpec, build, evaluate, validate
from symmin.groups import GroupId, SpaceDescriptor, haar_sample, space
from symmin.operators import DerivativeEngine, conformality, tension_field

__version__ = "0.1.0"

__all__ = [
    "DerivativeEngine",
    "EigenfunctionSpec",
    "GroupId",
    "SpaceDescriptor",
    "build",
    "conformality",
    "evaluate",
    "haar_sample",
    "space",
    "tension_field",
    "validate",
]
