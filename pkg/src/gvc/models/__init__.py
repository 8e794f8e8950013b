"""Shipped field theories and the model-file loader."""

from .base import ALGEBRAS, Algebra, FieldModel, get_algebra, validate_algebra
from .builders import bf_theory, chern_simons_3d, chern_simons_primed_identity, maxwell, yang_mills

__all__ = [
    "ALGEBRAS",
    "Algebra",
    "FieldModel",
    "bf_theory",
    "chern_simons_3d",
    "chern_simons_primed_identity",
    "get_algebra",
    "maxwell",
    "validate_algebra",
    "yang_mills",
]
