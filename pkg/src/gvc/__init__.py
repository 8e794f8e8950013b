"""Exact symbolic checks for Grassmann-graded Lagrangian field theory on jet bundles."""

from . import errors
from .kernel import GradedExpr, JetVar, Parity, Role, Signature, SymbolDecl

__version__ = "0.1.0"

__all__ = ["errors", "GradedExpr", "JetVar", "Parity", "Role", "Signature", "SymbolDecl", "__version__"]
