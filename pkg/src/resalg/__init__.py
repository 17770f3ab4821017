"""Symbolic and numerical toolkit for resolvent algebras on symplectic spaces."""

from resalg import cohomology, expr, fock, symplectic, verify

__all__ = ["cohomology", "expr", "fock", "symplectic", "verify"]
__version__ = "0.1.0"
