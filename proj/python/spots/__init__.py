"""Sprouts and Nim solvers built on proof-number search with Grundy numbers."""

from ._spots import (
    BudgetExceeded,
    GrundyConflict,
    GrundyDatabase,
    ProtocolError,
    SyntaxError,
    canonical,
    children,
    decompose,
    estimate,
    grundy,
    solve,
    verify,
)

__all__ = [
    "BudgetExceeded",
    "GrundyConflict",
    "GrundyDatabase",
    "ProtocolError",
    "SyntaxError",
    "canonical",
    "children",
    "decompose",
    "estimate",
    "grundy",
    "solve",
    "verify",
]
