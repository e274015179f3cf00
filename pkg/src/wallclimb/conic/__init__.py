"""Convex problem container, continuous backend, and branch-and-bound."""

from .backend import solve_continuous
from .bnb import solve_micp
from .problem import (
    ConicProblem,
    ProblemBuilder,
    SecondOrderCone,
    SolveResult,
    SolveStats,
    big_m_encode,
    required_big_m,
)

__all__ = [
    "ConicProblem",
    "ProblemBuilder",
    "SecondOrderCone",
    "SolveResult",
    "SolveStats",
    "big_m_encode",
    "required_big_m",
    "solve_continuous",
    "solve_micp",
]
