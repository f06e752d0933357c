"""Exact scalars, polynomials, Laurent series and linear algebra."""

from .laurent import (
    DEFAULT_WINDOW,
    LaurentElement,
    PoleOverflow,
    Window,
    WindowMismatch,
    laurent_mul,
    minimal_subtraction,
    r_matrix,
)
from .linalg import DimensionMismatch, ExactMatrix, LinearSolution, exact_rank, rref, scalar_rank, solve_linear
from .poly import MultiPoly, const, poly, symbols
from .scalar import I, Scalar, format_scalar, imag_part, norm, parse_scalar, real_part

__all__ = [
    "DEFAULT_WINDOW",
    "DimensionMismatch",
    "ExactMatrix",
    "I",
    "LaurentElement",
    "LinearSolution",
    "MultiPoly",
    "PoleOverflow",
    "Scalar",
    "Window",
    "WindowMismatch",
    "const",
    "exact_rank",
    "format_scalar",
    "imag_part",
    "laurent_mul",
    "minimal_subtraction",
    "norm",
    "parse_scalar",
    "poly",
    "r_matrix",
    "real_part",
    "rref",
    "scalar_rank",
    "solve_linear",
    "symbols",
]
