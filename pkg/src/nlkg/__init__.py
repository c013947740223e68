"""Numerical laboratory for quadratically coupled nonlinear Klein-Gordon systems."""

from ._backend import BACKEND
from .core import Field, Params, RadialGrid, State, scale_state
from .errors import (
    ConvergenceError,
    DomainError,
    GridMismatchError,
    NumericalFailure,
    ParameterError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "DomainError",
    "Field",
    "GridMismatchError",
    "NumericalFailure",
    "ParameterError",
    "Params",
    "PreconditionError",
    "RadialGrid",
    "State",
    "scale_state",
]
