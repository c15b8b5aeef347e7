"""Toolkit for the discrete logarithmic Minkowski problem.

Given finitely many unit normals with positive weights, decide whether the
weights are the cone-volume measure of a polytope containing the origin in
its interior, and if so construct one.
"""
from .errors import (ConditionError, ConvergenceError, DomainError, GeometryError,
                     HemisphereError, InvalidMeasureError, LogMinkError,
                     ResourceGuardError)
from .geometry import Polytope, cone_volume_measure, from_halfspaces, from_support
from .logcenter import log_center
from .measure import DiscreteMeasure, Verdict, classify_concentration
from .solver import SolveOptions, residual, solve_strict
from .splitter import solve

__all__ = [
    "ConditionError", "ConvergenceError", "DiscreteMeasure", "DomainError",
    "GeometryError", "HemisphereError", "InvalidMeasureError", "LogMinkError",
    "Polytope", "ResourceGuardError", "SolveOptions", "Verdict",
    "classify_concentration", "cone_volume_measure", "from_halfspaces",
    "from_support", "log_center", "residual", "solve", "solve_strict",
]
__version__ = "0.1.0"
