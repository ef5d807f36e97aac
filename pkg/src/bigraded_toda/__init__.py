"""Symbolic and numeric toolkit for the extended bigraded Toda hierarchy."""
from .algebra import AlgebraElement, DiffAlgebra, GeneratorId, NotExact, TruncationMismatch
from .dispersionless import (
    DegenerateCritical,
    HydroBracket,
    LambdaFunction,
    SingularSample,
    check_metric_inverse,
    check_quasihomogeneity,
    dispersionless_bracket,
    generating_function_check,
)
from .hamiltonian import HamiltonianStructure
from .lax import FlowIndex, InconsistentFlow, LaxHierarchy, hierarchy
from .operators import DiffDiffOperator, DifferenceOperator, EmptyWindow, WindowError
from .reports import CheckReport, summarize
from .roots import aberth
from .tau import TauStructure

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "CheckReport",
    "DegenerateCritical",
    "DiffAlgebra",
    "DiffDiffOperator",
    "DifferenceOperator",
    "EmptyWindow",
    "FlowIndex",
    "GeneratorId",
    "HamiltonianStructure",
    "HydroBracket",
    "InconsistentFlow",
    "LambdaFunction",
    "LaxHierarchy",
    "NotExact",
    "SingularSample",
    "TauStructure",
    "TruncationMismatch",
    "WindowError",
    "aberth",
    "check_metric_inverse",
    "check_quasihomogeneity",
    "dispersionless_bracket",
    "generating_function_check",
    "hierarchy",
    "summarize",
]
