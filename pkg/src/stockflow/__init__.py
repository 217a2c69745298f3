"""Stock-flow modeling: a units-checked model language, continuous-time
simulation, feedback-loop analysis, and a what-if HTTP service."""

from .analysis import (
    CausalEdge,
    CausalGraph,
    EquilibriumPoint,
    FeedbackLoop,
    LoopReport,
    build_causal_graph,
    enumerate_loops,
    solve_linear_equilibrium,
)
from .core import (
    CompiledModel,
    Element,
    Kind,
    ModelDefinition,
    compile_model,
    list_states,
    validate_model,
)
from .engine import RunResult, RunSpec, detect_equilibrium, lookup_eval, simulate
from .errors import (
    AlgebraicLoopError,
    AmbiguousTimeUnitError,
    BadTableError,
    BadUnitsError,
    DuplicateNameError,
    LoopExplosionError,
    ModelError,
    NoCrossingError,
    NonTimeConstantError,
    NumericFaultError,
    ParseError,
    SourceSpan,
    UnitMismatchError,
    UnknownReferenceError,
)
from .language import parse_model, render_model
from .units import DIMENSIONLESS, UnitExpr, UnitReport, check_units, time_unit

__version__ = "0.1.0"

__all__ = [
    "AlgebraicLoopError", "AmbiguousTimeUnitError", "BadTableError", "BadUnitsError",
    "CausalEdge", "CausalGraph", "CompiledModel", "DIMENSIONLESS", "DuplicateNameError",
    "Element", "EquilibriumPoint", "FeedbackLoop", "Kind", "LoopExplosionError",
    "LoopReport", "ModelDefinition", "ModelError", "NoCrossingError",
    "NonTimeConstantError", "NumericFaultError", "ParseError", "RunResult", "RunSpec",
    "SourceSpan", "UnitExpr", "UnitMismatchError", "UnitReport", "UnknownReferenceError",
    "build_causal_graph", "check_units", "compile_model", "detect_equilibrium",
    "enumerate_loops", "list_states", "lookup_eval", "parse_model", "render_model",
    "simulate", "solve_linear_equilibrium", "time_unit", "validate_model",
]
