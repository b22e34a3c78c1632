"""Consistency-based diagnosis over acyclic causal influence graphs.

Model a system as measured/unmeasured variables linked by component-tagged
affine influences, observe some measured values, and the pipeline finds the
minimal component sets that cannot all be working (conflicts) and the minimal
fault sets explaining every conflict (diagnoses) — exactly, over rationals.
"""

from .conflicts import (
    ConflictSet,
    PotentialConflictStructure,
    SearchResult,
    SearchStrategy,
    enumerate_pcs,
    find_minimal_conflicts,
    verify_pcs,
    zero_order_conflicts,
)
from .detection import (
    MisbehaviourReport,
    ObservationError,
    OkModelContradiction,
    detect_misbehaving,
    simulate,
)
from .diagnosis import (
    ComparisonReport,
    Diagnosis,
    compare_diagnosis_sets,
    minimal_hitting_sets,
)
from .equations import (
    DerivationMemo,
    Residual,
    StructureError,
    check_satisfied,
    eval_backward,
    eval_forward,
    format_rational,
    parse_rational,
    solve_structure,
)
from .model import (
    AffineEquation,
    CausalGraph,
    CycleError,
    Influence,
    Measurability,
    ModelError,
    Subgraph,
    UnknownVariableError,
    Variable,
    Violation,
    ancestors,
    descendants,
    make_influence,
    topological_order,
    validate_model,
)
from .oracle import ScaleError, linear_feasible, oracle_conflicts, oracle_hitting_sets
from .restriction import Closure, closure, islands
from .cli import (
    ModelDocument,
    ModelValidationError,
    ParseError,
    RunOptions,
    RunResult,
    main,
    parse_model,
    parse_model_document,
    parse_observations,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "AffineEquation",
    "CausalGraph",
    "Closure",
    "ComparisonReport",
    "ConflictSet",
    "CycleError",
    "DerivationMemo",
    "Diagnosis",
    "Influence",
    "Measurability",
    "MisbehaviourReport",
    "ModelDocument",
    "ModelError",
    "ModelValidationError",
    "ObservationError",
    "OkModelContradiction",
    "ParseError",
    "PotentialConflictStructure",
    "Residual",
    "RunOptions",
    "RunResult",
    "ScaleError",
    "SearchResult",
    "SearchStrategy",
    "StructureError",
    "Subgraph",
    "UnknownVariableError",
    "Variable",
    "Violation",
    "ancestors",
    "check_satisfied",
    "closure",
    "compare_diagnosis_sets",
    "descendants",
    "detect_misbehaving",
    "enumerate_pcs",
    "eval_backward",
    "eval_forward",
    "find_minimal_conflicts",
    "format_rational",
    "islands",
    "linear_feasible",
    "main",
    "make_influence",
    "minimal_hitting_sets",
    "oracle_conflicts",
    "oracle_hitting_sets",
    "parse_model",
    "parse_model_document",
    "parse_observations",
    "parse_rational",
    "run_pipeline",
    "simulate",
    "solve_structure",
    "topological_order",
    "validate_model",
    "verify_pcs",
    "zero_order_conflicts",
]
