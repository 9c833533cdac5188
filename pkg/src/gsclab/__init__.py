"""Workbench for the shared-log consistency model.

A client/server log protocol simulator, an axiomatic checker for the
eight-law specification it implements, a membership decision procedure,
schedule synthesis (completeness direction), per-object composition,
fencing transformations, and linearizability / ordered-sequential
checkers, with litmus fixtures and JSON file formats.
"""

from .axioms import (
    AXIOM_NAMES,
    AxiomReport,
    AxiomVerdict,
    Closure,
    MembershipResult,
    check_axioms,
    decoded_visibility,
    evaluation_context,
    is_gsc,
    minimal_visibility,
)
from .composition import (
    PerObjectWitnesses,
    arbitration_constraints,
    closed_visibility,
    compose,
    composition_precedence,
    union_relations,
)
from .derived import (
    Linearization,
    LinearizationResult,
    check_lin,
    check_osc,
    lin_from_osc_execution,
    osc_execution_from_lin,
)
from .equivalence import to_dual_tso, to_tso
from .fixtures import FIXTURE_NAMES, Fixture, all_fixtures, fixture
from .model import (
    MODELS,
    PULL,
    PUSH,
    AbstractExecution,
    Event,
    History,
    HistoryError,
    Interval,
    Op,
    apply_fence_preset,
    check_fence_preset,
    erase_fences,
    is_well_fenced,
    make_history,
    project,
    rt_from_intervals,
    set_all_fences,
    validate_history,
)
from .protocol import (
    EnumerationCapError,
    Schedule,
    ScheduleError,
    Token,
    World,
    body,
    call,
    can_produce,
    enumerate_histories,
    explore,
    extract_execution,
    extract_history,
    flush_suffix,
    programs_of,
    pull,
    push,
    ret,
    run_schedule,
    run_to_quiescence,
    step,
    validate_schedule,
)
from .relations import CycleError, Relation, TotalOrder, extend_to_total, linear_extensions
from .semantics import REGISTER, SEMANTICS, SEQUENCE, ObjectSemantics, get_semantics
from .synthesis import (
    SynthesisError,
    SynthPlan,
    body_order,
    interleave_calls_returns,
    scheduling_precedence,
    synthesize_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "AXIOM_NAMES",
    "AbstractExecution",
    "AxiomReport",
    "AxiomVerdict",
    "Closure",
    "CycleError",
    "EnumerationCapError",
    "Event",
    "FIXTURE_NAMES",
    "Fixture",
    "History",
    "HistoryError",
    "Interval",
    "Linearization",
    "LinearizationResult",
    "MODELS",
    "MembershipResult",
    "ObjectSemantics",
    "Op",
    "PULL",
    "PUSH",
    "PerObjectWitnesses",
    "REGISTER",
    "Relation",
    "SEMANTICS",
    "SEQUENCE",
    "Schedule",
    "ScheduleError",
    "SynthPlan",
    "SynthesisError",
    "Token",
    "TotalOrder",
    "World",
    "all_fixtures",
    "apply_fence_preset",
    "arbitration_constraints",
    "body",
    "body_order",
    "call",
    "can_produce",
    "check_axioms",
    "check_fence_preset",
    "check_lin",
    "check_osc",
    "closed_visibility",
    "compose",
    "composition_precedence",
    "decoded_visibility",
    "enumerate_histories",
    "erase_fences",
    "explore",
    "evaluation_context",
    "extend_to_total",
    "extract_execution",
    "extract_history",
    "fixture",
    "flush_suffix",
    "get_semantics",
    "interleave_calls_returns",
    "is_gsc",
    "is_well_fenced",
    "lin_from_osc_execution",
    "linear_extensions",
    "make_history",
    "minimal_visibility",
    "osc_execution_from_lin",
    "programs_of",
    "project",
    "pull",
    "push",
    "ret",
    "rt_from_intervals",
    "run_schedule",
    "run_to_quiescence",
    "scheduling_precedence",
    "set_all_fences",
    "step",
    "synthesize_schedule",
    "to_dual_tso",
    "to_tso",
    "union_relations",
    "validate_history",
    "validate_schedule",
]
