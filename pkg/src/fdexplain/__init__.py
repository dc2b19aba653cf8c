"""Finite-domain propagation with a proof tree for every removed value."""

from .diagnosis import (
    DONE,
    Answer,
    Diagnosis,
    DiagnosisSession,
    ExpectedEnv,
    Finding,
    SessionFinishedError,
    StaleQuestionError,
    Strategy,
    erroneous_operators,
    find_symptoms,
    new_session,
    run_session,
    scripted_oracle,
    verify_erroneous,
)
from .engine import (
    Closure,
    ExplanationTree,
    Program,
    build_program,
    chaotic_iteration,
    compile_program,
    explanation_for,
    removed_roots,
    upward_closure,
)
from .indexicals import (
    DeductionRule,
    IndexicalExpr,
    MaxMinus,
    MinPlus,
    NotConst,
    NotVal,
    Operator,
    RangeConst,
    Supports,
    compile_constraint,
    dual_apply,
    eval_operator,
    render_operator,
    rules_for,
    verify_preservation,
)
from .lang import (
    ExplanationDocument,
    ParseError,
    export_explanation,
    parse_expected,
    parse_model,
    render_closure,
    render_model,
)
from .model import (
    Constraint,
    Csp,
    Environment,
    Relation,
    Space,
    ValuePair,
    Variable,
    complement,
    enumerate_solutions,
    is_solution,
    restrict,
    union_solutions,
)

__version__ = "0.1.0"
