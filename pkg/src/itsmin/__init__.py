"""Minimal feedback filters over observation histories.

The package answers one family of questions: given a plant observed
through a sensor and a feedback plan, how little internal state does the
plan actually need?  The core pipeline restricts the space of histories
by the plan, minimizes the resulting machine, and checks whether smaller
candidate structures could carry the same behavior.  A reactive layer
asks when no memory at all suffices, and a geometric layer grounds the
whole story in polygon navigation with a gap sensor.

Hot enumeration kernels are compiled with numba when it is installed;
set ``ITSMIN_PURE_NUMPY=1`` to force the plain numpy path.
"""

from .ts import (
    DEAD,
    NO_ACTION,
    RESERVED_TOKENS,
    DomainMismatchError,
    ExternalSystem,
    ItsError,
    Labeling,
    MissingTransitionError,
    NotSufficientError,
    TransitionSystem,
    UndefinedLabelError,
    identity_labeling,
    is_refinement,
    is_sufficient,
    join_labelings,
    quotient_by,
)
from .machines import MooreMachine, build_machine, output_after
from .coupling import (
    Outcome,
    RunResult,
    TaskSpec,
    belief_after,
    belief_step,
    find_feasible_policy,
    is_attainable,
    is_feasible,
    run_coupled,
    task_label,
)
from .restriction import (
    HistoryPolicy,
    belief_filter_machine,
    build_restriction,
    effective_action,
)
from .minimization import (
    find_isomorphism,
    is_isomorphic,
    minimal_sufficient_refinement,
    multi_policy_minimal,
    supports,
)
from .reactive import (
    SearchBudgetExceededError,
    StatePolicy,
    extract_state_policy,
    minimal_reactive_sensor,
    reactive_machine,
    reactive_policy_exists,
    sensor_sufficient_for_reactive,
    state_policy_feasible,
)
from ._jit import active_path

__version__ = "1.0.0"

__all__ = [
    "DEAD",
    "NO_ACTION",
    "RESERVED_TOKENS",
    "ItsError",
    "UndefinedLabelError",
    "DomainMismatchError",
    "NotSufficientError",
    "MissingTransitionError",
    "TransitionSystem",
    "Labeling",
    "ExternalSystem",
    "identity_labeling",
    "is_sufficient",
    "is_refinement",
    "quotient_by",
    "join_labelings",
    "MooreMachine",
    "build_machine",
    "output_after",
    "TaskSpec",
    "Outcome",
    "RunResult",
    "belief_step",
    "belief_after",
    "is_attainable",
    "task_label",
    "run_coupled",
    "is_feasible",
    "find_feasible_policy",
    "HistoryPolicy",
    "build_restriction",
    "belief_filter_machine",
    "effective_action",
    "minimal_sufficient_refinement",
    "supports",
    "find_isomorphism",
    "is_isomorphic",
    "multi_policy_minimal",
    "StatePolicy",
    "SearchBudgetExceededError",
    "extract_state_policy",
    "sensor_sufficient_for_reactive",
    "minimal_reactive_sensor",
    "reactive_machine",
    "state_policy_feasible",
    "reactive_policy_exists",
    "active_path",
    "__version__",
]
