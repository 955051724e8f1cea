"""Planar navigation: polygons, gap sensing, critical events, gap trees."""

from .polygon import (
    OnBoundaryError,
    OutsidePolygonError,
    PolygonError,
    SimplePolygon,
    VertexAction,
    load_polygon,
    optimal_action,
    orient,
    shortest_path,
    visible,
)
from .gaps import Gap, GapObservation, gap_observation, reactive_counterexample
from .events import CriticalEvent, StepTooCoarseError, event_trace
from .gnt import (
    TraceInconsistentError,
    UnknownGapTokenError,
    GapTreeState,
    NavigationReport,
    Trace,
    NavigationTraceSet,
    gnt_machine,
    gnt_step,
    gnt_supports_navigation,
    goal_policy_machine,
    navigation_report,
    navigation_traces,
)

__all__ = [
    "PolygonError",
    "OutsidePolygonError",
    "OnBoundaryError",
    "SimplePolygon",
    "VertexAction",
    "load_polygon",
    "orient",
    "visible",
    "shortest_path",
    "optimal_action",
    "Gap",
    "GapObservation",
    "gap_observation",
    "reactive_counterexample",
    "CriticalEvent",
    "StepTooCoarseError",
    "event_trace",
    "UnknownGapTokenError",
    "TraceInconsistentError",
    "GapTreeState",
    "NavigationReport",
    "Trace",
    "NavigationTraceSet",
    "gnt_step",
    "gnt_machine",
    "goal_policy_machine",
    "navigation_report",
    "navigation_traces",
    "gnt_supports_navigation",
]
