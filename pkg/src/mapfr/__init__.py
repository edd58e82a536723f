"""Continuous-time multi-agent path finding on embedded weighted graphs.

Circular agents of a shared radius traverse edges at unit speed or wait at
vertices; two agents collide when their centers come strictly closer than
two radii.  The package provides the exact swept-circle collision geometry,
a safe-interval single-agent planner, a best-first constraint-tree solver
with four pluggable constraint semantics (exact motion bans, vertex
presence bans, shifting bans, and a unit-wait discrete-time variant), a
solution validator, an instance classifier, a brute-force joint-state
oracle, line-oriented text formats, and self-checking demonstrations of
the failure modes of the unsound/incomplete semantics.
"""

from .ccbs import (
    SearchBudget,
    SearchOutcome,
    SearchStats,
    ShiftAudit,
    ShiftingReport,
    demo_shifting_failure,
    detect_conflict,
    oracle_dt,
    solve,
)
from .constraints import (
    MotionConstraint,
    NotApplicableError,
    ShiftParameters,
    VertexRangeConstraint,
    check_shifting_sound,
    residual_conflict,
    satisfies,
    shift_parameters,
    split_motion,
    split_shifting,
    split_vertex_range,
)
from .demos import DEMOS, DemoReport
from .fixtures import (
    corridor_instance,
    dual_wait_witness,
    random_dt_instance,
    random_instance,
    refuge_handcrafted_solution,
    refuge_instance,
)
from .geometry import (
    UNBOUNDED,
    Coordinate,
    KinematicSegment,
    TimeInterval,
    collision_interval,
    in_collision,
    unsafe_interval,
    wait_move_collision_interval,
)
from .io import (
    ParseError,
    load_scenario,
    load_solution,
    quantize,
    save_scenario,
    save_solution,
)
from .model import (
    Agent,
    Conflict,
    Edge,
    Instance,
    OverlapReport,
    Plan,
    Solution,
    StructuralError,
    TimedMotion,
    Vertex,
    build_plan,
    classify,
    edge_overlapping,
    plan_violations,
    sic,
    validate_instance,
    validate_solution,
    vertex_overlapping,
)
from .sipp import SafeIntervalTable, admissible_heuristic, build_safe_intervals, plan

__version__ = "0.1.0"

__all__ = [
    "DEMOS",
    "Agent",
    "Conflict",
    "Coordinate",
    "DemoReport",
    "Edge",
    "Instance",
    "KinematicSegment",
    "MotionConstraint",
    "NotApplicableError",
    "OverlapReport",
    "ParseError",
    "Plan",
    "SafeIntervalTable",
    "SearchBudget",
    "SearchOutcome",
    "SearchStats",
    "ShiftAudit",
    "ShiftParameters",
    "ShiftingReport",
    "Solution",
    "StructuralError",
    "TimeInterval",
    "TimedMotion",
    "UNBOUNDED",
    "Vertex",
    "VertexRangeConstraint",
    "build_plan",
    "build_safe_intervals",
    "check_shifting_sound",
    "classify",
    "collision_interval",
    "corridor_instance",
    "demo_shifting_failure",
    "detect_conflict",
    "dual_wait_witness",
    "edge_overlapping",
    "in_collision",
    "load_scenario",
    "load_solution",
    "oracle_dt",
    "plan",
    "plan_violations",
    "quantize",
    "random_dt_instance",
    "random_instance",
    "refuge_handcrafted_solution",
    "refuge_instance",
    "residual_conflict",
    "satisfies",
    "save_scenario",
    "save_solution",
    "shift_parameters",
    "sic",
    "solve",
    "split_motion",
    "split_shifting",
    "split_vertex_range",
    "unsafe_interval",
    "validate_instance",
    "validate_solution",
    "vertex_overlapping",
    "wait_move_collision_interval",
]
