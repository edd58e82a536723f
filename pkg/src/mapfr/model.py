"""Problem instances, timed plans, solutions, validation, and cost.

An :class:`Instance` is an undirected weighted graph embedded in the plane
plus a set of circular agents with start and goal vertices.  A :class:`Plan`
is one agent's gap-free sequence of timed motions, always beginning at time 0
(with an explicit wait when the first departure is delayed) and always ending
with an unbounded terminal rest at the goal.  A :class:`Solution` is one plan
per agent; its cost (``sic``) is the sum of per-agent completion times, where
an agent's completion is the end of its last *move* -- waiting at the goal
afterwards is free, and an agent that never moves completes at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .geometry import (
    EPS,
    UNBOUNDED,
    Coordinate,
    KinematicSegment,
    TimeInterval,
    collision_interval,
    wait_move_collision_interval,
)


@dataclass(frozen=True)
class Vertex:
    id: str
    coordinate: Coordinate


@dataclass(frozen=True)
class Edge:
    """Undirected edge; ``length`` must equal the embedded distance."""

    u: str
    v: str
    length: float

    def key(self) -> tuple[str, str]:
        return (self.u, self.v) if self.u <= self.v else (self.v, self.u)


@dataclass(frozen=True)
class Agent:
    id: str
    start: str
    goal: str


@dataclass(frozen=True)
class Instance:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    agents: tuple[Agent, ...]
    radius: float

    @cached_property
    def vertex_map(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[str, float], ...]]:
        nbrs: dict[str, list[tuple[str, float]]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            if e.u in nbrs and e.v in nbrs:
                nbrs[e.u].append((e.v, e.length))
                nbrs[e.v].append((e.u, e.length))
        return {k: tuple(sorted(v)) for k, v in nbrs.items()}

    @cached_property
    def edge_lengths(self) -> dict[tuple[str, str], float]:
        return {e.key(): e.length for e in self.edges}

    def coord(self, vertex_id: str) -> Coordinate:
        return self.vertex_map[vertex_id].coordinate

    def agent(self, agent_id: str) -> Agent:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    def has_edge(self, u: str, v: str) -> bool:
        key = (u, v) if u <= v else (v, u)
        return key in self.edge_lengths


@dataclass(frozen=True)
class TimedMotion:
    """One motion of a plan: ``source != target`` is a move along an edge at
    unit speed; ``source == target`` is a wait (``duration`` may be
    :data:`UNBOUNDED` for the terminal rest)."""

    source: str
    target: str
    start_time: float
    duration: float

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError(f"motion duration must be positive, got {self.duration}")
        if self.source != self.target and math.isinf(self.duration):
            raise ValueError("a move cannot be unbounded")
        if not math.isfinite(self.start_time) or self.start_time < 0:
            raise ValueError(f"start time must be finite and >= 0, got {self.start_time}")

    @property
    def is_wait(self) -> bool:
        return self.source == self.target

    @property
    def is_move(self) -> bool:
        return self.source != self.target

    @property
    def is_rest(self) -> bool:
        return self.is_wait and math.isinf(self.duration)

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration


@dataclass(frozen=True)
class Plan:
    agent: str
    motions: tuple[TimedMotion, ...]

    @property
    def completion_time(self) -> float:
        """End time of the last move; 0.0 for a plan that never moves."""
        for m in reversed(self.motions):
            if m.is_move:
                return m.end_time
        return 0.0


@dataclass(frozen=True)
class Solution:
    plans: tuple[Plan, ...]

    @property
    def sic(self) -> float:
        return sum(p.completion_time for p in self.plans)

    def plan_for(self, agent_id: str) -> Plan:
        for p in self.plans:
            if p.agent == agent_id:
                return p
        raise KeyError(agent_id)


@dataclass(frozen=True)
class Conflict:
    """A colliding pair of timed motions of two distinct agents, together
    with their open collision interval and the motions' plan indices."""

    agent_a: str
    agent_b: str
    index_a: int
    index_b: int
    motion_a: TimedMotion
    motion_b: TimedMotion
    interval: TimeInterval


class StructuralError(ValueError):
    """A plan breaks the structural invariants (continuity, timing, shape)."""


def sic(sol: Solution) -> float:
    """Sum of individual costs: per-agent completion times, summed."""
    return sol.sic


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_instance(inst: Instance) -> list[str]:
    """Every invariant violation in the instance (empty list when well formed)."""
    problems: list[str] = []
    if not inst.radius > 0:
        problems.append(f"radius must be positive, got {inst.radius}")
    ids = [v.id for v in inst.vertices]
    for vid in sorted({i for i in ids if ids.count(i) > 1}):
        problems.append(f"duplicate vertex id {vid!r}")
    vmap = {v.id: v for v in inst.vertices}
    seen_edges: set[tuple[str, str]] = set()
    for e in inst.edges:
        if e.u == e.v:
            problems.append(f"self-loop edge at {e.u!r}")
            continue
        missing = [x for x in (e.u, e.v) if x not in vmap]
        if missing:
            problems.append(f"edge {e.u!r}-{e.v!r} references unknown vertex {missing[0]!r}")
            continue
        if e.key() in seen_edges:
            problems.append(f"duplicate edge {e.u!r}-{e.v!r}")
        seen_edges.add(e.key())
        if not e.length > 0:
            problems.append(f"edge {e.u!r}-{e.v!r} length must be positive, got {e.length}")
            continue
        dist = vmap[e.u].coordinate.distance_to(vmap[e.v].coordinate)
        if abs(e.length - dist) > EPS:
            problems.append(
                f"edge {e.u!r}-{e.v!r} length mismatch: stored {e.length:.12g}, "
                f"embedded distance {dist:.12g}"
            )
    agent_ids = [a.id for a in inst.agents]
    for aid in sorted({i for i in agent_ids if agent_ids.count(i) > 1}):
        problems.append(f"duplicate agent id {aid!r}")
    starts: dict[str, str] = {}
    goals: dict[str, str] = {}
    for a in inst.agents:
        for role, vid in (("start", a.start), ("goal", a.goal)):
            if vid not in vmap:
                problems.append(f"agent {a.id!r} {role} vertex {vid!r} unknown")
        if a.start in starts:
            problems.append(f"duplicate start {a.start!r} (agents {starts[a.start]!r}, {a.id!r})")
        starts.setdefault(a.start, a.id)
        if a.goal in goals:
            problems.append(f"duplicate goal {a.goal!r} (agents {goals[a.goal]!r}, {a.id!r})")
        goals.setdefault(a.goal, a.id)
    return problems


def plan_violations(inst: Instance, plan: Plan) -> list[str]:
    """Structural problems in one plan (empty list when well formed)."""
    problems: list[str] = []
    agent = None
    try:
        agent = inst.agent(plan.agent)
    except KeyError:
        problems.append(f"plan names unknown agent {plan.agent!r}")
    if not plan.motions:
        problems.append("plan has no motions")
        return problems
    first = plan.motions[0]
    if agent is not None and first.source != agent.start:
        problems.append(f"plan starts at {first.source!r}, agent starts at {agent.start!r}")
    if first.start_time != 0.0:
        problems.append(f"first motion starts at {first.start_time}, expected 0")
    for i, m in enumerate(plan.motions):
        for vid in (m.source, m.target):
            if vid not in inst.vertex_map:
                problems.append(f"motion {i} references unknown vertex {vid!r}")
                return problems
        if m.is_move:
            key = (m.source, m.target) if m.source <= m.target else (m.target, m.source)
            length = inst.edge_lengths.get(key)
            if length is None:
                problems.append(f"motion {i} moves along missing edge {m.source!r}-{m.target!r}")
            elif abs(m.duration - length) > EPS:
                problems.append(
                    f"motion {i} duration {m.duration:.12g} != edge length {length:.12g}"
                )
        if i + 1 < len(plan.motions):
            nxt = plan.motions[i + 1]
            if m.is_rest:
                problems.append(f"motion {i} is an unbounded wait but is not last")
                break
            if nxt.source != m.target:
                problems.append(
                    f"motion {i + 1} starts at {nxt.source!r} but motion {i} ends at {m.target!r}"
                )
            if abs(nxt.start_time - m.end_time) > EPS:
                problems.append(
                    f"motion {i + 1} starts at {nxt.start_time:.12g} but motion {i} "
                    f"ends at {m.end_time:.12g}"
                )
    last = plan.motions[-1]
    if not last.is_rest:
        problems.append("plan must end with an unbounded rest at the goal")
    elif agent is not None and last.source != agent.goal:
        problems.append(f"plan rests at {last.source!r}, agent's goal is {agent.goal!r}")
    return problems


def motion_segment(inst: Instance, m: TimedMotion) -> KinematicSegment:
    return KinematicSegment(
        inst.coord(m.source), inst.coord(m.target), m.start_time, m.duration
    )


def validate_solution(inst: Instance, sol: Solution) -> list[Conflict]:
    """All pairwise conflicts in the solution, sorted by (start time, agents,
    motion indices); empty list when collision-free.

    Raises :class:`StructuralError` when any plan is malformed or agents are
    missing/duplicated.
    """
    agent_ids = [a.id for a in inst.agents]
    plan_ids = [p.agent for p in sol.plans]
    if sorted(plan_ids) != sorted(agent_ids):
        raise StructuralError(
            f"solution covers agents {sorted(plan_ids)}, instance has {sorted(agent_ids)}"
        )
    for plan in sol.plans:
        problems = plan_violations(inst, plan)
        if problems:
            raise StructuralError(f"plan for {plan.agent!r}: " + "; ".join(problems))
    conflicts: list[Conflict] = []
    plans = sorted(sol.plans, key=lambda p: p.agent)
    for i in range(len(plans)):
        for j in range(i + 1, len(plans)):
            pa, pb = plans[i], plans[j]
            for ia, ma in enumerate(pa.motions):
                sa = motion_segment(inst, ma)
                for ib, mb in enumerate(pb.motions):
                    iv = collision_interval(sa, motion_segment(inst, mb), inst.radius)
                    if iv is not None:
                        conflicts.append(
                            Conflict(pa.agent, pb.agent, ia, ib, ma, mb, iv)
                        )
    conflicts.sort(key=lambda c: (c.interval.lo, c.agent_a, c.agent_b, c.index_a, c.index_b))
    return conflicts


# ---------------------------------------------------------------------------
# Overlap classification
# ---------------------------------------------------------------------------


def edge_overlapping(inst: Instance, v: str, e: Edge) -> bool:
    """Does a wait at ``v`` collide with a traversal of ``e``?

    ``v`` must not be an endpoint of ``e``; traversal direction is
    irrelevant by symmetry.
    """
    if v in (e.u, e.v):
        raise ValueError(f"vertex {v!r} is an endpoint of edge {e.u!r}-{e.v!r}")
    mover = KinematicSegment.move(inst.coord(e.u), inst.coord(e.v), 0.0)
    return wait_move_collision_interval(inst.coord(v), mover, inst.radius) is not None


def vertex_overlapping(inst: Instance, v1: str, v2: str) -> bool:
    """Are two distinct vertices too close for two agents to wait at both?"""
    if v1 == v2:
        raise ValueError("vertex_overlapping needs two distinct vertices")
    return inst.coord(v1).distance_to(inst.coord(v2)) < 2.0 * inst.radius


@dataclass(frozen=True)
class OverlapReport:
    """Result of :func:`classify`: the instance is *non-overlapping* when no
    waiting agent can ever block an edge traversal or another waiting agent."""

    non_overlapping: bool
    edge_witnesses: tuple[tuple[str, Edge], ...]
    vertex_witnesses: tuple[tuple[str, str], ...]

    @property
    def label(self) -> str:
        return "non-overlapping" if self.non_overlapping else "general"


def classify(inst: Instance) -> OverlapReport:
    edge_wit: list[tuple[str, Edge]] = []
    vertex_wit: list[tuple[str, str]] = []
    vs = sorted(v.id for v in inst.vertices)
    edges = sorted(inst.edges, key=lambda e: e.key())
    for v in vs:
        for e in edges:
            if v in (e.u, e.v):
                continue
            if edge_overlapping(inst, v, e):
                edge_wit.append((v, e))
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            if vertex_overlapping(inst, vs[i], vs[j]):
                vertex_wit.append((vs[i], vs[j]))
    return OverlapReport(
        non_overlapping=not edge_wit and not vertex_wit,
        edge_witnesses=tuple(edge_wit),
        vertex_witnesses=tuple(vertex_wit),
    )


# ---------------------------------------------------------------------------
# Plan construction helpers
# ---------------------------------------------------------------------------


def build_plan(
    inst: Instance, agent_id: str, steps: list[tuple[str, str, float]]
) -> Plan:
    """Assemble a normalized plan from ``(source, target, departure)`` steps.

    Steps are moves (``source != target``) and finite waits given by their
    departure times; gaps before the first step and between steps must be
    spelled out as waits by the caller -- this helper only appends the
    terminal rest and computes durations.  For a finite wait supply
    ``(v, v, start)`` followed by the next step fixing its end.
    """
    agent = inst.agent(agent_id)
    motions: list[TimedMotion] = []
    for k, (source, target, depart) in enumerate(steps):
        if source != target:
            key = (source, target) if source <= target else (target, source)
            duration = inst.edge_lengths[key]
        else:
            if k + 1 < len(steps):
                duration = steps[k + 1][2] - depart
            else:
                raise ValueError("a trailing wait must be followed by a move or omitted")
            if not duration > 0:
                raise ValueError(f"wait at {source!r} from {depart} has no duration")
        motions.append(TimedMotion(source, target, depart, duration))
    rest_start = motions[-1].end_time if motions else 0.0
    rest_at = motions[-1].target if motions else agent.start
    motions.append(TimedMotion(rest_at, rest_at, rest_start, UNBOUNDED))
    return Plan(agent_id, tuple(motions))
