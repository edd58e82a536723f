"""Conflict-driven constraint-tree search over multi-agent solutions.

The solver keeps a best-first frontier of constraint-tree (CT) nodes.  Each
node is an added constraint on top of its parent's chain plus the re-planned
solution it induces; the root holds every agent's independent optimum.  A node
whose solution is collision-free is the answer.  Otherwise its earliest
conflict is split into one new constraint per involved agent — how, exactly,
is the ``mode``:

``motion``
    both agents are banned from starting the exact conflicting motion
    (including a wait of that exact duration) throughout its unsafe window;
``vertex_range``
    wait-vs-move conflicts instead ban the waiting agent's *presence* at the
    vertex over the open collision window (other conflicts fall back to the
    motion split);
``shifting``
    wait-vs-move conflicts yield the sound pair: a closed departure ban for
    the mover plus an open presence ban over the remaining overlap;
``dt``
    motion splits over plans whose waits all have one fixed unit duration.

Budgets cap expansions and wall time; every expansion's cost is recorded in a
lower-bound trace so non-terminating modes can be exhibited by their flat or
creeping traces rather than claimed.  A brute-force joint-state oracle for the
unit-wait variant provides an independent optimality cross-check on desk-scale
instances.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

from .constraints import (
    Constraint,
    NotApplicableError,
    ShiftParameters,
    residual_conflict,
    shift_parameters,
    split_motion,
    split_shifting,
    split_vertex_range,
)
from .geometry import UNBOUNDED, collision_interval
from .model import (
    Conflict,
    Instance,
    Plan,
    Solution,
    TimedMotion,
    motion_segment,
    validate_instance,
    validate_solution,
)
from .sipp import EMPTY_TABLE, SafeIntervalTable, admissible_heuristic, extend_table
from .sipp import plan as plan_agent

MODES = ("motion", "vertex_range", "shifting", "dt")

_COST_EPS = 1e-9


@dataclass(frozen=True)
class SearchBudget:
    """Caps on the high-level search; exhaustion is an outcome, not an error."""

    max_expansions: int = 100_000
    max_seconds: float = 60.0

    def __post_init__(self) -> None:
        if self.max_expansions <= 0:
            raise ValueError(f"max_expansions must be positive, got {self.max_expansions}")
        if self.max_seconds <= 0:
            raise ValueError(f"max_seconds must be positive, got {self.max_seconds}")


class CTNode:
    """One constraint-tree node.

    Nodes keep a parent pointer plus the single constraint they added; full
    constraint chains are collected by walking up, so deep trees stay cheap
    to store.  ``tables`` holds each constrained agent's safe-interval table,
    extended by one constraint per child, so re-planning never re-processes
    the whole chain.  ``hints`` carries per-agent wait-repair cursors
    downward: a re-cut position that failed under a parent's constraints
    keeps failing under every descendant's superset, so children may resume
    where the parent stopped.

    Of the node's conflict list only the earliest conflict (the one a split
    resolves) and the count (a frontier tie-break) are ever read, so only
    those are stored; keeping every pairwise conflict alive per node is what
    dominated memory on conflict-dense instances.
    """

    __slots__ = (
        "parent", "added", "solution", "g", "first_conflict", "conflict_count",
        "seq", "tables", "hints",
    )

    def __init__(
        self,
        parent: CTNode | None,
        added: Constraint | None,
        solution: Solution,
        conflicts: tuple[Conflict, ...],
        seq: int,
        tables: dict[str, SafeIntervalTable],
        hints: dict[str, dict],
    ) -> None:
        self.parent = parent
        self.added = added
        self.solution = solution
        self.g = solution.sic
        self.first_conflict = conflicts[0] if conflicts else None
        self.conflict_count = len(conflicts)
        self.seq = seq
        self.tables = tables
        self.hints = hints

    def chain(self) -> tuple[Constraint, ...]:
        """All constraints on the path from the root to this node."""
        out: list[Constraint] = []
        node: CTNode | None = self
        while node is not None:
            if node.added is not None:
                out.append(node.added)
            node = node.parent
        out.reverse()
        return tuple(out)

    def chain_for(self, agent_id: str) -> list[Constraint]:
        out: list[Constraint] = []
        node: CTNode | None = self
        while node is not None:
            if node.added is not None and node.added.agent == agent_id:
                out.append(node.added)
            node = node.parent
        out.reverse()
        return out


@dataclass(frozen=True)
class SearchStats:
    expansions: int
    generated: int
    conflicts_resolved: int
    frontier_size: int
    elapsed: float
    lower_bound_trace: tuple[float, ...]


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one constraint-tree search.

    ``status`` is ``"solved"`` (with ``solution``/``g``), ``"budget_exhausted"``
    (with ``best_lower_bound`` and the frontier size in ``stats``), or
    ``"infeasible"``.  ``constraints`` is the goal node's chain when solved.
    """

    status: str
    solution: Solution | None
    g: float | None
    best_lower_bound: float | None
    constraints: tuple[Constraint, ...]
    stats: SearchStats

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    @property
    def exhausted(self) -> bool:
        return self.status == "budget_exhausted"

    @property
    def infeasible(self) -> bool:
        return self.status == "infeasible"


def detect_conflict(inst: Instance, sol: Solution) -> Conflict | None:
    """The conflict with minimal collision-window start, or None when clean.

    Ties break on the lexicographic agent pair, then motion indices — the
    same total order the validator sorts by.
    """
    conflicts = validate_solution(inst, sol)
    return conflicts[0] if conflicts else None


def _delta_for(rule: str, width: float) -> float:
    if rule == "half":
        return width / 2.0
    if rule == "zero":
        return 0.0
    if rule.startswith("fixed:"):
        return float(rule[len("fixed:"):])
    raise ValueError(f"unknown delta rule {rule!r}; expected half, zero, or fixed:<real>")


def _split(
    inst: Instance, conflict: Conflict, mode: str, delta_rule: str
) -> tuple[tuple[Constraint, Constraint], ShiftParameters | None, str]:
    """The two child constraints for a conflict under the given mode.

    Wait-vs-move-only strategies fall back to the motion split on other
    conflict shapes.  Returns (constraint pair, shift parameters or None,
    the split kind actually used).
    """
    if mode in ("motion", "dt"):
        return split_motion(inst, conflict), None, "motion"
    if mode == "vertex_range":
        try:
            return split_vertex_range(inst, conflict), None, "vertex_range"
        except NotApplicableError:
            return split_motion(inst, conflict), None, "motion"
    if mode == "shifting":
        delta = _delta_for(delta_rule, conflict.interval.width)
        iv = conflict.interval
        # The split needs a representable positive overlap: a fixed delta
        # wider than the window, or a hairline window where lo + delta
        # rounds up to hi, leaves none — fall back like any other
        # inapplicable conflict shape.
        if delta >= iv.width or iv.lo + delta >= iv.hi:
            return split_motion(inst, conflict), None, "motion"
        try:
            params = shift_parameters(conflict, delta)
            return split_shifting(conflict, params), params, "shifting"
        except NotApplicableError:
            return split_motion(inst, conflict), None, "motion"
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _child(
    inst: Instance,
    parent: CTNode,
    added: Constraint,
    low_mode: str,
    unit: float,
    seq: int,
) -> CTNode | None:
    """Re-plan the constrained agent under the extended chain; None if stuck."""
    agent_id = added.agent
    hints = {a: dict(h) for a, h in parent.hints.items()}
    if low_mode == "dt":
        # The lattice search wants the raw constraint list; dt trees are
        # shallow enough that walking the chain stays cheap.
        constraints = parent.chain_for(agent_id)
        constraints.append(added)
        tables = parent.tables
        new_plan = plan_agent(
            inst,
            agent_id,
            constraints,
            mode="dt",
            unit=unit,
            repair_hints=hints.setdefault(agent_id, {}),
        )
    else:
        table = extend_table(parent.tables.get(agent_id, EMPTY_TABLE), added)
        tables = {**parent.tables, agent_id: table}
        new_plan = plan_agent(
            inst,
            agent_id,
            [],
            mode=low_mode,
            unit=unit,
            repair_hints=hints.setdefault(agent_id, {}),
            table=table,
        )
    if new_plan is None:
        return None
    plans = tuple(new_plan if p.agent == agent_id else p for p in parent.solution.plans)
    solution = Solution(plans)
    conflicts = tuple(validate_solution(inst, solution))
    return CTNode(parent, added, solution, conflicts, seq, tables, hints)


def solve(
    inst: Instance,
    mode: str,
    budget: SearchBudget | None = None,
    *,
    unit: float = 1.0,
    delta_rule: str = "half",
    on_expand: Callable[[str], None] | None = None,
    on_shift: Callable[[Conflict, ShiftParameters], None] | None = None,
) -> SearchOutcome:
    """Best-first constraint-tree search; frontier ordered by solution cost.

    Ties prefer fewer remaining conflicts, then insertion order.  Children
    whose agent has no plan under the extended chain are pruned.  Every
    expanded child must cost at least its parent (within 1e-9) because the
    low level is optimal under a superset of constraints; a violation aborts
    with diagnostics rather than returning a silently wrong optimum.

    ``on_expand`` receives one text line per expansion (cost, chosen
    conflict, added constraints) for trace diffing; ``on_shift`` observes
    every shifting split's parameters.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    problems = validate_instance(inst)
    if problems:
        raise ValueError("instance does not validate: " + "; ".join(problems))
    if budget is None:
        budget = SearchBudget()
    low_mode = "dt" if mode == "dt" else "motion"
    started = time.monotonic()
    counter = itertools.count()

    def finish(
        status: str,
        node: CTNode | None,
        best: float | None,
        frontier: int,
        expansions: int,
        generated: int,
        resolved: int,
        trace: list[float],
    ) -> SearchOutcome:
        stats = SearchStats(
            expansions=expansions,
            generated=generated,
            conflicts_resolved=resolved,
            frontier_size=frontier,
            elapsed=time.monotonic() - started,
            lower_bound_trace=tuple(trace),
        )
        return SearchOutcome(
            status=status,
            solution=node.solution if node is not None else None,
            g=node.g if node is not None else None,
            best_lower_bound=best,
            constraints=node.chain() if node is not None else (),
            stats=stats,
        )

    plans: list[Plan] = []
    for agent in inst.agents:
        p = plan_agent(inst, agent.id, [], mode=low_mode, unit=unit)
        if p is None:
            return finish("infeasible", None, None, 0, 0, 0, 0, [])
        plans.append(p)
    root_solution = Solution(tuple(plans))
    root = CTNode(
        None,
        None,
        root_solution,
        tuple(validate_solution(inst, root_solution)),
        next(counter),
        {},
        {},
    )

    heap: list[tuple[float, int, int, CTNode]] = []
    heapq.heappush(heap, (root.g, root.conflict_count, root.seq, root))
    generated = 1
    expansions = 0
    resolved = 0
    trace: list[float] = []

    while heap:
        if expansions >= budget.max_expansions or time.monotonic() - started > budget.max_seconds:
            return finish(
                "budget_exhausted", None, heap[0][0], len(heap),
                expansions, generated, resolved, trace,
            )
        _, _, _, node = heapq.heappop(heap)
        expansions += 1
        trace.append(node.g)
        if node.first_conflict is None:
            if on_expand is not None:
                on_expand(f"{expansions} g={node.g:.12g} goal")
            return finish("solved", node, node.g, len(heap), expansions, generated, resolved, trace)
        conflict = node.first_conflict
        resolved += 1
        pair, params, kind = _split(inst, conflict, mode, delta_rule)
        if on_shift is not None and params is not None:
            on_shift(conflict, params)
        fates: list[str] = []
        for added in pair:
            child = _child(inst, node, added, low_mode, unit, next(counter))
            if child is None:
                fates.append(f"({added}) -> infeasible")
                continue
            if child.g < node.g - _COST_EPS:
                raise AssertionError(
                    "cost monotonicity violated: child cost "
                    f"{child.g:.12g} < parent cost {node.g:.12g} "
                    f"(mode={mode}, added {added})"
                )
            heapq.heappush(heap, (child.g, child.conflict_count, child.seq, child))
            generated += 1
            fates.append(f"({added}) -> g={child.g:.12g}")
        if on_expand is not None:
            c = conflict
            on_expand(
                f"{expansions} g={node.g:.12g} "
                f"conflict={c.agent_a}:{c.index_a}/{c.agent_b}:{c.index_b}"
                f"@{c.interval.lo:.12g} kind={kind} "
                + " ".join(fates)
            )
    return finish("infeasible", None, None, 0, expansions, generated, resolved, trace)


# ---------------------------------------------------------------------------
# Brute-force unit-wait oracle
# ---------------------------------------------------------------------------


def oracle_dt(inst: Instance, unit: float, bound: float) -> Solution | None:
    """Exhaustive joint-state optimum for the unit-wait variant, or None.

    Best-first search over joint agent states (per-agent vertex plus next
    decision time); each decision commits one timed motion — traverse an
    incident edge, wait one unit, or rest forever at the goal — and is
    collision-checked against every motion the other agents have committed.
    Admissible priority: each agent contributes its completion so far, or
    ``decision time + shortest remaining distance`` while away from its goal.
    Only solutions with SIC at most ``bound`` are considered.

    Deliberately desk-scale: refuses more than 4 agents, more than 10
    vertices, or an infinite bound.
    """
    if len(inst.agents) > 4:
        raise ValueError(f"oracle is desk-scale only: {len(inst.agents)} agents > 4")
    if len(inst.vertices) > 10:
        raise ValueError(f"oracle is desk-scale only: {len(inst.vertices)} vertices > 10")
    if not math.isfinite(bound):
        raise ValueError("oracle needs a finite cost bound")
    remaining = {a.id: admissible_heuristic(inst, a.goal) for a in inst.agents}
    if any(remaining[a.id][a.start] == UNBOUNDED for a in inst.agents):
        return None
    horizon = bound + unit
    agent_ids = [a.id for a in inst.agents]

    # Per-agent record: (vertex, decision time, resting, completion so far).
    start_records = tuple((a.start, 0.0, False, 0.0) for a in inst.agents)
    start_motions: tuple[tuple[TimedMotion, ...], ...] = tuple(() for _ in inst.agents)

    def priority(records) -> float:
        f = 0.0
        for (vertex, t, resting, completion), aid in zip(records, agent_ids):
            if resting or vertex == inst.agent(aid).goal:
                f += completion
            else:
                f += max(completion, t + remaining[aid][vertex])
        return f

    def state_key(records, motions):
        parts = []
        for record, committed in zip(records, motions):
            last = committed[-1] if committed else None
            signature = None if last is None else (last.source, last.target, round(last.start_time, 6))
            parts.append((record[0], round(record[1], 6), record[2], round(record[3], 6), signature))
        return tuple(parts)

    def collides(candidate: TimedMotion, others) -> bool:
        segment = motion_segment(inst, candidate)
        for committed in others:
            for m in committed:
                if collision_interval(segment, motion_segment(inst, m), inst.radius) is not None:
                    return True
        return False

    counter = itertools.count()
    heap = [(priority(start_records), next(counter), start_records, start_motions)]
    seen: set = set()
    while heap:
        f, _, records, motions = heapq.heappop(heap)
        key = state_key(records, motions)
        if key in seen:
            continue
        seen.add(key)
        if all(r[2] for r in records):
            return Solution(
                tuple(Plan(aid, committed) for aid, committed in zip(agent_ids, motions))
            )
        # The next decider: the active agent with the earliest decision time.
        decider = min(
            (i for i, r in enumerate(records) if not r[2]),
            key=lambda i: (records[i][1], agent_ids[i]),
        )
        vertex, t, _, completion = records[decider]
        others = tuple(m for i, m in enumerate(motions) if i != decider)

        def push(motion: TimedMotion, record) -> None:
            if collides(motion, others):
                return
            new_records = records[:decider] + (record,) + records[decider + 1:]
            new_motions = (
                motions[:decider]
                + (motions[decider] + (motion,),)
                + motions[decider + 1:]
            )
            new_f = priority(new_records)
            if new_f > bound + 1e-9:
                return
            heapq.heappush(heap, (new_f, next(counter), new_records, new_motions))

        if vertex == inst.agent(agent_ids[decider]).goal:
            push(TimedMotion(vertex, vertex, t, UNBOUNDED), (vertex, t, True, completion))
        if t + unit <= horizon:
            push(TimedMotion(vertex, vertex, t, unit), (vertex, t + unit, False, completion))
        for w, length in inst.adjacency[vertex]:
            push(TimedMotion(vertex, w, t, length), (w, t + length, False, t + length))
    return None


# ---------------------------------------------------------------------------
# Shifting-mode failure probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftAudit:
    """One shifting split: did the presence-ban child provably keep the
    conflict alive?"""

    conflict_start: float
    delta: float
    residual: bool


@dataclass(frozen=True)
class ShiftingReport:
    outcome: SearchOutcome
    audits: tuple[ShiftAudit, ...]

    @property
    def all_residual(self) -> bool:
        return all(a.residual for a in self.audits)


def demo_shifting_failure(
    inst: Instance,
    delta_rule: str = "half",
    budget: SearchBudget | None = None,
) -> ShiftingReport:
    """Run shifting mode and audit every split for a surviving conflict.

    For each shifting split the probe records whether the presence-ban
    child's collision window provably retains the original conflict
    (``residual_conflict``).  With any positive delta every audit comes back
    residual and the search exhausts its budget; with delta zero the audits
    are vacuously clear but the cost trace stays flat while the budget burns.
    A conflict-free instance solves at the root with no audits.
    """
    audits: list[ShiftAudit] = []

    def observe(conflict: Conflict, params: ShiftParameters) -> None:
        audits.append(
            ShiftAudit(
                conflict_start=conflict.interval.lo,
                delta=params.delta,
                residual=residual_conflict(conflict, params),
            )
        )

    outcome = solve(
        inst,
        "shifting",
        budget,
        delta_rule=delta_rule,
        on_shift=observe,
    )
    return ShiftingReport(outcome, tuple(audits))
