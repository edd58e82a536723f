"""Optimal single-agent temporal shortest paths under a constraint set.

The planner minimizes completion time — the end of the last move, with waits
at the goal free — in three modes:

* ``continuous``: safe-interval search.  Vertex presence bans carve each
  vertex's timeline into closed safe intervals; banned move departures are
  skipped by pushing the departure to the end of the forbidden window.
  Waits arise implicitly ("depart at the earliest safe time") with whatever
  duration that takes.
* ``motion``: the identical search, followed by a repair pass that re-cuts
  any produced wait whose exact (vertex, duration, start) signature is
  banned.  A cut wait costs the same and occupies the vertex identically,
  so the repair never changes the answer — which is precisely the loophole
  that makes wait-signature bans unable to pin down a continuous-time agent.
* ``dt``: departures restricted to ``arrival + k * unit``; waits are emitted
  as explicit unit-duration motions and searched exactly over the resulting
  time lattice.

All modes honour both constraint families (`MotionConstraint`,
`VertexRangeConstraint`); a mode's name reflects which family the caller is
expected to feed it, not a restriction.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

from .constraints import Constraint, MotionConstraint, VertexRangeConstraint
from .geometry import EPS, UNBOUNDED, TimeInterval
from .io import quantize
from .model import Instance, Plan, TimedMotion

__all__ = [
    "EMPTY_TABLE",
    "SafeIntervalTable",
    "admissible_heuristic",
    "build_safe_intervals",
    "extend_table",
    "plan",
]

# Wait durations are matched against banned signatures within EPS; bucketing
# by this grid finds every candidate ban in O(1).
_DURATION_GRID = 1e-9


def admissible_heuristic(inst: Instance, goal: str) -> dict[str, float]:
    """Exact graph distance to ``goal`` per vertex; unreachable => UNBOUNDED."""
    dist = {goal: 0.0}
    heap = [(0.0, goal)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist.get(v, UNBOUNDED):
            continue
        for w, length in inst.adjacency[v]:
            nd = d + length
            if nd < dist.get(w, UNBOUNDED):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return {v.id: dist.get(v.id, UNBOUNDED) for v in inst.vertices}


# ---------------------------------------------------------------------------
# Safe-interval table
# ---------------------------------------------------------------------------


def _merge_open(windows: list[TimeInterval]) -> list[TimeInterval]:
    """Union of open intervals; windows touching only at a point stay apart."""
    out: list[TimeInterval] = []
    for w in sorted(windows, key=lambda w: (w.lo, w.hi)):
        if out and w.lo < out[-1].hi:
            if w.hi > out[-1].hi:
                out[-1] = TimeInterval.open(out[-1].lo, w.hi)
        else:
            out.append(TimeInterval.open(w.lo, w.hi))
    return out


def _merge_windows(windows: list[TimeInterval]) -> list[TimeInterval]:
    """Union of departure-ban windows of mixed closedness."""
    out: list[TimeInterval] = []
    for w in sorted(windows, key=lambda w: (w.lo, not w.lo_closed, w.hi)):
        if out:
            prev = out[-1]
            joined = w.lo < prev.hi or (w.lo == prev.hi and (prev.hi_closed or w.lo_closed))
            if joined:
                if w.hi > prev.hi or (w.hi == prev.hi and w.hi_closed):
                    out[-1] = TimeInterval(prev.lo, w.hi, prev.lo_closed, w.hi_closed)
                continue
        out.append(w)
    return out


def _complement(windows: tuple[TimeInterval, ...] | list[TimeInterval]) -> tuple[TimeInterval, ...]:
    """Closed presence intervals left free by a merged list of open bans."""
    safe: list[TimeInterval] = []
    cursor = 0.0
    for w in windows:
        if w.lo >= cursor:
            safe.append(TimeInterval.closed(cursor, w.lo))
        if w.hi == UNBOUNDED:
            return tuple(safe)
        cursor = max(cursor, w.hi)
    safe.append(TimeInterval(cursor, UNBOUNDED, True, False))
    return tuple(safe)


_FREE = (TimeInterval(0.0, UNBOUNDED, True, False),)


@dataclass(frozen=True)
class SafeIntervalTable:
    """One agent's constraints, reorganized for the interval search.

    ``presence`` holds each restricted vertex's closed safe intervals (anything
    absent is free on ``[0, UNBOUNDED)``) and ``vertex_bans`` the merged open
    bans they complement; ``edge_bans`` maps a directed edge to its merged
    forbidden departure windows; wait- and rest-signature bans cannot be
    expressed as either and are kept for the repair pass.  Tables are
    immutable: grow them with :func:`extend_table`.
    """

    presence: dict[str, tuple[TimeInterval, ...]]
    vertex_bans: dict[str, tuple[TimeInterval, ...]]
    edge_bans: dict[tuple[str, str], tuple[TimeInterval, ...]]
    wait_bans: dict[tuple[str, int], tuple[MotionConstraint, ...]]
    rest_bans: dict[str, tuple[TimeInterval, ...]]

    def presence_at(self, vertex: str) -> tuple[TimeInterval, ...]:
        return self.presence.get(vertex, _FREE)

    def wait_ban_hit(self, vertex: str, duration: float, start: float) -> bool:
        bucket = math.floor(duration / _DURATION_GRID)
        for b in (bucket - 1, bucket, bucket + 1):
            for k in self.wait_bans.get((vertex, b), ()):
                if abs(duration - k.wait_duration) <= EPS and k.window.contains(start):
                    return True
        return False


def build_safe_intervals(constraints: list[Constraint]) -> SafeIntervalTable:
    vertex_raw: dict[str, list[TimeInterval]] = {}
    edge_raw: dict[tuple[str, str], list[TimeInterval]] = {}
    wait_bans: dict[tuple[str, int], tuple[MotionConstraint, ...]] = {}
    rest_raw: dict[str, list[TimeInterval]] = {}
    for k in constraints:
        if type(k) is VertexRangeConstraint:
            vertex_raw.setdefault(k.vertex, []).append(k.window)
        elif k.wait_duration is None:
            edge_raw.setdefault((k.source, k.target), []).append(k.window)
        elif k.wait_duration == UNBOUNDED:
            rest_raw.setdefault(k.source, []).append(k.window)
        else:
            key = (k.source, math.floor(k.wait_duration / _DURATION_GRID))
            wait_bans[key] = wait_bans.get(key, ()) + (k,)
    vertex_bans = {v: tuple(_merge_open(ws)) for v, ws in vertex_raw.items()}
    return SafeIntervalTable(
        presence={v: _complement(ws) for v, ws in vertex_bans.items()},
        vertex_bans=vertex_bans,
        edge_bans={e: tuple(_merge_windows(ws)) for e, ws in edge_raw.items()},
        wait_bans=wait_bans,
        rest_bans={v: tuple(_merge_windows(ws)) for v, ws in rest_raw.items()},
    )


EMPTY_TABLE = build_safe_intervals([])


def extend_table(table: SafeIntervalTable, added: Constraint) -> SafeIntervalTable:
    """The table for the table's constraints plus ``added``.

    Window merging is associative, so re-merging one key's already-merged
    windows with the new one equals a rebuild from scratch; only the touched
    key is re-derived and the other families are shared.  This is what keeps
    deep constraint chains affordable: a child node pays for its one new
    constraint, not for the whole chain.
    """
    presence = table.presence
    vertex_bans = table.vertex_bans
    edge_bans = table.edge_bans
    wait_bans = table.wait_bans
    rest_bans = table.rest_bans
    if type(added) is VertexRangeConstraint:
        merged = tuple(_merge_open([*vertex_bans.get(added.vertex, ()), added.window]))
        vertex_bans = {**vertex_bans, added.vertex: merged}
        presence = {**presence, added.vertex: _complement(merged)}
    elif added.wait_duration is None:
        key = (added.source, added.target)
        merged = tuple(_merge_windows([*edge_bans.get(key, ()), added.window]))
        edge_bans = {**edge_bans, key: merged}
    elif added.wait_duration == UNBOUNDED:
        merged = tuple(_merge_windows([*rest_bans.get(added.source, ()), added.window]))
        rest_bans = {**rest_bans, added.source: merged}
    else:
        key = (added.source, math.floor(added.wait_duration / _DURATION_GRID))
        wait_bans = {**wait_bans, key: wait_bans.get(key, ()) + (added,)}
    return SafeIntervalTable(presence, vertex_bans, edge_bans, wait_bans, rest_bans)


def _grid_up(t: float) -> float:
    """Smallest serialization-stable time >= t.

    Departure times are snapped onto the 12-significant-digit grid the text
    formats use, always rounding *up* so a time certified safe against a ban
    window stays on the safe side.  Without this, a plan that departs exactly
    on a collision boundary re-validates with a hairline collision after a
    save/load round trip rounds the boundary down.
    """
    if t <= 0.0 or not math.isfinite(t):
        return t
    q = quantize(t)
    while q < t:
        step = 10.0 ** (math.floor(math.log10(q)) - 11)
        q = quantize(q + step)
    return q


def _pushed_past(t: float, windows: tuple[TimeInterval, ...]) -> float:
    """Earliest grid time >= t inside no window; UNBOUNDED when swallowed.

    Windows must be sorted and pairwise disjoint — the merged form the table
    stores — so one forward pass suffices: pushing past a window can only
    land inside a later one.
    """
    for w in windows:
        if t < w.lo:
            break
        if w.contains(t):
            if w.hi == UNBOUNDED:
                return UNBOUNDED
            t = _grid_up(math.nextafter(w.hi, UNBOUNDED) if w.hi_closed else w.hi)
    return t


# ---------------------------------------------------------------------------
# Continuous-time safe-interval search
# ---------------------------------------------------------------------------


def _interval_search(
    inst: Instance, start: str, goal: str, table: SafeIntervalTable
) -> tuple[list[tuple[str, float, float]], float] | None:
    """A* over (vertex, safe-interval) states.

    Returns ``(route, rest_start)`` where route lists ``(vertex, arrival,
    departure)`` with the last entry's departure equal to its arrival, or
    ``None`` when no plan exists.  Cost is the final arrival time; waiting at
    the goal before the terminal rest is free and does not affect order.
    """
    h = admissible_heuristic(inst, goal)
    if h[start] == UNBOUNDED:
        return None
    start_intervals = table.presence_at(start)
    if not start_intervals or not start_intervals[0].contains(0.0):
        return None  # the agent exists at its start from time zero

    counter = itertools.count()
    best: dict[tuple[str, int], float] = {(start, 0): 0.0}
    came: dict[tuple[str, int], tuple[tuple[str, int] | None, float]] = {(start, 0): (None, 0.0)}
    heap = [(h[start], 0.0, start, next(counter), (start, 0), 0.0)]
    while heap:
        f, neg_g, vertex, _, state, arrival = heapq.heappop(heap)
        if arrival > best.get(state, UNBOUNDED):
            continue
        interval = table.presence_at(vertex)[state[1]]
        if vertex == goal and interval.hi == UNBOUNDED:
            rest_start = _pushed_past(arrival, table.rest_bans.get(goal, ()))
            if rest_start == UNBOUNDED:
                return None  # later arrivals only shrink the options
            route: list[tuple[str, float, float]] = [(vertex, arrival, arrival)]
            cursor, dep = came[state]
            while cursor is not None:
                prev_interval_arrival = best[cursor]
                route.append((cursor[0], prev_interval_arrival, dep))
                cursor, dep = came[cursor]
            route.reverse()
            return route, rest_start
        for w, length in inst.adjacency[vertex]:
            limit = interval.hi
            bans = table.edge_bans.get((vertex, w), ())
            for idx, target_iv in enumerate(table.presence_at(w)):
                if target_iv.hi - length < arrival:
                    continue  # cannot arrive inside this interval any more
                tau = _pushed_past(_grid_up(max(arrival, target_iv.lo - length)), bans)
                if tau == UNBOUNDED or tau > limit:
                    continue
                t_arr = tau + length
                if t_arr > target_iv.hi:
                    continue
                nxt = (w, idx)
                if t_arr < best.get(nxt, UNBOUNDED):
                    best[nxt] = t_arr
                    came[nxt] = (state, tau)
                    hw = h[w]
                    if hw == UNBOUNDED:
                        continue
                    heapq.heappush(heap, (t_arr + hw, -t_arr, w, next(counter), nxt, t_arr))
    return None


def _route_to_motions(
    inst: Instance, route: list[tuple[str, float, float]], rest_start: float
) -> list[TimedMotion]:
    motions: list[TimedMotion] = []
    for i, (vertex, arrival, departure) in enumerate(route):
        last = i == len(route) - 1
        stay_until = rest_start if last else departure
        if stay_until > arrival:
            motions.append(TimedMotion(vertex, vertex, arrival, stay_until - arrival))
        if not last:
            nxt = route[i + 1][0]
            key = (vertex, nxt) if vertex <= nxt else (nxt, vertex)
            motions.append(TimedMotion(vertex, nxt, departure, inst.edge_lengths[key]))
    goal = route[-1][0]
    motions.append(TimedMotion(goal, goal, rest_start, UNBOUNDED))
    return motions


# ---------------------------------------------------------------------------
# Wait repair (motion-constraint semantics)
# ---------------------------------------------------------------------------


def _cut_fractions():
    """Deterministic enumeration of cut positions k/d, coprime, midpoint first."""
    for d in itertools.count(2):
        for k in range(1, d):
            if math.gcd(k, d) == 1:
                yield k, d


_FRACTIONS: list[tuple[int, int]] = []
_FRACTION_SOURCE = _cut_fractions()


def _fraction(i: int) -> tuple[int, int]:
    """The i-th cut fraction, materialized once; resumed attempts index here."""
    while len(_FRACTIONS) <= i:
        _FRACTIONS.append(next(_FRACTION_SOURCE))
    return _FRACTIONS[i]


def _repair_runs(
    motions: list[TimedMotion],
    table: SafeIntervalTable,
    hints: dict | None,
) -> list[TimedMotion]:
    """Re-cut every wait run whose pieces hit exact-signature wait bans.

    A run is a maximal block of consecutive waits at one vertex.  Its
    occupancy and endpoints never change — only where the cuts fall — so the
    plan's cost and collision behaviour are untouched.  Cut positions are
    tried in a fixed order (midpoint, thirds, quarters, ...); failed attempt
    counts may be carried in ``hints`` (keyed by run) because a cut that
    violates some ban keeps violating it under any superset of constraints.
    """
    if not table.wait_bans:
        return motions
    out: list[TimedMotion] = []
    i = 0
    while i < len(motions):
        m = motions[i]
        if not (m.is_wait and m.duration != UNBOUNDED):
            out.append(m)
            i += 1
            continue
        j = i
        while j < len(motions) and motions[j].is_wait and motions[j].duration != UNBOUNDED:
            j += 1
        vertex = m.source
        t0, t1 = m.start_time, motions[j - 1].end_time
        out.extend(_cut_run(vertex, t0, t1, table, hints))
        i = j
    return out


def _cut_run(
    vertex: str,
    t0: float,
    t1: float,
    table: SafeIntervalTable,
    hints: dict | None,
) -> list[TimedMotion]:
    span = t1 - t0
    if not table.wait_ban_hit(vertex, span, t0):
        return [TimedMotion(vertex, vertex, t0, span)]
    key = (vertex, round(t0, 9), round(t1, 9))
    attempt = hints.get(key, 0) if hints is not None else 0
    # Terminates: the fractions are dense in (0, 1) while the bans block only
    # finitely many duration matches, each a hairline of cut positions.
    while True:
        k, d = _fraction(attempt)
        cut = t0 + span * k / d
        first = cut - t0
        second = t1 - cut
        if (
            first > 0
            and second > 0
            and not table.wait_ban_hit(vertex, first, t0)
            and not table.wait_ban_hit(vertex, second, cut)
        ):
            if hints is not None:
                hints[key] = attempt
            return [
                TimedMotion(vertex, vertex, t0, first),
                TimedMotion(vertex, vertex, cut, second),
            ]
        attempt += 1


# ---------------------------------------------------------------------------
# Unit-wait lattice search (discrete-time semantics)
# ---------------------------------------------------------------------------


def _vrc_windows(constraints: list[Constraint]) -> dict[str, list[TimeInterval]]:
    vrcs: dict[str, list[TimeInterval]] = {}
    for k in constraints:
        if isinstance(k, VertexRangeConstraint):
            vrcs.setdefault(k.vertex, []).append(k.window)
    return vrcs


def _presence_ok(windows: list[TimeInterval], lo: float, hi: float) -> bool:
    """No open ban window meets the closed occupancy [lo, hi] (hi may be inf)."""
    span = (
        TimeInterval.half_open(lo, UNBOUNDED) if hi == UNBOUNDED else TimeInterval.closed(lo, hi)
    )
    return not any(span.overlaps(w) for w in windows)


_LATTICE_NODE_BUDGET = 500_000


def _lattice_search(
    inst: Instance, start: str, goal: str, constraints: list[Constraint], unit: float
) -> list[TimedMotion] | None:
    """Exact best-first search over arrival + k*unit departure times.

    Interval dominance is unsound on the lattice (two arrival times in one
    safe interval can reach different lattices), so states are exact
    ``(vertex, time, arrived-by-move)`` triples.  Waiting is capped at the
    horizon past every finite constraint endpoint: beyond it the world is
    time-invariant and further waiting cannot unlock anything.
    """
    table = build_safe_intervals(constraints)
    vrcs = _vrc_windows(constraints)
    h = admissible_heuristic(inst, goal)
    if h[start] == UNBOUNDED:
        return None

    endpoints = [0.0]
    for k in constraints:
        window = k.window
        if math.isfinite(window.hi):
            endpoints.append(window.hi)
        endpoints.append(window.lo)
    horizon = max(endpoints) + unit
    # Beyond the horizon every constraint is static, so a feasible plan never
    # needs more than a simple path's travel past it; pruning later arrivals
    # makes infeasibility decidable instead of an endless move cycle.
    move_limit = horizon + sum(inst.edge_lengths.values()) + unit

    def unit_wait_ok(vertex: str, t: float) -> bool:
        if table.wait_ban_hit(vertex, unit, t):
            return False
        return _presence_ok(vrcs.get(vertex, []), t, t + unit)

    def rest_from(vertex: str, t: float) -> float | None:
        """Earliest legal rest start on t + k*unit, waits included; else None."""
        tau = t
        while True:
            ok_rest = not any(w.contains(tau) for w in table.rest_bans.get(vertex, ()))
            if ok_rest and _presence_ok(vrcs.get(vertex, []), tau, UNBOUNDED):
                return tau
            if not unit_wait_ok(vertex, tau):
                return None
            tau += unit
            if tau > horizon + unit:
                return None

    counter = itertools.count()
    start_state = (start, round(0.0, 9), True)
    came: dict[tuple, tuple[tuple | None, str]] = {start_state: (None, "start")}
    times: dict[tuple, float] = {start_state: 0.0}
    heap = [(h[start], 0.0, start, next(counter), start_state)]
    popped = 0
    while heap:
        f, neg_g, vertex, _, state = heapq.heappop(heap)
        t = times[state]
        if -neg_g > t:
            continue
        popped += 1
        if popped > _LATTICE_NODE_BUDGET:
            raise RuntimeError(
                "unit-lattice search exceeded its node budget; cannot certify a result"
            )
        by_move = state[2]
        if vertex == goal and by_move:
            rest = rest_from(vertex, t)
            if rest is not None:
                motions: list[TimedMotion] = []
                cursor: tuple | None = state
                while cursor is not None:
                    prev, kind = came[cursor]
                    if kind == "move":
                        motions.append(
                            TimedMotion(prev[0], cursor[0], times[prev], times[cursor] - times[prev])
                        )
                    elif kind == "wait":
                        motions.append(TimedMotion(cursor[0], cursor[0], times[prev], unit))
                    cursor = prev
                motions.reverse()
                tau = t
                while tau < rest - unit / 2:
                    motions.append(TimedMotion(goal, goal, tau, unit))
                    tau += unit
                motions.append(TimedMotion(goal, goal, rest, UNBOUNDED))
                return motions
        may_depart = not any(win.contains(t) for win in vrcs.get(vertex, []))
        for w, length in inst.adjacency[vertex] if may_depart else ():
            if any(win.contains(t) for win in table.edge_bans.get((vertex, w), ())):
                continue
            t_arr = t + length
            if t_arr > move_limit:
                continue
            if any(win.contains(t_arr) for win in vrcs.get(w, [])):
                continue
            hw = h[w]
            if hw == UNBOUNDED:
                continue
            nxt = (w, round(t_arr, 9), True)
            if t_arr < times.get(nxt, UNBOUNDED):
                times[nxt] = t_arr
                came[nxt] = (state, "move")
                heapq.heappush(heap, (t_arr + hw, -t_arr, w, next(counter), nxt))
        if t < horizon and unit_wait_ok(vertex, t):
            t_next = t + unit
            nxt = (vertex, round(t_next, 9), False)
            if t_next < times.get(nxt, UNBOUNDED):
                times[nxt] = t_next
                came[nxt] = (state, "wait")
                heapq.heappush(
                    heap, (t_next + h[vertex], -t_next, vertex, next(counter), nxt)
                )
    return None


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def plan(
    inst: Instance,
    agent_id: str,
    constraints: list[Constraint],
    mode: str = "continuous",
    unit: float = 1.0,
    repair_hints: dict | None = None,
    table: SafeIntervalTable | None = None,
) -> Plan | None:
    """Minimum-completion-time plan for one agent, or None when infeasible.

    Continuous and motion modes consult only the agent's own constraints,
    either filtered from ``constraints`` or — for callers that maintain
    tables incrementally across a search tree — passed prebuilt as ``table``,
    in which case ``constraints`` is ignored.
    """
    agent = inst.agent(agent_id)
    if mode == "dt":
        mine = [k for k in constraints if k.agent == agent_id]
        motions = _lattice_search(inst, agent.start, agent.goal, mine, unit)
        if motions is None:
            return None
        return Plan(agent_id, tuple(motions))
    if mode not in ("continuous", "motion"):
        raise ValueError(f"unknown planning mode {mode!r}")
    if table is None:
        table = build_safe_intervals([k for k in constraints if k.agent == agent_id])
    found = _interval_search(inst, agent.start, agent.goal, table)
    if found is None:
        return None
    route, rest_start = found
    motions = _route_to_motions(inst, route, rest_start)
    motions = _repair_runs(motions, table, repair_hints)
    return Plan(agent_id, tuple(motions))
