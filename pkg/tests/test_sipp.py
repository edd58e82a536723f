"""Single-agent planner tests: examples, infeasibility, and oracle sweeps."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mapfr.constraints import (
    MotionConstraint,
    VertexRangeConstraint,
    satisfies,
)
from mapfr.geometry import UNBOUNDED, Coordinate, TimeInterval
from mapfr.model import Agent, Edge, Instance, Plan, Vertex, plan_violations
from mapfr.sipp import (
    admissible_heuristic,
    build_safe_intervals,
    plan,
)

import oracles


def path_instance(*lengths: float) -> Instance:
    """A chain v0 - v1 - ... with the given edge lengths, agent v0 -> last."""
    xs = [0.0]
    for L in lengths:
        xs.append(xs[-1] + L)
    vertices = tuple(Vertex(f"v{i}", Coordinate(x, 0.0)) for i, x in enumerate(xs))
    edges = tuple(
        Edge(f"v{i}", f"v{i+1}", lengths[i]) for i in range(len(lengths))
    )
    agents = (Agent("a", "v0", f"v{len(lengths)}"),)
    return Instance(vertices, edges, agents, 0.25)


# ---------------------------------------------------------------------------
# Heuristic and table examples
# ---------------------------------------------------------------------------


def test_heuristic_values():
    inst = Instance(
        vertices=(
            Vertex("A", Coordinate(0, 0)),
            Vertex("B", Coordinate(4, 0)),
            Vertex("C", Coordinate(4, 3)),
            Vertex("X", Coordinate(50, 50)),
        ),
        edges=(Edge("A", "B", 4.0), Edge("B", "C", 3.0)),
        agents=(Agent("a", "A", "C"),),
        radius=0.5,
    )
    h = admissible_heuristic(inst, "C")
    assert h["C"] == 0.0
    assert h["B"] == 3.0
    assert h["A"] == 7.0
    assert h["X"] == UNBOUNDED


def test_table_no_constraints_everything_free():
    table = build_safe_intervals([])
    assert table.presence_at("anything") == (TimeInterval(0.0, UNBOUNDED, True, False),)
    assert table.edge_bans == {}


def test_table_vertex_ban_complement():
    table = build_safe_intervals(
        [VertexRangeConstraint("a", "v", TimeInterval.open(2.0, 5.0))]
    )
    first, second = table.presence_at("v")
    assert (first.lo, first.hi) == (0.0, 2.0) and first.lo_closed and first.hi_closed
    assert (second.lo, second.hi) == (5.0, UNBOUNDED) and second.lo_closed


def test_table_adjacent_bans_leave_degenerate_point():
    table = build_safe_intervals(
        [
            VertexRangeConstraint("a", "v", TimeInterval.open(1.0, 2.0)),
            VertexRangeConstraint("a", "v", TimeInterval.open(2.0, 3.0)),
            VertexRangeConstraint("a", "v", TimeInterval.open(1.5, 2.5)),
        ]
    )
    ivs = table.presence_at("v")
    assert [(iv.lo, iv.hi) for iv in ivs] == [(0.0, 1.0), (3.0, UNBOUNDED)]
    table2 = build_safe_intervals(
        [
            VertexRangeConstraint("a", "v", TimeInterval.open(1.0, 2.0)),
            VertexRangeConstraint("a", "v", TimeInterval.open(2.0, 3.0)),
        ]
    )
    ivs2 = table2.presence_at("v")
    assert [(iv.lo, iv.hi) for iv in ivs2] == [(0.0, 1.0), (2.0, 2.0), (3.0, UNBOUNDED)]


def test_table_full_edge_ban():
    k = MotionConstraint("a", "u", "w", None, TimeInterval.half_open(0.0, UNBOUNDED))
    table = build_safe_intervals([k])
    assert table.edge_bans[("u", "w")][0].hi == UNBOUNDED
    assert ("w", "u") not in table.edge_bans  # direction-exact


# ---------------------------------------------------------------------------
# plan() examples
# ---------------------------------------------------------------------------


def test_plan_unconstrained_straight_line():
    inst = path_instance(4.0)
    p = plan(inst, "a", [])
    assert p is not None
    assert [m.is_move for m in p.motions] == [True, False]
    assert p.completion_time == 4.0
    assert plan_violations(inst, p) == []


def test_plan_vertex_ban_delays_departure():
    inst = path_instance(4.0)
    ban = VertexRangeConstraint("a", "v1", TimeInterval.open(0.0, 6.0))
    p = plan(inst, "a", [ban], mode="continuous")
    assert p is not None
    waits = [m for m in p.motions if m.is_wait and m.duration != UNBOUNDED]
    assert len(waits) == 1 and waits[0].source == "v0"
    assert waits[0].start_time == 0.0 and waits[0].duration == pytest.approx(2.0)
    move = next(m for m in p.motions if m.is_move)
    assert move.start_time == pytest.approx(2.0)
    assert p.completion_time == pytest.approx(6.0)
    assert satisfies(p, ban)


def test_plan_motion_mode_midpoint_split():
    inst = path_instance(4.0)
    delay = VertexRangeConstraint("a", "v1", TimeInterval.open(0.0, 6.0))
    ban = MotionConstraint("a", "v0", "v0", 2.0, TimeInterval.half_open(0.0, 1.0))
    p = plan(inst, "a", [delay, ban], mode="motion")
    assert p is not None
    waits = [m for m in p.motions if m.is_wait and m.duration != UNBOUNDED]
    assert [(w.start_time, w.duration) for w in waits] == [(0.0, 1.0), (1.0, 1.0)]
    assert p.completion_time == pytest.approx(6.0)  # cost unchanged by the split
    assert satisfies(p, ban) and satisfies(p, delay)
    assert plan_violations(inst, p) == []


def test_plan_rest_ban_pushes_rest_not_cost():
    inst = path_instance(4.0)
    ban = MotionConstraint("a", "v1", "v1", UNBOUNDED, TimeInterval.half_open(0.0, 9.0))
    p = plan(inst, "a", [ban], mode="motion")
    assert p is not None
    assert p.completion_time == 4.0  # goal waits are free
    rest = p.motions[-1]
    assert rest.is_rest and rest.start_time == pytest.approx(9.0)
    assert satisfies(p, ban)


def test_plan_infeasible_cases():
    inst = path_instance(4.0)
    eternal = VertexRangeConstraint("a", "v1", TimeInterval.open(1.0, UNBOUNDED))
    assert plan(inst, "a", [eternal]) is None
    edge_ban = MotionConstraint("a", "v0", "v1", None, TimeInterval.half_open(0.0, UNBOUNDED))
    assert plan(inst, "a", [edge_ban]) is None
    # The reverse direction ban alone is harmless.
    back_ban = MotionConstraint("a", "v1", "v0", None, TimeInterval.half_open(0.0, UNBOUNDED))
    assert plan(inst, "a", [back_ban]) is not None


def test_plan_detour_beats_waiting():
    # Two routes to the goal; a long ban on the short route's midpoint makes
    # the detour optimal.
    vertices = (
        Vertex("S", Coordinate(0.0, 0.0)),
        Vertex("M", Coordinate(2.0, 0.0)),
        Vertex("G", Coordinate(4.0, 0.0)),
        Vertex("D", Coordinate(2.0, 3.0)),
    )
    edges = (
        Edge("S", "M", 2.0),
        Edge("M", "G", 2.0),
        Edge("S", "D", math.dist((0, 0), (2, 3))),
        Edge("D", "G", math.dist((2, 3), (4, 0))),
    )
    inst = Instance(vertices, edges, (Agent("a", "S", "G"),), 0.3)
    ban = VertexRangeConstraint("a", "M", TimeInterval.open(0.0, 40.0))
    p = plan(inst, "a", [ban])
    assert p is not None
    assert p.completion_time == pytest.approx(2 * math.dist((0, 0), (2, 3)))
    assert {m.target for m in p.motions if m.is_move} == {"D", "G"}


def test_plan_dt_unit_waits_only():
    inst = path_instance(4.0)
    ban = VertexRangeConstraint("a", "v1", TimeInterval.open(0.0, 6.3))
    p = plan(inst, "a", [ban], mode="dt", unit=1.0)
    assert p is not None
    finite_waits = [m for m in p.motions if m.is_wait and m.duration != UNBOUNDED]
    assert finite_waits and all(w.duration == 1.0 for w in finite_waits)
    # Must wait at least 3 units so the arrival at 4+k clears 6.3.
    move = next(m for m in p.motions if m.is_move)
    assert move.start_time == pytest.approx(3.0)
    assert p.completion_time == pytest.approx(7.0)
    assert satisfies(p, ban)
    assert plan_violations(inst, p) == []


# ---------------------------------------------------------------------------
# Oracle sweeps
# ---------------------------------------------------------------------------


def random_planning_case(rng: np.random.Generator):
    n = int(rng.integers(3, 7))
    while True:
        pts = rng.uniform(-8.0, 8.0, size=(n, 2))
        ok = True
        for i in range(n):
            for j in range(i + 1, n):
                if math.dist(pts[i], pts[j]) < 0.5:
                    ok = False
        if ok:
            break
    vertices = tuple(
        Vertex(f"v{i}", Coordinate(float(x), float(y))) for i, (x, y) in enumerate(pts)
    )
    edges = {}
    order = rng.permutation(n)
    for a, b in zip(order, order[1:]):  # random spanning tree
        i, j = int(min(a, b)), int(max(a, b))
        edges[(i, j)] = math.dist(pts[i], pts[j])
    for _ in range(int(rng.integers(0, 4))):
        i, j = sorted(rng.choice(n, size=2, replace=False))
        edges[(int(i), int(j))] = math.dist(pts[int(i)], pts[int(j)])
    edge_objs = tuple(Edge(f"v{i}", f"v{j}", L) for (i, j), L in sorted(edges.items()))
    inst = Instance(vertices, edge_objs, (Agent("a", "v0", f"v{n-1}"),), 0.25)

    constraints = []
    for _ in range(int(rng.integers(0, 7))):
        kind = rng.random()
        lo = float(rng.uniform(0.0, 10.0))
        width = float(rng.uniform(0.3, 6.0))
        if kind < 0.45:
            v = f"v{int(rng.integers(0, n))}"
            constraints.append(
                VertexRangeConstraint("a", v, TimeInterval.open(lo, lo + width))
            )
        elif kind < 0.75:
            (i, j) = list(edges.keys())[int(rng.integers(0, len(edges)))]
            u, w = (f"v{i}", f"v{j}") if rng.random() < 0.5 else (f"v{j}", f"v{i}")
            constraints.append(
                MotionConstraint("a", u, w, None, TimeInterval.half_open(lo, lo + width))
            )
        elif kind < 0.9:
            v = f"v{int(rng.integers(0, n))}"
            dur = float(rng.uniform(0.3, 3.0))
            constraints.append(
                MotionConstraint("a", v, v, dur, TimeInterval.half_open(lo, lo + width))
            )
        else:
            constraints.append(
                MotionConstraint(
                    "a", f"v{n-1}", f"v{n-1}", UNBOUNDED, TimeInterval.half_open(lo, lo + width)
                )
            )
    return inst, constraints


def _oracle_continuous(inst: Instance, constraints) -> float:
    """Exhaustive event-lattice optimum for the continuous planner."""
    vrcs: dict[str, list[TimeInterval]] = {}
    edge_windows: dict[tuple[str, str], list[TimeInterval]] = {}
    rest_windows: dict[str, list[TimeInterval]] = {}
    points: list[float] = [0.0]
    for k in constraints:
        points.append(k.window.lo)
        if math.isfinite(k.window.hi):
            points.extend([k.window.hi, math.nextafter(k.window.hi, math.inf)])
        if isinstance(k, VertexRangeConstraint):
            vrcs.setdefault(k.vertex, []).append(k.window)
        elif k.wait_duration is None:
            edge_windows.setdefault((k.source, k.target), []).append(k.window)
        elif k.wait_duration == UNBOUNDED:
            rest_windows.setdefault(k.source, []).append(k.window)
        # finite wait bans never affect completion

    graph = {v.id: list(inst.adjacency[v.id]) for v in inst.vertices}
    max_endpoint = max((p for p in points if math.isfinite(p)), default=0.0)
    horizon = max_endpoint + 2.0 * sum(e.length for e in inst.edges) + 5.0

    def clear_at(v: str, t: float) -> bool:
        return not any(w.contains(t) for w in vrcs.get(v, []))

    def departures(u: str, w: str, earliest: float):
        length = inst.edge_lengths[(u, w) if u <= w else (w, u)]
        cands = {earliest}
        for p in points:
            if p >= earliest:
                cands.add(p)
            if p - length >= earliest:
                cands.add(p - length)
        out = []
        for dep in sorted(cands):
            if any(win.contains(dep) for win in edge_windows.get((u, w), [])):
                continue
            if not clear_at(u, dep) or not clear_at(w, dep + length):
                continue
            out.append(dep)
        return out

    def presence_ok(v: str, t0: float, t1: float) -> bool:
        if t1 <= t0:
            return True
        span = TimeInterval.closed(t0, t1)
        return not any(span.overlaps(w) for w in vrcs.get(v, []))

    def rest_ok(v: str, t: float) -> bool:
        tau = t
        for _ in range(50):
            blocked = next(
                (w for w in rest_windows.get(v, []) if w.contains(tau)), None
            )
            if blocked is not None:
                if blocked.hi == UNBOUNDED:
                    return False
                tau = blocked.hi if not blocked.hi_closed else math.nextafter(blocked.hi, math.inf)
                continue
            bad_vrc = next(
                (w for w in vrcs.get(v, []) if w.hi > tau), None
            )
            if bad_vrc is not None:
                if bad_vrc.hi == UNBOUNDED:
                    return False
                tau = bad_vrc.hi
                continue
            return presence_ok(v, t, tau)
        return False

    agent = inst.agents[0]
    return oracles.lattice_best_completion(
        graph, agent.start, agent.goal, departures, presence_ok, rest_ok, horizon
    )


def test_continuous_mode_matches_event_lattice_oracle():
    rng = np.random.default_rng(411)
    checked_feasible = 0
    for _ in range(100):
        inst, constraints = random_planning_case(rng)
        p = plan(inst, "a", constraints, mode="motion")
        expected = _oracle_continuous(inst, constraints)
        if p is None:
            assert expected == math.inf
            continue
        checked_feasible += 1
        assert plan_violations(inst, p) == []
        for k in constraints:
            assert satisfies(p, k), f"violated {k}"
        assert p.completion_time == pytest.approx(expected, abs=1e-6)
    assert checked_feasible > 50


def _oracle_dt(inst: Instance, constraints, unit: float) -> float:
    vrcs: dict[str, list[TimeInterval]] = {}
    edge_windows: dict[tuple[str, str], list[TimeInterval]] = {}
    rest_windows: dict[str, list[TimeInterval]] = {}
    wait_bans: dict[str, list[MotionConstraint]] = {}
    max_endpoint = 0.0
    for k in constraints:
        if math.isfinite(k.window.hi):
            max_endpoint = max(max_endpoint, k.window.hi)
        max_endpoint = max(max_endpoint, k.window.lo)
        if isinstance(k, VertexRangeConstraint):
            vrcs.setdefault(k.vertex, []).append(k.window)
        elif k.wait_duration is None:
            edge_windows.setdefault((k.source, k.target), []).append(k.window)
        elif k.wait_duration == UNBOUNDED:
            rest_windows.setdefault(k.source, []).append(k.window)
        else:
            wait_bans.setdefault(k.source, []).append(k)

    horizon = max_endpoint + unit + 2.0 * sum(e.length for e in inst.edges) + 5.0
    wait_horizon = max_endpoint + 2.0 * unit

    def clear_at(v: str, t: float) -> bool:
        return not any(w.contains(t) for w in vrcs.get(v, []))

    def unit_wait_ok(v: str, t: float) -> bool:
        for k in wait_bans.get(v, []):
            if abs(k.wait_duration - unit) <= 1e-9 and k.window.contains(t):
                return False
        span = TimeInterval.closed(t, t + unit)
        return not any(span.overlaps(w) for w in vrcs.get(v, []))

    def presence_ok(v: str, t0: float, t1: float) -> bool:
        steps = round((t1 - t0) / unit)
        return all(unit_wait_ok(v, t0 + i * unit) for i in range(steps))

    def departures(u: str, w: str, earliest: float):
        length = inst.edge_lengths[(u, w) if u <= w else (w, u)]
        out = []
        dep = earliest
        while dep <= min(horizon, earliest + max(wait_horizon - earliest, 0.0) + unit):
            good = (
                not any(win.contains(dep) for win in edge_windows.get((u, w), []))
                and clear_at(u, dep)
                and clear_at(w, dep + length)
            )
            if good:
                out.append(dep)
            dep += unit
        return out

    def rest_ok(v: str, t: float) -> bool:
        tau = t
        while True:
            rest_clear = not any(w.contains(tau) for w in rest_windows.get(v, []))
            vrc_clear = not any(w.hi > tau for w in vrcs.get(v, []))
            if rest_clear and vrc_clear:
                return True
            if tau > wait_horizon + unit or not unit_wait_ok(v, tau):
                return False
            tau += unit

    graph = {v.id: list(inst.adjacency[v.id]) for v in inst.vertices}
    agent = inst.agents[0]
    return oracles.lattice_best_completion(
        graph, agent.start, agent.goal, departures, presence_ok, rest_ok, horizon
    )


def test_dt_mode_matches_unit_lattice_oracle():
    rng = np.random.default_rng(905)
    checked_feasible = 0
    for _ in range(60):
        inst, constraints = random_planning_case(rng)
        p = plan(inst, "a", constraints, mode="dt", unit=1.0)
        expected = _oracle_dt(inst, constraints, 1.0)
        if p is None:
            assert expected == math.inf
            continue
        checked_feasible += 1
        assert plan_violations(inst, p) == []
        for k in constraints:
            assert satisfies(p, k), f"violated {k}"
        finite_waits = [m for m in p.motions if m.is_wait and m.duration != UNBOUNDED]
        assert all(abs(w.duration - 1.0) <= 1e-12 for w in finite_waits)
        assert p.completion_time == pytest.approx(expected, abs=1e-6)
    assert checked_feasible > 30
