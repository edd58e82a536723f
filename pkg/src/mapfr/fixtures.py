"""Bundled worked instances, their reference solutions, and a random generator.

``corridor_instance`` is the two-agent corridor with a resting agent in the
mover's way: the canonical input for the non-termination and unsoundness
demos.  ``refuge_instance`` is the four-agent reconstruction on which the
presence-ban strategy terminates with a strictly suboptimal cost, together
with a hand-built cheaper solution (``refuge_handcrafted_solution``) that the
strategy provably discards.  ``random_instance`` produces small solvable
instances for oracle cross-checks, and ``random_dt_instance`` integer-length
variants on which the unit-wait time lattice closes.
"""

from __future__ import annotations

import math

import numpy as np

from .ccbs import oracle_dt
from .geometry import UNBOUNDED, Coordinate
from .io import quantize
from .model import Agent, Edge, Instance, Plan, Solution, TimedMotion, Vertex, validate_solution
from .sipp import plan as _plan


_CORRIDOR_LEG = 1300.0
_REFUGE_LEG = 1500.0


def corridor_instance() -> Instance:
    """Two agents on a straight corridor with one distant refuge.

    ``walker`` crosses A - B - D while ``sitter`` starts and ends at the
    middle vertex B, resting there from time zero.  Every plan for ``walker``
    passes within two radii of B, so the root solution always collides with
    the sitter's terminal wait.  All of the sitter's escapes are made very
    expensive: the refuge C hangs 1500 away, and the corridor legs themselves
    are 1300 long, so any child that sends the sitter anywhere costs at least
    2600 on top of the root's 2600.  Splitting strategies that delay the
    walker in sub-unit steps therefore keep cheap-but-conflicted nodes at the
    top of the frontier for well over five thousand expansions.
    """
    leg, refuge = _CORRIDOR_LEG, _REFUGE_LEG
    return Instance(
        vertices=(
            Vertex("A", Coordinate(0.0, 0.0)),
            Vertex("B", Coordinate(leg, 0.0)),
            Vertex("D", Coordinate(2.0 * leg, 0.0)),
            Vertex("C", Coordinate(leg, refuge)),
        ),
        edges=(
            Edge("A", "B", leg),
            Edge("B", "D", leg),
            Edge("B", "C", refuge),
        ),
        agents=(
            Agent("walker", "A", "D"),
            Agent("sitter", "B", "B"),
        ),
        radius=0.5,
    )


def dual_wait_witness() -> Solution:
    """A collision-free solution for :func:`corridor_instance` in which *both*
    agents keep waiting through the root conflict's collision window.

    The walker holds at A until just after the sitter has left for the
    refuge, then crosses; the sitter holds at B through the root conflict's
    collision window before riding out to the refuge and back.  The pair
    violates both constraints of the presence-ban split of the root conflict
    — the walker starts the banned move (its ban window is all of time), the
    sitter is present at B during the banned window — yet the validator finds
    no collision, so that split eliminates a feasible solution.
    """
    leg, refuge = _CORRIDOR_LEG, _REFUGE_LEG
    walker_start = leg + 1.0
    sitter_start = leg + 0.2
    walker = Plan(
        "walker",
        (
            TimedMotion("A", "A", 0.0, walker_start),
            TimedMotion("A", "B", walker_start, leg),
            TimedMotion("B", "D", walker_start + leg, leg),
            TimedMotion("D", "D", walker_start + 2.0 * leg, UNBOUNDED),
        ),
    )
    sitter = Plan(
        "sitter",
        (
            TimedMotion("B", "B", 0.0, sitter_start),
            TimedMotion("B", "C", sitter_start, refuge),
            TimedMotion("C", "B", sitter_start + refuge, refuge),
            TimedMotion("B", "B", sitter_start + 2.0 * refuge, UNBOUNDED),
        ),
    )
    return Solution((walker, sitter))


# Angle parameters of the four-agent reconstruction.  The A-C and C-D legs
# bend 120 degrees at C (up-left and up-right at 30 degrees elevation); the
# F-E-G spur leaves F just below horizontal-west so the through-traffic at F
# clears the refuge corridor.
_SPUR_DY = -0.140021


def refuge_instance() -> Instance:
    """Four agents around a bottleneck vertex C with a refuge spur.

    One agent sweeps A - C - D across the top; a second starts two hops below
    C and ends at C; two more feed through the junction F from a western
    spur.  The cheapest collision-free coordination makes the second agent
    occupy C early, dip back toward F while the sweeper passes, and return —
    a solution every presence-ban split discards, which is what the fixture
    exists to demonstrate.
    """
    cos30 = math.sqrt(3.0) / 2.0
    ux = -math.sqrt(1.0 - _SPUR_DY * _SPUR_DY)
    f = Coordinate(0.0, -1.1)

    def at(x: float, y: float) -> Coordinate:
        # Quantized so the bundled scenario file round-trips this instance
        # exactly; the embedded distances move by < 1e-11, far inside the
        # validator's length tolerance.
        return Coordinate(quantize(x), quantize(y))

    vertices = (
        Vertex("A", at(-4.8 * cos30, 2.4)),
        Vertex("B", at(0.0, -3.1)),
        Vertex("C", at(0.0, 0.0)),
        Vertex("D", at(4.0 * cos30, 2.0)),
        Vertex("E", at(f.x + 4.0 * ux, f.y + 4.0 * _SPUR_DY)),
        Vertex("F", f),
        Vertex("G", at(f.x + 5.5 * ux, f.y + 5.5 * _SPUR_DY)),
        Vertex("H", at(0.0, -4.2)),
    )
    edges = (
        Edge("A", "C", 4.8),
        Edge("C", "D", 4.0),
        Edge("C", "F", 1.1),
        Edge("F", "B", 2.0),
        Edge("F", "E", 4.0),
        Edge("E", "G", 1.5),
        Edge("B", "H", 1.1),
    )
    agents = (
        Agent("a1", "A", "D"),
        Agent("a2", "B", "C"),
        Agent("a3", "E", "H"),
        Agent("a4", "G", "B"),
    )
    return Instance(vertices, edges, agents, 0.5)


def refuge_handcrafted_solution() -> Solution:
    """The hand-built coordination for :func:`refuge_instance`, SIC 32.08.

    a2 takes the bottleneck C early, vacates it toward F while a1 sweeps
    through, pauses below the junction while a3 clears it, and returns.  The
    tightest clearance is a2's descent past a3's arrival at F (margin 0.02);
    every other pair clears by at least 0.1.
    """
    a1 = Plan(
        "a1",
        (
            TimedMotion("A", "A", 0.0, 0.5),
            TimedMotion("A", "C", 0.5, 4.8),
            TimedMotion("C", "D", 5.3, 4.0),
            TimedMotion("D", "D", 9.3, UNBOUNDED),
        ),
    )
    a2 = Plan(
        "a2",
        (
            TimedMotion("B", "F", 0.0, 2.0),
            TimedMotion("F", "C", 2.0, 1.1),
            TimedMotion("C", "C", 3.1, 0.82),
            TimedMotion("C", "F", 3.92, 1.1),
            TimedMotion("F", "F", 5.02, 0.56),
            TimedMotion("F", "C", 5.58, 1.1),
            TimedMotion("C", "C", 6.68, UNBOUNDED),
        ),
    )
    a3 = Plan(
        "a3",
        (
            TimedMotion("E", "F", 0.0, 4.0),
            TimedMotion("F", "B", 4.0, 2.0),
            TimedMotion("B", "H", 6.0, 1.1),
            TimedMotion("H", "H", 7.1, UNBOUNDED),
        ),
    )
    a4 = Plan(
        "a4",
        (
            TimedMotion("G", "E", 0.0, 1.5),
            TimedMotion("E", "E", 1.5, 1.5),
            TimedMotion("E", "F", 3.0, 4.0),
            TimedMotion("F", "B", 7.0, 2.0),
            TimedMotion("B", "B", 9.0, UNBOUNDED),
        ),
    )
    return Solution((a1, a2, a3, a4))


def random_instance(
    seed: int,
    n_vertices: int = 6,
    n_agents: int = 3,
    radius: float = 0.3,
) -> Instance:
    """A small connected instance with well-separated vertices.

    Vertices are sampled in a 10 x 10 box with pairwise separation at least
    2.0 (comfortably above two radii, so agents can pass each other at
    adjacent vertices); edges are a random spanning tree plus a few chords,
    with lengths set to the embedded distances.  Starts are distinct, goals
    are distinct.  Deterministic in ``seed``.
    """
    if 2 * n_agents > n_vertices:
        raise ValueError("need at least two vertices per agent")
    rng = np.random.default_rng(seed)
    while True:
        pts: list[tuple[float, float]] = []
        attempts = 0
        while len(pts) < n_vertices and attempts < 400:
            attempts += 1
            x, y = rng.uniform(0.0, 10.0, size=2)
            if all(math.dist((x, y), p) >= 2.0 for p in pts):
                pts.append((float(x), float(y)))
        if len(pts) == n_vertices:
            break
    names = [f"v{i}" for i in range(n_vertices)]
    vertices = tuple(
        Vertex(name, Coordinate(x, y)) for name, (x, y) in zip(names, pts)
    )
    chosen: dict[tuple[int, int], float] = {}
    order = [int(i) for i in rng.permutation(n_vertices)]
    for a, b in zip(order, order[1:]):
        i, j = min(a, b), max(a, b)
        chosen[(i, j)] = quantize(math.dist(pts[i], pts[j]))
    for _ in range(int(rng.integers(1, n_vertices))):
        a, b = rng.choice(n_vertices, size=2, replace=False)
        i, j = int(min(a, b)), int(max(a, b))
        chosen[(i, j)] = quantize(math.dist(pts[i], pts[j]))
    edges = tuple(Edge(names[i], names[j], L) for (i, j), L in sorted(chosen.items()))
    slots = [int(i) for i in rng.permutation(n_vertices)]
    agents = tuple(
        Agent(f"a{k+1}", names[slots[k]], names[slots[n_agents + k]])
        for k in range(n_agents)
    )
    return Instance(vertices, edges, agents, radius)


def random_dt_instance(
    seed: int,
    n_vertices: int = 6,
    n_agents: int = 3,
    radius: float = 0.4,
) -> Instance:
    """A small connected instance whose edge lengths are all integers.

    With integer lengths and unit waits every reachable event time is an
    integer, so the unit-wait time lattice closes and both the lattice
    planner and the joint brute-force oracle stay desk-scale.  Vertices
    occupy distinct cells of a 3 x 3 grid with spacing 2; edges join
    consecutive chosen cells along rows and columns, making every length the
    exact (integer) embedded distance.  Samples are redrawn until the grid
    graph is connected and every agent can reach its goal without entering
    any *other agent's goal*: a terminal rest is a permanent wall, so a goal
    sitting on somebody's only corridor would make the instance an unsolvable
    parking puzzle (starts need no such care — their owners move away).
    Among admissible start/goal assignments, ones whose independent optimal
    plans actually collide are preferred (tried first, falling back to an
    admissible conflict-free assignment), so the instances exercise conflict
    resolution rather than solving at the root.  A conflicted assignment is
    accepted only if the joint brute-force optimum stays within a small
    slack of the independent sum: best-first splitting is exponential in how
    far the optimum sits above the root, so tightly coupled parking puzzles
    (joint optimum far above independent cost) would dominate the runtime of
    any consumer that resolves the instance.  Deterministic in ``seed``.
    """
    if 2 * n_agents > n_vertices:
        raise ValueError("need at least two vertices per agent")
    if n_vertices > 9:
        raise ValueError("the 3 x 3 cell grid holds at most 9 vertices")
    rng = np.random.default_rng(seed)
    cells = [(2.0 * i, 2.0 * j) for i in range(3) for j in range(3)]
    while True:
        picked = sorted(int(i) for i in rng.choice(9, size=n_vertices, replace=False))
        pts = [cells[i] for i in picked]
        pairs: set[tuple[int, int]] = set()
        for axis in (0, 1):
            lanes: dict[float, list[int]] = {}
            for idx, p in enumerate(pts):
                lanes.setdefault(p[1 - axis], []).append(idx)
            for lane in lanes.values():
                lane.sort(key=lambda idx: pts[idx][axis])
                pairs.update(zip(lane, lane[1:]))
        adjacency: dict[int, list[int]] = {i: [] for i in range(n_vertices)}
        for a, b in pairs:
            adjacency[a].append(b)
            adjacency[b].append(a)

        def reachable(source: int, blocked: set[int]) -> set[int]:
            if source in blocked:
                return set()
            reached = {source}
            frontier = [source]
            while frontier:
                v = frontier.pop()
                for w in adjacency[v]:
                    if w not in reached and w not in blocked:
                        reached.add(w)
                        frontier.append(w)
            return reached

        if len(reachable(0, set())) != n_vertices:
            continue

        names = [f"v{i}" for i in range(n_vertices)]
        vertices = tuple(
            Vertex(name, Coordinate(x, y)) for name, (x, y) in zip(names, pts)
        )
        edges = tuple(
            Edge(names[i], names[j], float(round(math.dist(pts[i], pts[j]))))
            for i, j in sorted(pairs)
        )

        fallback: Instance | None = None
        for _ in range(40):
            slots = [int(i) for i in rng.permutation(n_vertices)]
            endpoints = [(slots[k], slots[n_agents + k]) for k in range(n_agents)]
            admissible = all(
                goal
                in reachable(
                    start,
                    {g for j, (_, g) in enumerate(endpoints) if j != k},
                )
                for k, (start, goal) in enumerate(endpoints)
            )
            if not admissible:
                continue
            agents = tuple(
                Agent(f"a{k+1}", names[start], names[goal])
                for k, (start, goal) in enumerate(endpoints)
            )
            candidate = Instance(vertices, edges, agents, radius)
            independent = Solution(
                tuple(_plan(candidate, a.id, [], mode="dt", unit=1.0) for a in agents)
            )
            if validate_solution(candidate, independent):
                if oracle_dt(candidate, 1.0, bound=independent.sic + 6.0) is not None:
                    return candidate
            elif fallback is None:
                fallback = candidate
        if fallback is not None:
            return fallback
