"""Line-oriented text formats for instances and solutions.

Both formats are human-diffable, start with a versioned header line, and
serialize every number with 12 significant digits so that parse(serialize(x))
round-trips exactly.  The full grammar is documented in ``docs/formats.md``.

Scenario files (``*.scn``)::

    mapfr-scenario v1
    radius 0.5
    vertex A 0 0
    vertex B 4 0
    edge A B 4
    agent a1 A B

Solution files (``*.sol``)::

    mapfr-solution v1
    plan a1
    wait A 0 0.5
    move A B 0.5 4
    rest B 4.5
    end

``wait`` lines carry start and duration; ``move`` lines carry start and
duration (the edge length); ``rest`` is the terminal unbounded wait and
carries only its start time.
"""

from __future__ import annotations

from .geometry import UNBOUNDED, Coordinate
from .model import Agent, Edge, Instance, Plan, Solution, TimedMotion, Vertex

SCENARIO_HEADER = "mapfr-scenario v1"
SOLUTION_HEADER = "mapfr-solution v1"


class ParseError(ValueError):
    """Malformed scenario/solution text; carries line number and field."""

    def __init__(self, message: str, line_no: int | None = None, field: str | None = None):
        self.line_no = line_no
        self.field = field
        where = f" (line {line_no})" if line_no is not None else ""
        what = f" [field: {field}]" if field else ""
        super().__init__(f"{message}{where}{what}")


def _fmt(x: float) -> str:
    if x == UNBOUNDED:
        return "inf"
    return format(x, ".12g")


def quantize(x: float) -> float:
    """Snap a value onto the 12-significant-digit serialization grid.

    Builders that want exact round-trips through the text formats should
    quantize derived quantities (edge lengths, wait endpoints) on
    construction.
    """
    if x == UNBOUNDED:
        return x
    return float(_fmt(x))


def _lines(text: str):
    """Yield (line_no, tokens) for non-blank, non-comment lines."""
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line.split()


def _number(token: str, line_no: int, field: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", line_no, field) from None


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def save_scenario(inst: Instance) -> str:
    out = [SCENARIO_HEADER, f"radius {_fmt(inst.radius)}"]
    for v in inst.vertices:
        out.append(f"vertex {v.id} {_fmt(v.coordinate.x)} {_fmt(v.coordinate.y)}")
    for e in inst.edges:
        out.append(f"edge {e.u} {e.v} {_fmt(e.length)}")
    for a in inst.agents:
        out.append(f"agent {a.id} {a.start} {a.goal}")
    return "\n".join(out) + "\n"


def load_scenario(text: str) -> Instance:
    lines = list(_lines(text))
    if not lines or lines[0][1] != SCENARIO_HEADER.split():
        raise ParseError(f"missing header {SCENARIO_HEADER!r}", 1, "header")
    radius: float | None = None
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    agents: list[Agent] = []
    for line_no, tok in lines[1:]:
        kind = tok[0]
        if kind == "radius":
            if len(tok) != 2:
                raise ParseError("radius takes one value", line_no, "radius")
            radius = _number(tok[1], line_no, "radius")
        elif kind == "vertex":
            if len(tok) != 4:
                raise ParseError("vertex takes id, x, y", line_no, "vertex")
            vertices.append(
                Vertex(tok[1], Coordinate(_number(tok[2], line_no, "x"), _number(tok[3], line_no, "y")))
            )
        elif kind == "edge":
            if len(tok) != 4:
                raise ParseError("edge takes u, v, length", line_no, "edge")
            edges.append(Edge(tok[1], tok[2], _number(tok[3], line_no, "length")))
        elif kind == "agent":
            if len(tok) != 4:
                raise ParseError("agent takes id, start, goal", line_no, "agent")
            agents.append(Agent(tok[1], tok[2], tok[3]))
        else:
            raise ParseError(f"unknown directive {kind!r}", line_no, kind)
    if radius is None:
        raise ParseError("radius required", None, "radius")
    return Instance(tuple(vertices), tuple(edges), tuple(agents), radius)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


def save_solution(sol: Solution) -> str:
    out = [SOLUTION_HEADER]
    for plan in sol.plans:
        out.append(f"plan {plan.agent}")
        for m in plan.motions:
            if m.is_rest:
                out.append(f"rest {m.source} {_fmt(m.start_time)}")
            elif m.is_wait:
                out.append(f"wait {m.source} {_fmt(m.start_time)} {_fmt(m.duration)}")
            else:
                out.append(
                    f"move {m.source} {m.target} {_fmt(m.start_time)} {_fmt(m.duration)}"
                )
        out.append("end")
    return "\n".join(out) + "\n"


def load_solution(text: str) -> Solution:
    lines = list(_lines(text))
    if not lines or lines[0][1] != SOLUTION_HEADER.split():
        raise ParseError(f"missing header {SOLUTION_HEADER!r}", 1, "header")
    plans: list[Plan] = []
    current_agent: str | None = None
    motions: list[TimedMotion] = []
    for line_no, tok in lines[1:]:
        kind = tok[0]
        if kind == "plan":
            if current_agent is not None:
                raise ParseError("nested plan block", line_no, "plan")
            if len(tok) != 2:
                raise ParseError("plan takes an agent id", line_no, "plan")
            current_agent = tok[1]
            motions = []
        elif kind == "end":
            if current_agent is None:
                raise ParseError("end outside a plan block", line_no, "end")
            plans.append(Plan(current_agent, tuple(motions)))
            current_agent = None
        elif kind in ("move", "wait", "rest"):
            if current_agent is None:
                raise ParseError(f"{kind} outside a plan block", line_no, kind)
            if kind == "move":
                if len(tok) != 5:
                    raise ParseError("move takes source, target, start, duration", line_no, "move")
                motions.append(
                    TimedMotion(
                        tok[1],
                        tok[2],
                        _number(tok[3], line_no, "start"),
                        _number(tok[4], line_no, "duration"),
                    )
                )
            elif kind == "wait":
                if len(tok) != 4:
                    raise ParseError("wait takes vertex, start, duration", line_no, "wait")
                motions.append(
                    TimedMotion(
                        tok[1],
                        tok[1],
                        _number(tok[2], line_no, "start"),
                        _number(tok[3], line_no, "duration"),
                    )
                )
            else:
                if len(tok) != 3:
                    raise ParseError("rest takes vertex and start", line_no, "rest")
                motions.append(
                    TimedMotion(tok[1], tok[1], _number(tok[2], line_no, "start"), UNBOUNDED)
                )
        else:
            raise ParseError(f"unknown directive {kind!r}", line_no, kind)
    if current_agent is not None:
        raise ParseError("unterminated plan block", None, "end")
    return Solution(tuple(plans))
