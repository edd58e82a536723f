"""Constraint models for resolving collisions between pairs of timed motions.

Three families of constraints are provided, each a different way of turning
one detected collision into a pair of restrictions on the two agents:

* :func:`split_motion` — each agent is forbidden from *starting* its exact
  motion (same edge and direction, or same vertex and exact wait duration)
  anywhere in the maximal unsafe departure interval.  Sound, but an agent can
  slip past a wait-signature ban by re-cutting the same idle time into waits
  of different durations, so a search over these constraints need not
  terminate.
* :func:`split_vertex_range` — when one motion is a wait, the waiting agent
  is banned from the vertex for the whole open collision window while the
  moving agent gets a motion constraint.  Terminating, but the vertex ban is
  wider than necessary and can forbid collision-free (even better) solutions.
* :func:`split_shifting` — a parameterized compromise: the mover may not
  depart within ``delta`` of its original departure, and the waiter must
  vacate the vertex only for the part of the collision window that survives
  every such shift.  Both bans are tight (:func:`check_shifting_sound`), yet
  for every ``delta > 0`` the original collision survives in the waiter's
  child (:func:`residual_conflict`), so branching on them loops as well.

Constraint windows use the conventions of :mod:`mapfr.geometry`: bans on
departure times are half-open ``[t, t')`` (closed for the shift window),
bans on vertex presence are open ``(t, t')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import EPS, UNBOUNDED, TimeInterval, unsafe_interval
from .model import Conflict, Instance, Plan, TimedMotion, motion_segment

__all__ = [
    "Constraint",
    "MotionConstraint",
    "NotApplicableError",
    "ShiftParameters",
    "SoundnessReport",
    "VertexRangeConstraint",
    "check_shifting_sound",
    "residual_conflict",
    "shift_parameters",
    "split_motion",
    "split_shifting",
    "split_vertex_range",
    "satisfies",
]


class NotApplicableError(ValueError):
    """The requested split does not apply to this kind of conflict."""


@dataclass(frozen=True)
class MotionConstraint:
    """Forbids one agent from starting one specific motion during a window.

    The signature is a directed edge (``source != target``) or a wait at a
    vertex with an exact duration (``source == target``; ``wait_duration``
    may be :data:`UNBOUNDED` for a terminal rest).  A wait of any *other*
    duration at the same vertex is a different motion and is not restricted.
    """

    agent: str
    source: str
    target: str
    wait_duration: float | None
    window: TimeInterval

    def __post_init__(self) -> None:
        if (self.source == self.target) != (self.wait_duration is not None):
            raise ValueError("wait_duration must be set exactly for wait signatures")
        if self.wait_duration is not None and not self.wait_duration > 0:
            raise ValueError("wait signatures need a positive duration")

    @property
    def is_wait_signature(self) -> bool:
        return self.wait_duration is not None

    def matches(self, motion: TimedMotion) -> bool:
        """Signature equality: direction-exact for moves, duration-exact for waits."""
        if motion.source != self.source or motion.target != self.target:
            return False
        if self.wait_duration is None:
            return True
        if self.wait_duration == UNBOUNDED or motion.duration == UNBOUNDED:
            return self.wait_duration == motion.duration
        return abs(motion.duration - self.wait_duration) <= EPS

    def __str__(self) -> str:
        if self.is_wait_signature:
            dur = "inf" if self.wait_duration == UNBOUNDED else format(self.wait_duration, ".9g")
            sig = f"wait({self.source}, {dur})"
        else:
            sig = f"move({self.source}->{self.target})"
        return f"{self.agent}: no {sig} starting in {self.window}"


@dataclass(frozen=True)
class VertexRangeConstraint:
    """Forbids one agent from being present at a vertex during an open window.

    Presence means any wait whose closed occupancy span meets the window, or
    any move arriving at or departing from the vertex strictly inside it.
    """

    agent: str
    vertex: str
    window: TimeInterval

    def __post_init__(self) -> None:
        if self.window.hi_closed:
            raise ValueError("presence bans are open at their upper end")

    def __str__(self) -> str:
        return f"{self.agent}: not at {self.vertex} during {self.window}"


Constraint = MotionConstraint | VertexRangeConstraint


def _presence(motion: TimedMotion) -> TimeInterval:
    """Closed occupancy span of a wait (half-open to infinity for a rest)."""
    if motion.duration == UNBOUNDED:
        return TimeInterval.half_open(motion.start_time, UNBOUNDED)
    return TimeInterval.closed(motion.start_time, motion.end_time)


def satisfies(plan: Plan, constraint: Constraint) -> bool:
    """Whether a structurally valid plan respects one constraint."""
    if isinstance(constraint, MotionConstraint):
        return not any(
            constraint.matches(m) and constraint.window.contains(m.start_time)
            for m in plan.motions
        )
    for m in plan.motions:
        if m.is_wait:
            if m.source == constraint.vertex and _presence(m).overlaps(constraint.window):
                return False
        else:
            if m.source == constraint.vertex and constraint.window.contains(m.start_time):
                return False
            if m.target == constraint.vertex and constraint.window.contains(m.end_time):
                return False
    return True


# ---------------------------------------------------------------------------
# Splitting a conflict
# ---------------------------------------------------------------------------


def _halves(c: Conflict) -> tuple[tuple[str, TimedMotion], tuple[str, TimedMotion]]:
    return (c.agent_a, c.motion_a), (c.agent_b, c.motion_b)


def _signature_constraint(agent: str, motion: TimedMotion, window: TimeInterval) -> MotionConstraint:
    duration = motion.duration if motion.is_wait else None
    return MotionConstraint(agent, motion.source, motion.target, duration, window)


def _unsafe_window(inst: Instance, moving: TimedMotion, fixed: TimedMotion) -> TimeInterval:
    window = unsafe_interval(motion_segment(inst, moving), motion_segment(inst, fixed), inst.radius)
    if window is None:
        raise ValueError("conflicting motions produced an empty unsafe interval")
    return window


def split_motion(inst: Instance, c: Conflict) -> tuple[MotionConstraint, MotionConstraint]:
    """Both agents get their maximal unsafe departure interval, half-open."""
    (agent_a, motion_a), (agent_b, motion_b) = _halves(c)
    return (
        _signature_constraint(agent_a, motion_a, _unsafe_window(inst, motion_a, motion_b)),
        _signature_constraint(agent_b, motion_b, _unsafe_window(inst, motion_b, motion_a)),
    )


def _waiter_and_mover(c: Conflict) -> tuple[str, TimedMotion, str, TimedMotion]:
    first, second = _halves(c)
    waits = (first[1].is_wait, second[1].is_wait)
    if waits == (True, False):
        (waiter, wait), (mover, move) = first, second
    elif waits == (False, True):
        (mover, move), (waiter, wait) = first, second
    else:
        kind = "waits" if all(waits) else "moves"
        raise NotApplicableError(f"conflict between two {kind} has no wait/move split")
    return waiter, wait, mover, move


def split_vertex_range(
    inst: Instance, c: Conflict, *, extend_to_mover_start: bool = False
) -> tuple[VertexRangeConstraint, MotionConstraint]:
    """Waiter banned from the vertex over the whole open collision window.

    The mover's side is the same motion constraint as in :func:`split_motion`.
    Only defined for wait-vs-move conflicts; raises :class:`NotApplicableError`
    otherwise (callers fall back to :func:`split_motion`).

    ``extend_to_mover_start`` widens the presence ban to start (closed) at
    the mover's unsafe-departure start instead of the collision window's
    start.  That variant removes even more feasible plans; it exists only so
    demos can exhibit it and is never used by the solver.
    """
    waiter, wait, mover, move = _waiter_and_mover(c)
    mover_window = _unsafe_window(inst, move, wait)
    if extend_to_mover_start:
        ban = TimeInterval.half_open(min(mover_window.lo, c.interval.lo), c.interval.hi)
    else:
        ban = c.interval
    return (
        VertexRangeConstraint(waiter, wait.source, ban),
        _signature_constraint(mover, move, mover_window),
    )


@dataclass(frozen=True)
class ShiftParameters:
    """A split of one collision window into a shift window and an overlap.

    ``shift`` is the closed window ``[t_j, t_j + delta]`` of banned departure
    times for the mover, anchored at its original departure ``t_j``.
    ``overlap`` is the open tail ``(t_s + delta, t_e)`` of the collision
    window — the times the waiter's vertex stays unsafe no matter which
    allowed shift the mover takes.  The two widths always add back up to the
    collision window's width.
    """

    delta: float
    shift: TimeInterval
    overlap: TimeInterval

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta < UNBOUNDED:
            raise ValueError(f"delta must be a finite non-negative real, got {self.delta}")


def shift_parameters(c: Conflict, delta: float) -> ShiftParameters:
    """Build :class:`ShiftParameters` for a wait-vs-move conflict.

    ``delta`` must satisfy ``0 <= delta < |collision window|`` so the overlap
    keeps positive width.
    """
    _, _, _, move = _waiter_and_mover(c)
    width = c.interval.width
    if not 0.0 <= delta < width:
        raise ValueError(f"delta must lie in [0, {width:.9g}), got {delta}")
    shift = TimeInterval.closed(move.start_time, move.start_time + delta)
    overlap = TimeInterval.open(c.interval.lo + delta, c.interval.hi)
    if math.isfinite(width):
        identity_gap = abs(width - (overlap.width + shift.width))
        if identity_gap > 1e-9:
            raise AssertionError(f"width identity violated by {identity_gap:.3g}")
    return ShiftParameters(delta, shift, overlap)


def split_shifting(
    c: Conflict, p: ShiftParameters
) -> tuple[VertexRangeConstraint, MotionConstraint]:
    """Waiter banned over the overlap window, mover over the shift window."""
    waiter, wait, mover, move = _waiter_and_mover(c)
    return (
        VertexRangeConstraint(waiter, wait.source, p.overlap),
        _signature_constraint(mover, move, p.shift),
    )


# ---------------------------------------------------------------------------
# Property testers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SoundnessReport:
    """Grid check of one shifting split: pairs that should collide but don't."""

    checked: int
    violations: tuple[tuple[float, float], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _grid(lo: float, hi: float, n: int, *, interior: bool) -> list[float]:
    if hi <= lo:
        return [lo] if not interior else []
    if interior:
        # Interior samples, with the first and last pulled hard against the
        # open endpoints to probe the tight part of the claim.
        eta = min(1e-6, (hi - lo) * 1e-3)
        points = [lo + (hi - lo) * (i + 1) / (n + 1) for i in range(n)]
        points[0] = lo + eta
        points[-1] = hi - eta
        return points
    if n == 1:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def check_shifting_sound(
    inst: Instance,
    c: Conflict,
    p: ShiftParameters,
    n_samples: int = 100,
    *,
    widen_overlap: float = 0.0,
    widen_shift: float = 0.0,
) -> SoundnessReport:
    """Sample departure times crossed with presence instants; expect collisions.

    A pair ``(tau, t_p)`` — the mover re-departing at ``tau`` from the shift
    window, the waiter present at the vertex at ``t_p`` from the overlap
    window — violates both emitted constraints, so soundness demands the two
    motions collide.  In the limit of an arbitrarily short wait around
    ``t_p`` that means the mover's disc strictly overlaps the vertex disc at
    ``t_p`` itself.  Widening either window (``widen_overlap`` extends the
    overlap earlier, ``widen_shift`` extends the shift later) is expected to
    surface collision-free pairs: both windows are maximal.
    """
    waiter, wait, mover, move = _waiter_and_mover(c)
    segment = motion_segment(inst, move)
    centre = inst.coord(wait.source)
    taus = _grid(p.shift.lo, p.shift.hi + widen_shift, n_samples, interior=False)
    presences = _grid(p.overlap.lo - widen_overlap, p.overlap.hi, n_samples, interior=True)
    limit = 2.0 * inst.radius
    violations: list[tuple[float, float]] = []
    checked = 0
    for tau in taus:
        lag = tau - segment.departure_time
        for t_p in presences:
            checked += 1
            local = t_p - lag
            if not segment.departure_time < local < segment.departure_time + segment.duration:
                collides = False
            else:
                frac = (local - segment.departure_time) / segment.duration
                x = segment.origin.x + frac * (segment.target.x - segment.origin.x)
                y = segment.origin.y + frac * (segment.target.y - segment.origin.y)
                collides = math.hypot(x - centre.x, y - centre.y) < limit
            if not collides:
                violations.append((tau, t_p))
    return SoundnessReport(checked, tuple(violations))


def residual_conflict(c: Conflict, p: ShiftParameters) -> bool:
    """Whether the original collision survives in the waiter's child node.

    The waiter may still occupy the vertex through the gap between the
    collision window's start and the overlap window's start (width ``delta``)
    without touching the overlap ban, while the mover's original departure is
    unrestricted in that child — so for every ``delta > 0`` the very same
    collision remains available.  With ``delta == 0`` there is no gap and
    this check is vacuously false (that split fails differently, by pinning
    a single departure instant per child).
    """
    if p.delta <= 0.0:
        return False
    gap = TimeInterval.closed(c.interval.lo, c.interval.lo + p.delta)
    waiter_child_ok = not gap.overlaps(p.overlap)
    return waiter_child_ok
