"""Swept-circle collision geometry for unit-speed segment motions.

Agents are open discs of radius ``r`` whose centres either sit still at a
point (a *wait*) or travel a straight segment at speed 1 (a *move*).  Two
agents collide when their centres come strictly closer than ``2r`` while both
motions are active.  This module provides the exact predicates and interval
computations that everything else in the package is built on:

* :func:`in_collision` -- does a pair of timed motions ever collide?
* :func:`collision_interval` -- the open time window during which they do.
* :func:`wait_move_collision_interval` -- the same window for a stationary
  disc versus a mover, computed independently via the chord construction.
* :func:`unsafe_interval` -- the set of departure times for one motion that
  guarantee a collision with another, fixed, timed motion.

All results are plain immutable values; every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: Distinguished duration/endpoint for motions and intervals that never end.
#: IEEE infinity compares and clips exactly; it is never a finite sentinel.
UNBOUNDED = math.inf

#: Global tolerance for interval-boundary equality tests.
EPS = 1e-9


@dataclass(frozen=True)
class Coordinate:
    """A point in the 2-D Euclidean plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Coordinate") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class TimeInterval:
    """A nonempty real time interval with per-endpoint closedness flags.

    Empty sets are represented by ``None`` throughout the package, never by a
    degenerate interval, so a ``TimeInterval`` always contains at least one
    instant (a single point when ``lo == hi`` with both endpoints closed).
    ``hi`` may be :data:`UNBOUNDED`.
    """

    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self) -> None:
        if not math.isfinite(self.lo):
            raise ValueError(f"interval lower bound must be finite, got {self.lo}")
        if math.isnan(self.hi):
            raise ValueError("interval upper bound is NaN")
        if self.hi < self.lo:
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")
        if self.hi == self.lo and not (self.lo_closed and self.hi_closed):
            raise ValueError("degenerate interval must be closed on both ends")
        if math.isinf(self.hi) and self.hi_closed:
            raise ValueError("an unbounded interval cannot be closed above")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def open(lo: float, hi: float) -> "TimeInterval":
        return TimeInterval(lo, hi, False, False)

    @staticmethod
    def closed(lo: float, hi: float) -> "TimeInterval":
        return TimeInterval(lo, hi, True, hi != UNBOUNDED)

    @staticmethod
    def half_open(lo: float, hi: float) -> "TimeInterval":
        """The interval ``[lo, hi)``."""
        return TimeInterval(lo, hi, True, False)

    # -- queries ----------------------------------------------------------

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float) -> bool:
        if t < self.lo or t > self.hi:
            return False
        if t == self.lo and not self.lo_closed:
            return False
        if t == self.hi and not self.hi_closed:
            return False
        return True

    def intersect(self, other: "TimeInterval") -> "TimeInterval | None":
        """Set intersection; ``None`` when the intervals are disjoint."""
        if self.lo > other.lo or (self.lo == other.lo and other.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and other.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        if hi < lo:
            return None
        if hi == lo and not (lo_closed and hi_closed):
            return None
        return TimeInterval(lo, hi, lo_closed, hi_closed)

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.intersect(other) is not None

    def shift(self, delta: float) -> "TimeInterval":
        return TimeInterval(self.lo + delta, self.hi + delta, self.lo_closed, self.hi_closed)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        hi = "inf" if math.isinf(self.hi) else format(self.hi, ".9g")
        return f"{left}{format(self.lo, '.9g')}, {hi}{right}"


@dataclass(frozen=True)
class KinematicSegment:
    """One timed motion of a disc centre: a straight unit-speed move, or a wait.

    A move's duration equals the Euclidean length of its displacement (speed
    1).  A wait has ``origin == target`` and any positive duration, including
    :data:`UNBOUNDED` for a terminal rest.
    """

    origin: Coordinate
    target: Coordinate
    departure_time: float
    duration: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.departure_time):
            raise ValueError(f"departure time must be finite, got {self.departure_time}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.origin != self.target:
            dist = self.origin.distance_to(self.target)
            if math.isinf(self.duration) or abs(self.duration - dist) > EPS:
                raise ValueError(
                    f"move duration {self.duration} does not match length {dist}"
                )

    # -- constructors -----------------------------------------------------

    @staticmethod
    def move(origin: Coordinate, target: Coordinate, departure_time: float) -> "KinematicSegment":
        return KinematicSegment(origin, target, departure_time, origin.distance_to(target))

    @staticmethod
    def wait(at: Coordinate, departure_time: float, duration: float = UNBOUNDED) -> "KinematicSegment":
        return KinematicSegment(at, at, departure_time, duration)

    # -- queries ----------------------------------------------------------

    @property
    def is_wait(self) -> bool:
        return self.origin == self.target

    @property
    def end_time(self) -> float:
        return self.departure_time + self.duration

    @property
    def velocity(self) -> tuple[float, float]:
        if self.is_wait:
            return (0.0, 0.0)
        return (
            (self.target.x - self.origin.x) / self.duration,
            (self.target.y - self.origin.y) / self.duration,
        )


def position_at(seg: KinematicSegment, t: float) -> Coordinate:
    """Centre position at time ``t``, which must lie in the active window."""
    if t < seg.departure_time - EPS or t > seg.end_time + EPS:
        raise ValueError(
            f"time {t} outside active window [{seg.departure_time}, {seg.end_time}]"
        )
    if seg.is_wait:
        return seg.origin
    s = min(max(t - seg.departure_time, 0.0), seg.duration) / seg.duration
    return Coordinate(
        seg.origin.x + s * (seg.target.x - seg.origin.x),
        seg.origin.y + s * (seg.target.y - seg.origin.y),
    )


# ---------------------------------------------------------------------------
# Relative-motion helpers
# ---------------------------------------------------------------------------


def _shared_window(a: KinematicSegment, b: KinematicSegment) -> tuple[float, float]:
    return (
        max(a.departure_time, b.departure_time),
        min(a.end_time, b.end_time),
    )


def _relative_state(
    a: KinematicSegment, b: KinematicSegment, t0: float
) -> tuple[float, float, float, float]:
    """Relative displacement at ``t0`` and relative velocity of ``a`` w.r.t. ``b``."""
    pa = position_at(a, t0)
    pb = position_at(b, t0)
    va = a.velocity
    vb = b.velocity
    return (pa.x - pb.x, pa.y - pb.y, va[0] - vb[0], va[1] - vb[1])


def _min_sq_distance(a: KinematicSegment, b: KinematicSegment) -> float:
    """Minimum squared centre distance over the shared window; +inf if none.

    The shared window must have positive measure for the minimum to count;
    a single shared instant is treated as no overlap.
    """
    w0, w1 = _shared_window(a, b)
    if not w1 > w0:
        return math.inf
    dx, dy, vx, vy = _relative_state(a, b, w0)
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return dx * dx + dy * dy
    # Closest approach of the relative motion, clamped to the window.
    t_cpa = -(dx * vx + dy * vy) / vv
    t_cpa = min(max(t_cpa, 0.0), w1 - w0)
    rx = dx + vx * t_cpa
    ry = dy + vy * t_cpa
    return rx * rx + ry * ry


def in_collision(a: KinematicSegment, b: KinematicSegment, r: float) -> bool:
    """True iff centre distance drops strictly below ``2r`` while both are active.

    Touching at exactly ``2r`` is not a collision, and neither is sharing a
    single instant of activity.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return _min_sq_distance(a, b) < (2.0 * r) ** 2


def _newton_polish(s: float, vv: float, b_half: float, c: float) -> float:
    """Refine a root of ``vv*s^2 + 2*b_half*s + c`` with a few Newton steps."""
    for _ in range(3):
        f = (vv * s + 2.0 * b_half) * s + c
        df = 2.0 * (vv * s + b_half)
        if df == 0.0:
            break
        step = f / df
        s -= step
        if abs(step) < 1e-15 * max(1.0, abs(s)):
            break
    return s


def collision_interval(
    a: KinematicSegment, b: KinematicSegment, r: float
) -> TimeInterval | None:
    """The open interval during which the pair is in collision, else ``None``.

    The interval opens at the first ``2r``-crossing (or at the start of the
    shared active window if the pair is already closer than ``2r`` there) and
    closes at the second crossing or when one of the motions finishes,
    whichever is earlier.  ``None`` exactly when :func:`in_collision` is
    false.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    threshold = (2.0 * r) ** 2
    if not _min_sq_distance(a, b) < threshold:
        return None
    w0, w1 = _shared_window(a, b)
    dx, dy, vx, vy = _relative_state(a, b, w0)
    vv = vx * vx + vy * vy
    cc = dx * dx + dy * dy
    if vv == 0.0:
        # Relative rest: constant separation for the whole shared window.
        return TimeInterval.open(w0, w1)
    b_half = dx * vx + dy * vy
    # Roots of  vv*s^2 + 2*b_half*s + (cc - threshold) = 0  relative to w0,
    # via the numerically stable split form, then Newton-polished.
    c = cc - threshold
    disc = b_half * b_half - vv * c
    sq = math.sqrt(max(disc, 0.0))
    if b_half >= 0.0:
        q = -(b_half + sq)
    else:
        q = -(b_half - sq)
    if q != 0.0:
        roots = sorted((q / vv, c / q))
    else:
        roots = [0.0, 0.0]
    s_lo = _newton_polish(roots[0], vv, b_half, c)
    s_hi = _newton_polish(roots[1], vv, b_half, c)
    lo = max(w0, w0 + s_lo)
    hi = min(w1, w0 + s_hi)
    if not hi > lo:
        return None
    return TimeInterval.open(lo, hi)


# ---------------------------------------------------------------------------
# Chord construction for a stationary disc against a mover
# ---------------------------------------------------------------------------


def _chord_arclengths(
    centre: Coordinate, mover: KinematicSegment, r: float
) -> tuple[float, float] | None:
    """Arclengths along the mover's path where it is strictly within ``2r``
    of ``centre``, before clipping to the path's extent.  ``None`` when the
    supporting line stays at distance >= ``2r``."""
    ux = (mover.target.x - mover.origin.x) / mover.duration
    uy = (mover.target.y - mover.origin.y) / mover.duration
    mx = centre.x - mover.origin.x
    my = centre.y - mover.origin.y
    s_foot = mx * ux + my * uy          # arclength of the perpendicular foot
    h = mx * uy - my * ux               # signed distance to the supporting line
    half_chord_sq = (2.0 * r) ** 2 - h * h
    if not half_chord_sq > 0.0:
        return None
    half_chord = math.sqrt(half_chord_sq)
    return (s_foot - half_chord, s_foot + half_chord)


def wait_move_collision_interval(
    wait_vertex: Coordinate, mover: KinematicSegment, r: float
) -> TimeInterval | None:
    """Collision interval of a permanently stationary disc versus a mover.

    Computed independently of :func:`collision_interval` via the perpendicular
    foot of the stationary centre on the mover's supporting line: the mover is
    inside the ``2r`` disc along an open chord of the line, entered half a
    chord before the foot and left half a chord after, clipped to the mover's
    active window.  Agrees with :func:`collision_interval` (against a wait
    covering the mover's whole window) to within :data:`EPS`.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if mover.is_wait:
        raise ValueError("mover must be a move segment")
    chord = _chord_arclengths(wait_vertex, mover, r)
    if chord is None:
        return None
    lo = max(mover.departure_time, mover.departure_time + chord[0])
    hi = min(mover.end_time, mover.departure_time + chord[1])
    if not hi > lo:
        return None
    return TimeInterval.open(lo, hi)


# ---------------------------------------------------------------------------
# Unsafe departure intervals
# ---------------------------------------------------------------------------


def _retimed(target: KinematicSegment, tau: float) -> KinematicSegment:
    return KinematicSegment(target.origin, target.target, tau, target.duration)


def _clip_unsafe(raw_lo: float, raw_hi: float) -> TimeInterval | None:
    """Clip a raw open departure interval to admissible departures (>= 0) and
    return it in the half-open ``[lo, hi)`` convention."""
    lo = max(0.0, raw_lo)
    hi = raw_hi
    if not hi > lo:
        return None
    if math.isinf(hi):
        return TimeInterval.half_open(lo, UNBOUNDED)
    return TimeInterval.half_open(lo, hi)


def _certified_unsafe(
    target: KinematicSegment, fixed: KinematicSegment, r: float, iv: TimeInterval | None
) -> TimeInterval | None:
    """Snap a computed unsafe window's boundaries onto the exact predicate.

    Numerical boundaries can land a few ulps on the colliding side.  That is
    fatal for ``hi``: whoever resumes a banned motion exactly at ``hi`` must
    not collide, or the same hair-thin conflict regenerates forever.  Step
    ``hi`` outward until the re-timed motion is certified collision-free, and
    ``lo`` downward while the departure just below it still collides, so the
    half-open window covers the whole unsafe set.
    """
    if iv is None:
        return None
    hi = iv.hi
    if math.isfinite(hi):
        step = max(1e-15, abs(hi) * 4e-16)
        for _ in range(64):
            if not in_collision(_retimed(target, hi), fixed, r):
                break
            hi += step
            step *= 2.0
        else:
            raise AssertionError(
                f"could not certify a collision-free resume time near {iv.hi!r}"
            )
    lo = iv.lo
    for _ in range(64):
        below = math.nextafter(lo, -math.inf)
        if below < 0.0 or not in_collision(_retimed(target, below), fixed, r):
            break
        lo = below
    if not hi > lo:
        return None
    return TimeInterval.half_open(lo, hi)


def unsafe_interval(
    target: KinematicSegment, fixed: KinematicSegment, r: float
) -> TimeInterval | None:
    """Departure times for ``target``'s motion that collide with ``fixed``.

    ``target`` supplies only geometry and duration; its own departure time is
    ignored and ranges over all admissible departures (>= 0).  The result is
    the maximal interval of departures ``tau`` for which the re-timed motion
    is :func:`in_collision` with ``fixed``, reported half-open ``[lo, hi)``
    (the left endpoint is a grazing contact).  ``hi`` is :data:`UNBOUNDED`
    when ``fixed`` is a terminal wait the motion can never outlast.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    f0 = fixed.departure_time
    f1 = fixed.end_time
    if target.is_wait:
        dur = target.duration
        if fixed.is_wait:
            # Stationary vs stationary: collide iff the points are close and
            # the windows overlap in more than a point.
            if target.origin.distance_to(fixed.origin) >= 2.0 * r:
                raw = None
            else:
                raw = _clip_unsafe(f0 - dur, f1)
        else:
            chord = wait_move_collision_interval(target.origin, fixed, r)
            raw = None if chord is None else _clip_unsafe(chord.lo - dur, chord.hi)
    elif fixed.is_wait:
        # Times at which the mover is strictly inside the fixed disc, in
        # traversal-local time (arclength at speed 1).
        chord = _chord_arclengths(fixed.origin, target, r)
        if chord is None:
            raw = None
        else:
            local_lo = max(0.0, chord[0])
            local_hi = min(target.duration, chord[1])
            if not local_hi > local_lo:
                raw = None
            else:
                raw = _clip_unsafe(f0 - local_hi, f1 - local_lo)
    else:
        raw = _unsafe_move_move(target, fixed, r)
    return _certified_unsafe(target, fixed, r, raw)


def _unsafe_move_move(
    target: KinematicSegment, fixed: KinematicSegment, r: float
) -> TimeInterval | None:
    """Unsafe departures for a mover against a fixed mover.

    ``h(tau) = `` minimum squared separation over the shared window is a
    convex function of the departure ``tau`` (partial minimisation of a
    jointly convex quadratic over a convex set), so the unsafe set
    ``{h < (2r)^2}`` is a single interval inside the window-overlap range
    ``(f0 - L, f1)``.  Its minimiser is located by ternary search and the two
    boundary crossings by bisection on the exact predicate.
    """
    L = target.duration
    lo_bound = fixed.departure_time - L
    hi_bound = fixed.end_time
    if not hi_bound > lo_bound:
        return None

    def h(tau: float) -> float:
        return _min_sq_distance(_retimed(target, tau), fixed)

    threshold = (2.0 * r) ** 2
    lo, hi = lo_bound, hi_bound
    for _ in range(200):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        h1, h2 = h(m1), h(m2)
        if h1 < h2:
            hi = m2
        elif h1 > h2:
            lo = m1
        else:
            # h is finite strictly inside the range; on a flat bottom keep
            # both probes so the bracket never collapses onto an endpoint
            # (where the shared window vanishes and h jumps to infinity).
            lo, hi = m1, m2
    tau_min = 0.5 * (lo + hi)
    if not h(tau_min) < threshold:
        return None

    def bisect(safe: float, unsafe: float) -> float:
        for _ in range(100):
            mid = 0.5 * (safe + unsafe)
            if mid == safe or mid == unsafe:
                break
            if h(mid) < threshold:
                unsafe = mid
            else:
                safe = mid
        return unsafe

    raw_lo = bisect(lo_bound, tau_min)
    raw_hi = bisect(hi_bound, tau_min)
    return _clip_unsafe(raw_lo, raw_hi)
