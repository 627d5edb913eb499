"""Closed-loop lane geometry built from straight and circular-arc segments.

The track stores only the center line of the right (driving) lane.  All
ground-truth lane quantities (lateral offset, heading offset, arclength) come
from :func:`project_to_lane`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BadSegment, NonClosedTrack

CLOSURE_TOL = 1e-9


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Straight:
    length: float

    kind = "straight"


@dataclass(frozen=True)
class Arc:
    radius: float
    sweep: float
    direction: str = "l"  # "l" or "r"

    kind = "arc"

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "l" else -1.0

    @property
    def length(self) -> float:
        return self.radius * self.sweep


@dataclass(frozen=True)
class _Placed:
    seg: Straight | Arc
    s0: float
    x0: float
    y0: float
    h0: float
    # arc only
    cx: float = 0.0
    cy: float = 0.0
    a0: float = 0.0  # polar angle of the start point about the center


@dataclass(frozen=True)
class LaneFrame:
    d_delta: float
    theta_delta: float
    s_arc: float
    in_drivable: bool


@dataclass(frozen=True)
class TrackGeometry:
    segments: tuple
    lane_width: float = 0.22
    drivable_half_width: float = 0.33
    origin: tuple = (0.0, 0.0, 0.0)
    _placed: tuple = field(default=(), repr=False, compare=False)
    length: float = field(default=0.0, compare=False)

    @property
    def arclength(self) -> float:
        return self.length

    def pose_at(self, s: float) -> tuple[float, float, float]:
        """Center-line pose ``(x, y, heading)`` at arclength ``s`` (wrapped)."""
        s = s % self.length
        for p in self._placed:
            if s <= p.s0 + p.seg.length or p is self._placed[-1]:
                return _pose_on(p, min(max(s - p.s0, 0.0), p.seg.length))
        raise AssertionError("unreachable")

    def curvature_at(self, s: float) -> float:
        s = s % self.length
        for p in self._placed:
            if s <= p.s0 + p.seg.length:
                if isinstance(p.seg, Arc):
                    return p.seg.sign / p.seg.radius
                return 0.0
        return 0.0


def _pose_on(p: _Placed, u: float) -> tuple[float, float, float]:
    seg = p.seg
    if isinstance(seg, Straight):
        return (p.x0 + u * math.cos(p.h0), p.y0 + u * math.sin(p.h0), wrap_angle(p.h0))
    sg = seg.sign
    ang = p.a0 + sg * u / seg.radius
    return (
        p.cx + seg.radius * math.cos(ang),
        p.cy + seg.radius * math.sin(ang),
        wrap_angle(p.h0 + sg * u / seg.radius),
    )


def build_track(
    layout=None,
    lane_width: float = 0.22,
    drivable_half_width: float | None = None,
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> TrackGeometry:
    """Chain segments into a closed track.

    ``layout`` is a sequence of :class:`Straight` / :class:`Arc` (or tuples
    ``("straight", len)`` / ``("arc", r, sweep, "l"|"r")``).  ``None`` gives
    the default stadium loop.  ``origin`` places the first segment's start pose.
    """
    if layout is None:
        layout = default_layout()
    segs = [_coerce(s) for s in layout]
    if not segs:
        raise BadSegment("empty layout")
    if lane_width <= 0:
        raise BadSegment(f"lane width must be positive, got {lane_width}")
    if drivable_half_width is None:
        drivable_half_width = 1.5 * lane_width
    for seg in segs:
        if isinstance(seg, Straight):
            if not seg.length > 0:
                raise BadSegment(f"straight length must be positive: {seg}")
        else:
            if not (seg.radius > 0 and seg.sweep > 0):
                raise BadSegment(f"arc radius and sweep must be positive: {seg}")
            if seg.direction not in ("l", "r"):
                raise BadSegment(f"arc direction must be 'l' or 'r': {seg}")
            if seg.radius <= lane_width / 2:
                raise BadSegment(f"arc radius {seg.radius} <= half lane width")

    x, y, h = (float(v) for v in origin)
    s = 0.0
    placed = []
    for seg in segs:
        if isinstance(seg, Straight):
            p = _Placed(seg, s, x, y, h)
        else:
            sg = seg.sign
            cx = x - sg * seg.radius * math.sin(h)
            cy = y + sg * seg.radius * math.cos(h)
            p = _Placed(seg, s, x, y, h, cx, cy, math.atan2(y - cy, x - cx))
        placed.append(p)
        x, y, _ = _pose_on(p, seg.length)
        h = h + (seg.sign * seg.sweep if isinstance(seg, Arc) else 0.0)
        s += seg.length

    dpos = math.hypot(x - origin[0], y - origin[1])
    dh = abs(wrap_angle(h - origin[2]))
    if dpos > CLOSURE_TOL or dh > CLOSURE_TOL:
        raise NonClosedTrack(f"chain does not close: position error {dpos:.3g} m, heading error {dh:.3g} rad")

    return TrackGeometry(tuple(segs), lane_width, drivable_half_width, tuple(origin), tuple(placed), s)


def default_layout() -> list:
    """Stadium loop: two 4 m straights joined by two 1 m-radius half circles."""
    return [Straight(4.0), Arc(1.0, math.pi, "l"), Straight(4.0), Arc(1.0, math.pi, "l")]


def _coerce(seg):
    if isinstance(seg, (Straight, Arc)):
        return seg
    kind, *args = seg
    if kind == "straight":
        return Straight(float(args[0]))
    if kind == "arc":
        return Arc(float(args[0]), float(args[1]), str(args[2]) if len(args) > 2 else "l")
    raise BadSegment(f"unknown segment kind {kind!r}")


_PI_RE = re.compile(r"^([0-9.eE+-]*)\*?pi(?:/([0-9.eE+-]+))?$")


def _parse_angle(tok: str) -> float:
    m = _PI_RE.match(tok.strip().lower())
    if m:
        k = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
        n = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / n
    return float(tok)


def parse_layout(text: str) -> list:
    """Parse ``straight <len>`` / ``arc <radius> <sweep> <l|r>`` lines.

    Blank lines and ``#`` comments are ignored.  Sweeps accept plain radians
    or ``pi`` forms such as ``pi``, ``2pi``, ``pi/2``.
    """
    segs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "straight" and len(tok) == 2:
                segs.append(Straight(float(tok[1])))
            elif tok[0] == "arc" and len(tok) == 4 and tok[3] in ("l", "r"):
                segs.append(Arc(float(tok[1]), _parse_angle(tok[2]), tok[3]))
            else:
                raise ValueError
        except ValueError:
            raise BadSegment(f"line {lineno}: cannot parse segment {raw!r}") from None
    return segs


def load_track(path, lane_width: float = 0.22, drivable_half_width: float | None = None) -> TrackGeometry:
    return build_track(parse_layout(Path(path).read_text()), lane_width, drivable_half_width)


def format_layout(segments) -> str:
    lines = []
    for seg in segments:
        if isinstance(seg, Straight):
            lines.append(f"straight {seg.length!r}")
        else:
            lines.append(f"arc {seg.radius!r} {seg.sweep!r} {seg.direction}")
    return "\n".join(lines) + "\n"


def project_to_lane(track: TrackGeometry, x: float, y: float, psi: float) -> LaneFrame:
    """Nearest-point projection of a pose onto the lane center line.

    Ties go to the smallest arclength.  ``d_delta`` is positive to the left of
    the travel direction.
    """
    best = None
    for p in track._placed:
        seg = p.seg
        if isinstance(seg, Straight):
            c, s_ = math.cos(p.h0), math.sin(p.h0)
            u = (x - p.x0) * c + (y - p.y0) * s_
            u = min(max(u, 0.0), seg.length)
            fx, fy = p.x0 + u * c, p.y0 + u * s_
            fh = p.h0
        else:
            r, sg = seg.radius, seg.sign
            wx, wy = x - p.cx, y - p.cy
            if wx == 0.0 and wy == 0.0:
                u = 0.0
            else:
                delta = (sg * (math.atan2(wy, wx) - p.a0)) % (2.0 * math.pi)
                if delta <= seg.sweep:
                    u = r * delta
                else:
                    # outside the swept sector: nearer endpoint by angle
                    u = seg.length if (delta - seg.sweep) < (2.0 * math.pi - delta) else 0.0
            fx, fy, fh = _pose_on(p, u)
        dist2 = (x - fx) ** 2 + (y - fy) ** 2
        if best is None or dist2 < best[0]:
            best = (dist2, p.s0 + u, fx, fy, fh)

    _, s_arc, fx, fy, fh = best
    d = -(x - fx) * math.sin(fh) + (y - fy) * math.cos(fh)
    theta = wrap_angle(psi - fh)
    s_arc = s_arc % track.length
    return LaneFrame(d, theta, s_arc, abs(d) <= track.drivable_half_width)
