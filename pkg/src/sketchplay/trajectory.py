"""Hand-keypoint and stroke ingestion plus per-sample kinematics.

Velocity at a sample is the backward difference over the actual timestep,
the tangent direction is the normalized forward difference; boundary
samples fall back to the available one-sided difference.  A central
scheme is available behind ``scheme="central"`` for callers that prefer
a symmetric estimate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, List, Sequence, Union

from .errors import (
    DegenerateTimestep,
    EmptyInput,
    IndexOutOfRange,
    MalformedRecord,
    NonMonotonicTime,
    TooFewFrames,
    TooFewPoints,
)
from .geometry import Vec3, visfinite, vnorm, vnormalize, vscale, vsub, vadd

KEYPOINT_COUNT = 21
#: index fingertip; the stream carries 21 keypoints and any one can be tracked
DEFAULT_FINGERTIP_INDEX = 8
#: displacement below which a pair of samples counts as not moving
STATIONARY_DISPLACEMENT = 1e-6
MIN_TIMESTEP = 1e-9


@dataclass(frozen=True)
class TimedPoint:
    t: float
    pos: Vec3


@dataclass(frozen=True)
class KeypointFrame:
    """One tracked-hand frame: timestamp plus exactly 21 3D keypoints."""

    t: float
    points: tuple

    def __post_init__(self):
        if len(self.points) != KEYPOINT_COUNT:
            raise MalformedRecord(
                f"expected {KEYPOINT_COUNT} keypoints, got {len(self.points)}"
            )
        if not math.isfinite(self.t) or self.t < 0:
            raise MalformedRecord(f"bad timestamp {self.t!r}")
        for p in self.points:
            if not visfinite(p):
                raise MalformedRecord(f"non-finite keypoint {p!r}")


@dataclass(frozen=True)
class Stroke:
    """A timed polyline; 2D input is embedded with z = 0."""

    points: tuple  # tuple[TimedPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise TooFewPoints("a stroke needs at least 2 points")
        prev = None
        for tp in self.points:
            if not math.isfinite(tp.t) or not visfinite(tp.pos):
                raise MalformedRecord(f"non-finite stroke point {tp!r}")
            if prev is not None and tp.t <= prev:
                raise NonMonotonicTime(f"t={tp.t} after t={prev}")
            prev = tp.t

    @classmethod
    def from_timed(cls, points: Iterable[TimedPoint]) -> "Stroke":
        return cls(tuple(points))

    @classmethod
    def from_xy(cls, samples: Sequence[tuple]) -> "Stroke":
        """Build from (t, x, y) triples, z implied 0."""
        return cls(tuple(TimedPoint(t, (x, y, 0.0)) for t, x, y in samples))

    @property
    def t0(self) -> float:
        return self.points[0].t

    @property
    def t_end(self) -> float:
        return self.points[-1].t

    @property
    def duration(self) -> float:
        return self.t_end - self.t0


@dataclass(frozen=True)
class KinematicSample:
    t: float
    velocity: Vec3
    speed: float
    direction: Vec3
    stationary: bool = False


@dataclass(frozen=True)
class GestureSummary:
    duration: float
    mean_speed: float
    peak_speed: float
    principal_direction: Vec3
    release_velocity: Vec3
    #: True when every sample was stationary and no direction exists
    direction_undefined: bool = False


def _parse_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedRecord(f"{what} is not a number: {value!r}")
    f = float(value)
    if not math.isfinite(f):
        raise MalformedRecord(f"{what} is not finite: {value!r}")
    return f


def _iter_records(raw: Union[bytes, str, IO]) -> Iterable[dict]:
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    elif isinstance(raw, str):
        text = raw
    else:
        data = raw.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {lineno}: invalid JSON ({exc})") from exc
        if not isinstance(rec, dict):
            raise MalformedRecord(f"line {lineno}: record is not an object")
        yield rec


def ingest_keypoint_stream(raw: Union[bytes, str, IO]) -> List[KeypointFrame]:
    """Parse a line-delimited keypoint stream into frames, order preserved."""
    frames: List[KeypointFrame] = []
    last_t = None
    for rec in _iter_records(raw):
        t = _parse_number(rec.get("t"), "t")
        points = rec.get("points")
        if not isinstance(points, list) or len(points) != KEYPOINT_COUNT:
            raise MalformedRecord(
                f"record at t={t} has {0 if not isinstance(points, list) else len(points)}"
                f" points, expected {KEYPOINT_COUNT}"
            )
        parsed = []
        for p in points:
            if not isinstance(p, list) or len(p) != 3:
                raise MalformedRecord(f"keypoint is not an [x,y,z] triple: {p!r}")
            parsed.append(tuple(_parse_number(c, "coordinate") for c in p))
        if last_t is not None and t <= last_t:
            raise NonMonotonicTime(f"t={t} does not increase past t={last_t}")
        last_t = t
        frames.append(KeypointFrame(t=t, points=tuple(parsed)))
    return frames


def ingest_stroke_stream(raw: Union[bytes, str, IO]) -> Stroke:
    """Parse a line-delimited 2D stroke stream ({"t","x","y"} records)."""
    samples = []
    last_t = None
    for rec in _iter_records(raw):
        t = _parse_number(rec.get("t"), "t")
        x = _parse_number(rec.get("x"), "x")
        y = _parse_number(rec.get("y"), "y")
        if last_t is not None and t <= last_t:
            raise NonMonotonicTime(f"t={t} does not increase past t={last_t}")
        last_t = t
        samples.append((t, x, y))
    if len(samples) < 2:
        raise TooFewPoints(f"stroke stream has {len(samples)} samples, need >= 2")
    return Stroke.from_xy(samples)


def extract_fingertip_stroke(
    frames: Sequence[KeypointFrame], keypoint_index: int = DEFAULT_FINGERTIP_INDEX
) -> Stroke:
    """Pull one keypoint's positions out of a frame sequence as a stroke."""
    if not 0 <= keypoint_index < KEYPOINT_COUNT:
        raise IndexOutOfRange(f"keypoint index {keypoint_index} not in [0, {KEYPOINT_COUNT})")
    if len(frames) < 2:
        raise TooFewFrames(f"need >= 2 frames, got {len(frames)}")
    return Stroke(tuple(TimedPoint(f.t, f.points[keypoint_index]) for f in frames))


def resample_stroke(stroke: Stroke, rate_hz: float) -> Stroke:
    """Resample to a uniform grid t0, t0+1/rate, ... with linear interpolation.

    Endpoints are preserved exactly; when the stroke duration is not a
    multiple of the period, the original final point is appended.
    """
    if rate_hz <= 0:
        raise ValueError(f"rate_hz must be positive, got {rate_hz}")
    if len(stroke.points) < 2:
        raise TooFewPoints("cannot resample a stroke with < 2 points")

    pts = stroke.points
    t0, t_end = stroke.t0, stroke.t_end
    out: List[TimedPoint] = []
    seg = 0
    k = 0
    while True:
        t = t0 + k / rate_hz
        if t > t_end:
            break
        while seg < len(pts) - 2 and pts[seg + 1].t <= t:
            seg += 1
        a, b = pts[seg], pts[seg + 1]
        if t == a.t:  # exact knot: keep position bitwise
            out.append(TimedPoint(t, a.pos))
        elif t == b.t:
            out.append(TimedPoint(t, b.pos))
        else:
            w = (t - a.t) / (b.t - a.t)
            out.append(TimedPoint(t, vadd(a.pos, vscale(vsub(b.pos, a.pos), w))))
        k += 1
    if not out or out[-1].t < t_end:
        out.append(TimedPoint(t_end, pts[-1].pos))
    return Stroke(tuple(out))


def _difference_velocity(a: TimedPoint, b: TimedPoint) -> Vec3:
    dt = b.t - a.t
    if dt < MIN_TIMESTEP:
        raise DegenerateTimestep(f"timestep {dt} below {MIN_TIMESTEP} s")
    return vscale(vsub(b.pos, a.pos), 1.0 / dt)


def estimate_kinematics(stroke: Stroke, scheme: str = "paper") -> List[KinematicSample]:
    """Per-sample velocity, speed and unit tangent direction.

    ``scheme="paper"`` uses the backward difference for velocity and the
    forward difference for direction (one-sided at the boundaries);
    ``scheme="central"`` uses central differences for both at interior
    samples.  A sample whose direction-defining displacement is below the
    stationary threshold gets a zero direction and the ``stationary`` flag.
    """
    if scheme not in ("paper", "central"):
        raise ValueError(f"unknown scheme {scheme!r}")
    pts = stroke.points
    n = len(pts)
    if n < 2:
        raise TooFewPoints("kinematics needs >= 2 points")

    samples: List[KinematicSample] = []
    for i in range(n):
        if scheme == "central" and 0 < i < n - 1:
            velocity = _difference_velocity(pts[i - 1], pts[i + 1])
            disp = vsub(pts[i + 1].pos, pts[i - 1].pos)
        else:
            if i == 0:
                velocity = _difference_velocity(pts[0], pts[1])
            else:
                velocity = _difference_velocity(pts[i - 1], pts[i])
            if i < n - 1:
                disp = vsub(pts[i + 1].pos, pts[i].pos)
            else:
                disp = vsub(pts[i].pos, pts[i - 1].pos)
        speed = vnorm(velocity)
        stationary = vnorm(disp) < STATIONARY_DISPLACEMENT
        direction = (0.0, 0.0, 0.0) if stationary else vnormalize(disp)
        samples.append(
            KinematicSample(
                t=pts[i].t,
                velocity=velocity,
                speed=speed,
                direction=direction,
                stationary=stationary,
            )
        )
    return samples


def smooth_velocities(
    samples: Sequence[KinematicSample], coefficient: float = 0.5
) -> List[KinematicSample]:
    """Optional exponential smoothing on velocity to damp tracker jitter."""
    if not 0 < coefficient <= 1:
        raise ValueError("coefficient must be in (0, 1]")
    out: List[KinematicSample] = []
    v_acc = None
    for s in samples:
        v_acc = s.velocity if v_acc is None else vadd(
            vscale(v_acc, 1.0 - coefficient), vscale(s.velocity, coefficient)
        )
        out.append(
            KinematicSample(
                t=s.t,
                velocity=v_acc,
                speed=vnorm(v_acc),
                direction=s.direction,
                stationary=s.stationary,
            )
        )
    return out


def summarize_gesture(
    samples: Sequence[KinematicSample], release_window: float = 0.1
) -> GestureSummary:
    """Aggregate samples into the single hand-velocity the transfer rule uses.

    release_velocity is the time-weighted (trapezoidal) mean velocity over
    the final ``release_window`` seconds; principal_direction is the
    normalized mean of the non-stationary tangent directions.
    """
    if not samples:
        raise EmptyInput("no kinematic samples")
    if release_window <= 0:
        raise ValueError("release_window must be positive")

    speeds = [s.speed for s in samples]
    duration = samples[-1].t - samples[0].t

    t_cut = samples[-1].t - release_window
    window = [s for s in samples if s.t >= t_cut]
    if len(window) < 2:
        release_velocity = samples[-1].velocity
    else:
        acc = (0.0, 0.0, 0.0)
        span = 0.0
        for a, b in zip(window, window[1:]):
            dt = b.t - a.t
            mid = vscale(vadd(a.velocity, b.velocity), 0.5)
            acc = vadd(acc, vscale(mid, dt))
            span += dt
        release_velocity = vscale(acc, 1.0 / span) if span > 0 else samples[-1].velocity

    dir_acc = (0.0, 0.0, 0.0)
    moving = 0
    for s in samples:
        if not s.stationary:
            dir_acc = vadd(dir_acc, s.direction)
            moving += 1
    if moving == 0:
        principal = (0.0, 0.0, 0.0)
        undefined = True
    else:
        principal = vnormalize(dir_acc)
        undefined = vnorm(principal) == 0.0  # directions cancelled out exactly

    return GestureSummary(
        duration=duration,
        mean_speed=sum(speeds) / len(speeds),
        peak_speed=max(speeds),
        principal_direction=principal,
        release_velocity=release_velocity,
        direction_undefined=undefined,
    )
