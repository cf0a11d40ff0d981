"""Binary frame log: the bit-exact record used for playback and determinism checks.

Layout (little-endian):
    header: magic b"SPF1", dt float64, body count uint32
    per frame, per body (world build order): pos f64*3, quat f64*4,
    linvel f64*3, angvel f64*3

Only rigid bodies are logged; frame index and time are implicit in the
stream position (time = index * dt).
"""
from __future__ import annotations

import struct
from typing import BinaryIO, List, Sequence, Union

from .world import BodySnapshot, Frame

MAGIC = b"SPF1"
_HEADER = struct.Struct("<4sdI")
_BODY = struct.Struct("<13d")


def write_frame_log(target: Union[str, BinaryIO], dt: float, frames: Sequence[Frame]) -> None:
    body_count = len(frames[0].bodies) if frames else 0
    own = isinstance(target, str)
    fh = open(target, "wb") if own else target
    try:
        fh.write(_HEADER.pack(MAGIC, dt, body_count))
        for frame in frames:
            if len(frame.bodies) != body_count:
                raise ValueError("all frames must snapshot the same body count")
            for b in frame.bodies:
                fh.write(_BODY.pack(*b.position, *b.orientation,
                                    *b.linear_velocity, *b.angular_velocity))
    finally:
        if own:
            fh.close()


def frame_log_bytes(dt: float, frames: Sequence[Frame]) -> bytes:
    import io
    buf = io.BytesIO()
    write_frame_log(buf, dt, frames)
    return buf.getvalue()


def read_frame_log(source: Union[str, bytes, BinaryIO], body_ids: Sequence[str] = ()) -> tuple:
    """Returns (dt, frames).  body_ids, when given, must match the logged count."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    if len(data) < _HEADER.size:
        raise ValueError("truncated frame log header")
    magic, dt, body_count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if body_ids and len(body_ids) != body_count:
        raise ValueError(f"log has {body_count} bodies, got {len(body_ids)} ids")
    ids = list(body_ids) if body_ids else [f"body{i}" for i in range(body_count)]

    offset = _HEADER.size
    frame_size = _BODY.size * body_count
    payload = len(data) - offset
    if body_count and payload % frame_size != 0:
        raise ValueError("frame log payload is not a whole number of frames")
    n_frames = payload // frame_size if body_count else 0

    frames: List[Frame] = []
    for fi in range(n_frames):
        bodies = []
        for bi in range(body_count):
            vals = _BODY.unpack_from(data, offset)
            offset += _BODY.size
            bodies.append(BodySnapshot(
                id=ids[bi],
                position=vals[0:3],
                orientation=vals[3:7],
                linear_velocity=vals[7:10],
                angular_velocity=vals[10:13],
            ))
        # live frames are 1-based (frame index * dt = elapsed time)
        index = fi + 1
        frames.append(Frame(index=index, time=index * dt, bodies=tuple(bodies),
                            contacts=(), node_positions={}))
    return dt, frames
