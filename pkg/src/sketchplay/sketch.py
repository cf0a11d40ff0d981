"""Stroke cleanup, object segmentation, and lifting outlines to solids.

Segmentation clusters strokes greedily in drawing order using temporal
pauses and endpoint gaps; outlines are convex hulls, and each object is
lifted to an extruded prism (or a fitted box/sphere) for simulation.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import IO, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateOutline, EmptyCanvas, MalformedRecord, TooFewPoints
from .trajectory import Stroke, TimedPoint

DEFAULT_TEMPORAL_GAP = 0.5          # seconds of pause that starts a new object
DEFAULT_SPATIAL_GAP_FRACTION = 0.15  # fraction of canvas diagonal
DEFAULT_THICKNESS_FRACTION = 0.2     # extrusion depth = fraction of min bbox side
MIN_OUTLINE_AREA = 1e-8              # m^2
CIRCULARITY_THRESHOLD = 0.9
RECTANGULARITY_THRESHOLD = 0.9


@dataclass(frozen=True)
class SketchCanvas:
    strokes: tuple  # tuple[Stroke, ...]
    extent: Tuple[float, float]  # (width, height) in meters, origin at (0, 0)

    def __post_init__(self):
        w, h = self.extent
        if w <= 0 or h <= 0:
            raise MalformedRecord(f"extent must be positive, got {self.extent}")
        eps = 1e-9
        for s in self.strokes:
            for tp in s.points:
                x, y = tp.pos[0], tp.pos[1]
                if not (-eps <= x <= w + eps and -eps <= y <= h + eps):
                    raise MalformedRecord(
                        f"stroke point ({x}, {y}) outside extent {self.extent}"
                    )

    @property
    def diagonal(self) -> float:
        return math.hypot(self.extent[0], self.extent[1])


@dataclass(frozen=True)
class SketchObject:
    """A group of strokes treated as one object instance."""

    id: str
    strokes: tuple
    outline: tuple  # closed CCW polygon, tuple[(x, y), ...]
    bbox: Tuple[float, float, float, float]  # (xmin, ymin, xmax, ymax)
    centroid: Tuple[float, float]
    descriptors: dict  # aspect_ratio, compactness, stroke_count, area, ...


@dataclass(frozen=True)
class MeshPrimitive:
    kind: str  # extruded_prism | box | sphere
    volume: float
    # prism: local-frame geometry; box/sphere: analytic parameters
    vertices: Optional[tuple] = None
    faces: Optional[tuple] = None
    half_extents: Optional[Tuple[float, float, float]] = None
    radius: Optional[float] = None


def load_canvas(raw: Union[bytes, str, IO]) -> SketchCanvas:
    """Parse Canvas JSON: {"extent": [w,h], "strokes": [[{"t","x","y"},...],...]}."""
    if isinstance(raw, bytes):
        text = raw.decode("utf-8")
    elif isinstance(raw, str):
        text = raw
    else:
        data = raw.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"canvas is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "extent" not in doc or "strokes" not in doc:
        raise MalformedRecord("canvas JSON needs 'extent' and 'strokes'")
    extent = doc["extent"]
    if not (isinstance(extent, list) and len(extent) == 2):
        raise MalformedRecord(f"bad extent {extent!r}")
    strokes = []
    for raw_stroke in doc["strokes"]:
        pts = []
        for rec in raw_stroke:
            try:
                pts.append((float(rec["t"]), float(rec["x"]), float(rec["y"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(f"bad stroke point {rec!r}") from exc
        strokes.append(Stroke.from_xy(pts))
    return SketchCanvas(strokes=tuple(strokes), extent=(float(extent[0]), float(extent[1])))


def dump_canvas(canvas: SketchCanvas) -> str:
    doc = {
        "extent": list(canvas.extent),
        "strokes": [
            [{"t": tp.t, "x": tp.pos[0], "y": tp.pos[1]} for tp in s.points]
            for s in canvas.strokes
        ],
    }
    return json.dumps(doc)


# --- beautification -------------------------------------------------------

def _point_segment_distance(p, a, b) -> float:
    ab = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    ap = (p[0] - a[0], p[1] - a[1], p[2] - a[2])
    denom = ab[0] ** 2 + ab[1] ** 2 + ab[2] ** 2
    if denom < 1e-24:
        return math.sqrt(ap[0] ** 2 + ap[1] ** 2 + ap[2] ** 2)
    t = max(0.0, min(1.0, (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / denom))
    dx = p[0] - (a[0] + t * ab[0])
    dy = p[1] - (a[1] + t * ab[1])
    dz = p[2] - (a[2] + t * ab[2])
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _rdp_keep(points: Sequence[TimedPoint], first: int, last: int, epsilon: float, keep) -> None:
    max_d = epsilon
    index = None
    for i in range(first + 1, last):
        d = _point_segment_distance(points[i].pos, points[first].pos, points[last].pos)
        if d > max_d:
            index = i
            max_d = d
    if index is not None:
        _rdp_keep(points, first, index, epsilon, keep)
        keep.add(index)
        _rdp_keep(points, index, last, epsilon, keep)


def beautify_stroke(stroke: Stroke, epsilon: float) -> Stroke:
    """Ramer-Douglas-Peucker simplification plus endpoint closure snapping.

    Retained points keep their timestamps.  Endpoints closer than
    2*epsilon are merged (the last point snaps onto the first).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if len(stroke.points) < 2:
        raise TooFewPoints("cannot beautify a stroke with < 2 points")
    if epsilon == 0:
        return stroke

    pts = stroke.points
    keep = {0, len(pts) - 1}
    _rdp_keep(pts, 0, len(pts) - 1, epsilon, keep)
    kept = [pts[i] for i in sorted(keep)]

    first, last = kept[0], kept[-1]
    gap = math.dist(first.pos, last.pos)
    if 0 < gap <= 2 * epsilon:
        kept[-1] = TimedPoint(last.t, first.pos)
    return Stroke(tuple(kept))


# --- segmentation ---------------------------------------------------------

def _stroke_hash(strokes: Sequence[Stroke], params: dict) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(params, sort_keys=True).encode())
    for s in strokes:
        for tp in s.points:
            h.update(repr((tp.t, tp.pos)).encode())
    return h.hexdigest()[:12]


def _convex_outline(points_xy: np.ndarray):
    """CCW convex hull of 2D points; falls back for degenerate inputs."""
    unique = np.unique(points_xy, axis=0)
    if len(unique) < 3:
        return None
    try:
        hull = ConvexHull(unique)
    except Exception:
        return None
    return tuple((float(unique[i][0]), float(unique[i][1])) for i in hull.vertices)


def _polygon_area(outline) -> float:
    area = 0.0
    n = len(outline)
    for i in range(n):
        x0, y0 = outline[i]
        x1, y1 = outline[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return 0.5 * area


def _polygon_perimeter(outline) -> float:
    n = len(outline)
    return sum(math.dist(outline[i], outline[(i + 1) % n]) for i in range(n))


def _descriptors(outline, stroke_count: int, ink_length: float) -> dict:
    xs = [p[0] for p in outline]
    ys = [p[1] for p in outline]
    w = max(xs) - min(xs)
    h = max(ys) - min(ys)
    area = _polygon_area(outline)
    perimeter = _polygon_perimeter(outline)
    # circularity compares the hull to a disc (shape fitting); compactness
    # compares the covered area to the total drawn path, so loose scribbles
    # score low even when their hull is round
    circularity = 4.0 * math.pi * area / perimeter**2 if perimeter > 0 else 0.0
    compactness = 4.0 * math.pi * area / ink_length**2 if ink_length > 0 else 0.0
    bbox_area = w * h
    return {
        "aspect_ratio": max(w, h) / min(w, h) if min(w, h) > 0 else float("inf"),
        "compactness": compactness,
        "circularity": circularity,
        "rectangularity": area / bbox_area if bbox_area > 0 else 0.0,
        "stroke_count": stroke_count,
        "area": area,
        "width": w,
        "height": h,
    }


def _make_object(index: int, strokes: List[Stroke], params: dict) -> SketchObject:
    pts = np.array([(tp.pos[0], tp.pos[1]) for s in strokes for tp in s.points])
    outline = _convex_outline(pts)
    if outline is None or _polygon_area(outline) <= MIN_OUTLINE_AREA:
        # Degenerate drawing (a dot or a line): pad to a tiny box so the
        # object still has an area and a collision shape.
        cx, cy = pts.mean(axis=0)
        r = max(1e-3, float(np.abs(pts - (cx, cy)).max()))
        outline = ((cx - r, cy - r), (cx + r, cy - r), (cx + r, cy + r), (cx - r, cy + r))
    xs = [p[0] for p in outline]
    ys = [p[1] for p in outline]
    bbox = (min(xs), min(ys), max(xs), max(ys))
    area = _polygon_area(outline)
    # centroid of the hull polygon
    cx = cy = 0.0
    n = len(outline)
    for i in range(n):
        x0, y0 = outline[i]
        x1, y1 = outline[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    cx /= 6.0 * area
    cy /= 6.0 * area
    ink_length = sum(
        math.dist(a.pos, b.pos) for s in strokes for a, b in zip(s.points, s.points[1:])
    )
    return SketchObject(
        id=f"obj{index:02d}-{_stroke_hash(strokes, params)}",
        strokes=tuple(strokes),
        outline=outline,
        bbox=bbox,
        centroid=(cx, cy),
        descriptors=_descriptors(outline, len(strokes), ink_length),
    )


def segment_objects(
    canvas: SketchCanvas,
    temporal_gap: float = DEFAULT_TEMPORAL_GAP,
    spatial_gap_fraction: float = DEFAULT_SPATIAL_GAP_FRACTION,
) -> List[SketchObject]:
    """Cluster strokes into object instances, greedily in drawing order.

    A new object starts when the pause between consecutive strokes exceeds
    temporal_gap OR the gap between the previous stroke's end and the next
    stroke's start exceeds spatial_gap_fraction * canvas diagonal.  Every
    stroke lands in exactly one object.
    """
    if not canvas.strokes:
        raise EmptyCanvas("canvas has no strokes")
    if temporal_gap <= 0:
        raise ValueError("temporal_gap must be positive")
    if not 0 < spatial_gap_fraction < 1:
        raise ValueError("spatial_gap_fraction must be in (0, 1)")

    spatial_limit = spatial_gap_fraction * canvas.diagonal
    params = {
        "temporal_gap": temporal_gap,
        "spatial_gap_fraction": spatial_gap_fraction,
    }

    groups: List[List[Stroke]] = [[canvas.strokes[0]]]
    for prev, cur in zip(canvas.strokes, canvas.strokes[1:]):
        pause = cur.t0 - prev.t_end
        gap = math.dist(prev.points[-1].pos, cur.points[0].pos)
        if pause > temporal_gap or gap > spatial_limit:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    return [_make_object(i, g, params) for i, g in enumerate(groups)]


# --- lifting to 3D --------------------------------------------------------

def default_thickness(obj: SketchObject) -> float:
    xmin, ymin, xmax, ymax = obj.bbox
    return DEFAULT_THICKNESS_FRACTION * min(xmax - xmin, ymax - ymin)


def lift_to_3d(
    obj: SketchObject,
    thickness: Optional[float] = None,
    fit_primitives: bool = False,
) -> MeshPrimitive:
    """Lift an outline to a solid: extrusion by default, box/sphere when fitted.

    The prism lives in a local frame with the outline in the xy-plane,
    centered on the outline centroid, extruded symmetrically along z.
    """
    if thickness is None:
        thickness = default_thickness(obj)
    if thickness <= 0:
        raise ValueError("thickness must be positive")
    area = _polygon_area(obj.outline)
    if area < MIN_OUTLINE_AREA:
        raise DegenerateOutline(f"outline area {area} below {MIN_OUTLINE_AREA} m^2")

    if fit_primitives:
        d = obj.descriptors
        if d["circularity"] > CIRCULARITY_THRESHOLD:
            radius = math.sqrt(area / math.pi)
            return MeshPrimitive(
                kind="sphere", radius=radius, volume=4.0 / 3.0 * math.pi * radius**3
            )
        if d["rectangularity"] > RECTANGULARITY_THRESHOLD:
            hx = d["width"] / 2.0
            hy = d["height"] / 2.0
            return MeshPrimitive(
                kind="box",
                half_extents=(hx, hy, thickness / 2.0),
                volume=d["width"] * d["height"] * thickness,
            )

    cx, cy = obj.centroid
    n = len(obj.outline)
    half = thickness / 2.0
    bottom = [(x - cx, y - cy, -half) for x, y in obj.outline]
    top = [(x - cx, y - cy, half) for x, y in obj.outline]
    vertices = tuple(bottom + top)
    faces = []
    # bottom fan (wound downward) and top fan (upward)
    for i in range(1, n - 1):
        faces.append((0, i + 1, i))
        faces.append((n, n + i, n + i + 1))
    for i in range(n):
        j = (i + 1) % n
        faces.append((i, j, n + j))
        faces.append((i, n + j, n + i))
    return MeshPrimitive(
        kind="extruded_prism",
        vertices=vertices,
        faces=tuple(faces),
        volume=area * thickness,
    )
